#pragma once

#include <array>
#include <cstdint>

namespace bst {

// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Sequential 32-bit draws for one independent stream (seed, stream).
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream);
  std::uint32_t next() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }
  // Uniform integer in [0, n) by multiply-shift.
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>((std::uint64_t(next()) * n) >> 32); }
  double uniform() { return (next() >> 8) * (1.0 / 16777216.0); }

 private:
  void refill();
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace bst
