#include "bst/philox.hpp"

namespace bst {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    std::uint64_t p0 = std::uint64_t(M0) * c[0];
    std::uint64_t p1 = std::uint64_t(M1) * c[2];
    c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
         std::uint32_t(p0)};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

void PhiloxStream::refill() {
  buf_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_),
                     std::uint32_t(stream_ >> 32)},
                    key_);
  ++block_;
  pos_ = 0;
}

}  // namespace bst
