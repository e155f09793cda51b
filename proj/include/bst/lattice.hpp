#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

namespace bst {

inline constexpr int kMaxDim = 3;

using SiteIndex = std::int64_t;

// Point of Z^d, d <= kMaxDim. The last coordinate is the vertical one.
struct LatticePoint {
  std::array<int, kMaxDim> c{};
  int dim = 2;

  LatticePoint() = default;
  LatticePoint(int x, int y) : c{x, y, 0}, dim(2) {}
  LatticePoint(int x0, int x1, int y) : c{x0, x1, y}, dim(3) {}
  static LatticePoint zero(int dim);

  int& operator[](int i) { return c[i]; }
  int operator[](int i) const { return c[i]; }
  int y() const { return c[dim - 1]; }
  int& y() { return c[dim - 1]; }

  // Neighbour in direction dir = 2 * axis + (0 for -, 1 for +).
  LatticePoint step(int dir) const;

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) {
    return a.dim == b.dim && a.c == b.c;
  }
  friend bool operator<(const LatticePoint& a, const LatticePoint& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.c < b.c;
  }
  LatticePoint operator-(const LatticePoint& o) const;
  LatticePoint operator+(const LatticePoint& o) const;

  std::string str() const;
};

inline int direction_axis(int dir) { return dir / 2; }
inline int direction_sign(int dir) { return (dir % 2) ? 1 : -1; }
inline int opposite_direction(int dir) { return dir ^ 1; }
int direction_of(const LatticePoint& from, const LatticePoint& to);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < p.dim; ++i) {
      h ^= static_cast<std::uint32_t>(p.c[i]);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace bst
