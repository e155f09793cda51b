#include "bst/lattice.hpp"

#include "bst/errors.hpp"

namespace bst {

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Bijection: return "bijection";
    case ViolationKind::Boundary: return "boundary";
    case ViolationKind::Accessibility: return "accessibility";
    case ViolationKind::Compactness: return "compactness";
  }
  return "unknown";
}

LatticePoint LatticePoint::zero(int dim) {
  LatticePoint p;
  p.dim = dim;
  return p;
}

LatticePoint LatticePoint::step(int dir) const {
  LatticePoint q = *this;
  q.c[direction_axis(dir)] += direction_sign(dir);
  return q;
}

LatticePoint LatticePoint::operator-(const LatticePoint& o) const {
  LatticePoint q = *this;
  for (int i = 0; i < dim; ++i) q.c[i] -= o.c[i];
  return q;
}

LatticePoint LatticePoint::operator+(const LatticePoint& o) const {
  LatticePoint q = *this;
  for (int i = 0; i < dim; ++i) q.c[i] += o.c[i];
  return q;
}

std::string LatticePoint::str() const {
  std::string s = "(";
  for (int i = 0; i < dim; ++i) {
    if (i) s += ",";
    s += std::to_string(c[i]);
  }
  return s + ")";
}

int direction_of(const LatticePoint& from, const LatticePoint& to) {
  for (int dir = 0; dir < 2 * from.dim; ++dir)
    if (from.step(dir) == to) return dir;
  return -1;
}

}  // namespace bst
