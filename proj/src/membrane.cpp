#include "bst/membrane.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "bst/errors.hpp"

namespace bst {

namespace {

// Axes other than `axis`, in increasing order.
std::array<int, kMaxDim - 1> other_axes(int axis, int dim) {
  std::array<int, kMaxDim - 1> out{};
  int k = 0;
  for (int i = 0; i < dim; ++i)
    if (i != axis) out[k++] = i;
  return out;
}

bool on_facet(const Facet& f, const LatticePoint& p) {
  if (p[f.axis] != f.level) return false;
  auto oth = other_axes(f.axis, p.dim);
  for (int k = 0; k < p.dim - 1; ++k)
    if (p[oth[k]] < f.lo[k] || p[oth[k]] > f.hi[k]) return false;
  return true;
}

}  // namespace

int default_window_margin(int dim) { return dim == 2 ? 32 : 5; }

Membrane build_membrane(const MembraneSpec& spec, std::optional<int> window_margin) {
  return Membrane(spec, window_margin.value_or(default_window_margin(spec.dim)));
}

Membrane::Membrane(MembraneSpec spec, int window_margin)
    : spec_(std::move(spec)), dim_(spec_.dim), margin_(window_margin) {
  if (dim_ != 2 && dim_ != 3) throw DomainError("membranes are supported in dimensions 2 and 3");
  if (margin_ < 1) throw DomainError("window margin must be at least 1");
  if (dim_ == 2) prepare_polyline();
  else prepare_facets();
  setup_box();
  rasterize();
  classify_cells();
  check_accessibility();
  enumerate();
}

void Membrane::prepare_polyline() {
  auto& poly = spec_.polyline;
  spec_.facets.clear();
  if (poly.empty()) {
    flo_[0] = fhi_[0] = 0;
    return;
  }
  if (poly.size() < 2) throw ValidationError(ViolationKind::Boundary, poly[0].str(), "polyline needs two vertices");
  if (poly.front().y() != 0)
    throw ValidationError(ViolationKind::Boundary, poly.front().str(), "polyline must start on the plane");
  if (poly.back().y() != 0)
    throw ValidationError(ViolationKind::Boundary, poly.back().str(), "polyline must end on the plane");
  std::unordered_set<LatticePoint, LatticePointHash> seen;
  traversal_.push_back(poly[0]);
  seen.insert(poly[0]);
  for (std::size_t s = 0; s + 1 < poly.size(); ++s) {
    const auto& a = poly[s];
    const auto& b = poly[s + 1];
    int dx = b[0] - a[0], dy = b[1] - a[1];
    if (dx != 0 && dy != 0)
      throw ValidationError(ViolationKind::Accessibility, a.str(), "diagonal segment to " + b.str());
    if (dx == 0 && dy == 0) throw ValidationError(ViolationKind::Bijection, a.str(), "repeated vertex");
    Facet f;
    if (dx == 0) {
      f.axis = 0;
      f.level = a[0];
      f.lo[0] = std::min(a[1], b[1]);
      f.hi[0] = std::max(a[1], b[1]);
    } else {
      f.axis = 1;
      f.level = a[1];
      f.lo[0] = std::min(a[0], b[0]);
      f.hi[0] = std::max(a[0], b[0]);
    }
    spec_.facets.push_back(f);
    int sx = (dx > 0) - (dx < 0), sy = (dy > 0) - (dy < 0);
    LatticePoint p = a;
    while (!(p == b)) {
      p[0] += sx;
      p[1] += sy;
      if (!seen.insert(p).second)
        throw ValidationError(ViolationKind::Bijection, p.str(), "polyline passes twice through the point");
      traversal_.push_back(p);
    }
  }
  flo_[0] = poly.front()[0];
  fhi_[0] = poly.back()[0];
  if (flo_[0] >= fhi_[0])
    throw ValidationError(ViolationKind::Boundary, poly.front().str(), "polyline must end to the right of its start");
  for (std::size_t i = 1; i + 1 < traversal_.size(); ++i) {
    const auto& p = traversal_[i];
    if (p.y() == 0 && (p[0] <= flo_[0] || p[0] >= fhi_[0]))
      throw ValidationError(ViolationKind::Boundary, p.str(), "polyline touches a plane tail");
  }
}

void Membrane::prepare_facets() {
  flo_ = {spec_.footprint[0], spec_.footprint[2]};
  fhi_ = {spec_.footprint[1], spec_.footprint[3]};
  for (const auto& f : spec_.facets) {
    auto oth = other_axes(f.axis, 3);
    LatticePoint p = LatticePoint::zero(3);
    p[f.axis] = f.level;
    for (int a = f.lo[0]; a <= f.hi[0]; ++a)
      for (int b = f.lo[1]; b <= f.hi[1]; ++b) {
        p[oth[0]] = a;
        p[oth[1]] = b;
        traversal_.push_back(p);
      }
  }
}

void Membrane::setup_box() {
  const int h = dim_ - 1;
  int ymin = 0, ymax = 0;
  for (int i = 0; i < h; ++i) lo_[i] = flo_[i], hi_[i] = fhi_[i];
  for (const auto& p : traversal_) {
    for (int i = 0; i < h; ++i) lo_[i] = std::min(lo_[i], p[i]), hi_[i] = std::max(hi_[i], p[i]);
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  for (int i = 0; i < h; ++i) lo_[i] -= margin_, hi_[i] += margin_;
  ybot_ = ymin - 1;
  ytop_ = ymax + 1;
  for (int i = 0; i < h; ++i) extent_[i] = hi_[i] - lo_[i] + 1;
  extent_[h] = ytop_ - ybot_ + 1;
}

bool Membrane::in_box(const LatticePoint& p) const {
  for (int i = 0; i < dim_ - 1; ++i)
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  return p.y() >= ybot_ && p.y() <= ytop_;
}

// Layout: first horizontal axis outermost, vertical innermost.
std::size_t Membrane::cell(const LatticePoint& p) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_ - 1; ++i) idx = idx * extent_[i] + (p[i] - lo_[i]);
  return idx * extent_[dim_ - 1] + (p.y() - ybot_);
}

bool Membrane::open_footprint_contains(const LatticePoint& p) const {
  for (int i = 0; i < dim_ - 1; ++i)
    if (p[i] <= flo_[i] || p[i] >= fhi_[i]) return false;
  return true;
}

bool Membrane::solid(const LatticePoint& p) const {
  if (in_box(p)) return solid_[cell(p)] != 0;
  return p.y() <= 0;
}

// A point is solid when it lies on the surface, or when a ray cast upward
// from the point shifted by +eps in every horizontal coordinate crosses the
// surface an odd number of times.
void Membrane::rasterize() {
  std::size_t total = 1;
  for (int i = 0; i < dim_; ++i) total *= extent_[i];
  solid_.assign(total, 0);
  const int h = dim_ - 1;
  std::vector<const Facet*> roofs;
  for (const auto& f : spec_.facets)
    if (f.axis == h) roofs.push_back(&f);
  LatticePoint p = LatticePoint::zero(dim_);
  auto visit = [&]() {
    bool on = p.y() == 0 && !open_footprint_contains(p);
    for (const auto& f : spec_.facets) on = on || on_facet(f, p);
    bool inside = on;
    if (!on) {
      int crossings = 0;
      for (const Facet* f : roofs) {
        if (f->level <= p.y()) continue;
        bool hit = true;
        for (int k = 0; k < h; ++k) hit = hit && f->lo[k] <= p[k] && p[k] < f->hi[k];
        crossings += hit;
      }
      if (p.y() < 0) {
        bool hole = true;
        for (int k = 0; k < h; ++k) hole = hole && flo_[k] <= p[k] && p[k] < fhi_[k];
        crossings += !hole;
      }
      inside = crossings % 2 == 1;
    }
    solid_[cell(p)] = inside;
  };
  if (dim_ == 2) {
    for (p[0] = lo_[0]; p[0] <= hi_[0]; ++p[0])
      for (p[1] = ybot_; p[1] <= ytop_; ++p[1]) visit();
  } else {
    for (p[0] = lo_[0]; p[0] <= hi_[0]; ++p[0])
      for (p[1] = lo_[1]; p[1] <= hi_[1]; ++p[1])
        for (p[2] = ybot_; p[2] <= ytop_; ++p[2]) visit();
  }
}

}  // namespace bst
