#include <algorithm>
#include <deque>

#include "bst/errors.hpp"
#include "bst/membrane.hpp"

namespace bst {

namespace {

template <class F>
void for_each_box_point(int dim, const std::array<int, kMaxDim - 1>& lo, const std::array<int, kMaxDim - 1>& hi,
                        int ybot, int ytop, F&& f) {
  LatticePoint p = LatticePoint::zero(dim);
  if (dim == 2) {
    for (p[0] = lo[0]; p[0] <= hi[0]; ++p[0])
      for (p[1] = ybot; p[1] <= ytop; ++p[1]) f(p);
  } else {
    for (p[0] = lo[0]; p[0] <= hi[0]; ++p[0])
      for (p[1] = lo[1]; p[1] <= hi[1]; ++p[1])
        for (p[2] = ybot; p[2] <= ytop; ++p[2]) f(p);
  }
}

}  // namespace

void Membrane::classify_cells() {
  kinds_.assign(solid_.size(), PointKind::External);
  slot_.assign(solid_.size(), -1);
  std::vector<LatticePoint> removed;
  for_each_box_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    std::size_t c = cell(p);
    if (!solid_[c]) return;
    int count = 0, last = -1;
    std::array<bool, 2 * kMaxDim> ext{};
    for (int dir = 0; dir < 2 * dim_; ++dir)
      if (!solid(p.step(dir))) ext[dir] = true, ++count, last = dir;
    if (count == 0) {
      kinds_[c] = PointKind::Internal;
    } else if (count == 1) {
      kinds_[c] = PointKind::Boundary;
      boundary_.push_back(BoundaryPoint{0, p, last});
    } else {
      for (int a = 0; a < dim_; ++a)
        if (ext[2 * a] && ext[2 * a + 1])
          throw ValidationError(ViolationKind::Accessibility, p.str(),
                                "external neighbours on opposite sides of a one-point-thick wall");
      kinds_[c] = PointKind::Removed;
      removed.push_back(p);
    }
  });
  // boundary_ is rebuilt in index order by enumerate(); keep normals here.
  for (const auto& c : removed) {
    CornerRecord rec;
    rec.removed = c;
    for (int dir = 0; dir < 2 * dim_; ++dir)
      if (!solid(c.step(dir))) rec.normal_dirs.push_back(dir);
    const std::size_t k = rec.normal_dirs.size();
    for (std::size_t i = 0; i < k; ++i) {
      int d = rec.normal_dirs[i];
      LatticePoint from = c.step(d);
      LatticePoint to = c.step(rec.normal_dirs[(i + 1) % k]);
      int back = opposite_direction(d);
      auto [it, fresh] = relink_slot_.try_emplace(from);
      if (fresh) it->second.fill(-1);
      it->second[back] = static_cast<int>(relinks_.size());
      relinks_.push_back(Relink{from, back, to, c});
    }
    corners_.push_back(std::move(rec));
  }
}

void Membrane::check_accessibility() const {
  std::vector<std::uint8_t> seen(kinds_.size(), 0);
  std::deque<LatticePoint> queue;
  for_each_box_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    std::size_t c = cell(p);
    if (kinds_[c] != PointKind::External) return;
    if (p.y() < 0) {
      bool edge = p.y() == ybot_;
      for (int i = 0; i < dim_ - 1; ++i) edge = edge || p[i] == lo_[i] || p[i] == hi_[i];
      if (edge) throw ValidationError(ViolationKind::Compactness, p.str(), "external region below the plane is unbounded");
    }
    if (p.y() == ytop_) {
      seen[c] = 1;
      queue.push_back(p);
    }
  });
  while (!queue.empty()) {
    LatticePoint p = queue.front();
    queue.pop_front();
    for (int dir = 0; dir < 2 * dim_; ++dir) {
      LatticePoint q = neighbor(p, dir);
      if (!in_box(q)) continue;
      std::size_t c = cell(q);
      if (kinds_[c] != PointKind::External || seen[c]) continue;
      seen[c] = 1;
      queue.push_back(q);
    }
  }
  for_each_box_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    std::size_t c = cell(p);
    if (kinds_[c] == PointKind::External && !seen[c])
      throw ValidationError(ViolationKind::Accessibility, p.str(), "enclosed external cavity");
  });
}

void Membrane::enumerate() {
  std::vector<BoundaryPoint> unordered = std::move(boundary_);
  boundary_.clear();
  auto normal_of = [&](const LatticePoint& p) {
    for (int dir = 0; dir < 2 * dim_; ++dir)
      if (!solid(p.step(dir))) return dir;
    return 0;
  };
  auto take = [&](const LatticePoint& p) {
    std::size_t c = cell(p);
    if (kinds_[c] != PointKind::Boundary || slot_[c] >= 0) return;
    slot_[c] = static_cast<std::int32_t>(boundary_.size());
    boundary_.push_back(BoundaryPoint{static_cast<SiteIndex>(boundary_.size() + 1), p, normal_of(p)});
  };
  for (const auto& p : traversal_)
    if (p.y() != 0 || open_footprint_contains(p)) take(p);
  m_nonplane_ = static_cast<int>(boundary_.size());
  for (const auto& b : boundary_) {
    n_height_ = std::max(n_height_, b.position.y());
    n_depth_ = std::max(n_depth_, -b.position.y());
  }
  for (const auto& b : unordered) take(b.position);
  for_each_box_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    if (p.y() == 0 && kinds_[cell(p)] == PointKind::External) {
      ground_slot_[p] = static_cast<int>(ground_.size());
      ground_.push_back(p);
    }
  });
  for (auto& rec : corners_)
    for (int dir = 0; dir < 2 * dim_; ++dir)
      if (auto idx = index_of(rec.removed.step(dir))) rec.neighbor_indices.push_back(*idx);
  for (const auto& b : boundary_) near_of_[b.near()].push_back(b.index);
}

PointKind Membrane::kind(const LatticePoint& p) const {
  if (in_box(p)) return kinds_[cell(p)];
  if (p.y() > 0) return PointKind::External;
  return p.y() == 0 ? PointKind::Boundary : PointKind::Internal;
}

SiteIndex Membrane::index_beyond_window(const LatticePoint& p) const {
  const SiteIndex W = window_sites();
  if (dim_ == 2) return p[0] < lo_[0] ? p[0] - lo_[0] + 1 : W + (p[0] - hi_[0]);
  int r = 0;
  for (int i = 0; i < 2; ++i) r = std::max({r, lo_[i] - p[i], p[i] - hi_[i]});
  const SiteIndex w0 = extent_[0], w1 = extent_[1];
  SiteIndex before = (w0 + 2 * (r - 1)) * (w1 + 2 * (r - 1)) - w0 * w1;
  const int r0 = lo_[0] - r, r1 = hi_[0] + r, a1 = lo_[1] - r;
  const SiteIndex row = w1 + 2 * r;
  SiteIndex pos;
  if (p[0] == r0) pos = p[1] - a1;
  else if (p[0] < r1) pos = row + 2 * (p[0] - r0 - 1) + (p[1] == a1 ? 0 : 1);
  else pos = row + 2 * (w0 + 2 * r - 2) + (p[1] - a1);
  return W + before + pos + 1;
}

std::optional<SiteIndex> Membrane::index_of(const LatticePoint& p) const {
  if (p.dim != dim_ || kind(p) != PointKind::Boundary) return std::nullopt;
  if (in_box(p)) return boundary_[slot_[cell(p)]].index;
  return index_beyond_window(p);
}

bool Membrane::in_window(SiteIndex m) const { return m >= 1 && m <= window_sites(); }

const BoundaryPoint& Membrane::site(SiteIndex m) const {
  if (!in_window(m)) throw DomainError("site index " + std::to_string(m) + " is outside the window");
  return boundary_[m - 1];
}

PointClass Membrane::classify(const LatticePoint& p) const {
  PointClass out;
  out.kind = kind(p);
  if (out.kind == PointKind::Boundary) out.boundary = index_of(p);
  if (out.kind == PointKind::External) {
    if (auto it = near_of_.find(p); it != near_of_.end()) out.near_boundary_of = it->second;
    else if (!in_box(p) && p.y() == 1) out.near_boundary_of.push_back(*index_of(p.step(2 * (dim_ - 1))));
    if (auto g = ground_slot_.find(p); g != ground_slot_.end()) out.ground = g->second;
  }
  return out;
}

LatticePoint Membrane::neighbor(const LatticePoint& p, int dir) const {
  if (auto it = relink_slot_.find(p); it != relink_slot_.end() && it->second[dir] >= 0)
    return relinks_[it->second[dir]].to;
  return p.step(dir);
}

}  // namespace bst
