#include "bst/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "bst/errors.hpp"

namespace bst {

void WalkLattice::allocate() {
  for (int i = 0; i < dim_ - 1; ++i) extent_[i] = hi_[i] - lo_[i] + 1;
  extent_[dim_ - 1] = ytop_ - ybot_ + 1;
  std::size_t total = 1;
  for (int i = 0; i < dim_; ++i) total *= extent_[i];
  code_.assign(total, kFree);
}

bool WalkLattice::in_grid(const LatticePoint& p) const {
  for (int i = 0; i < dim_ - 1; ++i)
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  return p.y() >= ybot_ && p.y() <= ytop_;
}

std::size_t WalkLattice::cell(const LatticePoint& p) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_ - 1; ++i) idx = idx * extent_[i] + (p[i] - lo_[i]);
  return idx * extent_[dim_ - 1] + (p.y() - ybot_);
}

namespace {

template <class F>
void for_each_grid_point(int dim, const std::array<int, kMaxDim - 1>& lo, const std::array<int, kMaxDim - 1>& hi,
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

WalkLattice::WalkLattice(const Membrane& mem, std::optional<HorizontalBarrier> horizontal,
                         std::optional<VerticalBarrier> vertical)
    : dim_(mem.dim()), horizontal_(horizontal), vertical_(vertical) {
  for (int i = 0; i < dim_ - 1; ++i) {
    if (vertical_) {
      lo_[i] = -vertical_->half_width;
      hi_[i] = vertical_->half_width;
      if (mem.window_lo(i) < lo_[i] || mem.window_hi(i) > hi_[i])
        throw DomainError("window does not fit inside the vertical barrier");
    } else {
      lo_[i] = mem.window_lo(i);
      hi_[i] = mem.window_hi(i);
    }
  }
  ybot_ = mem.box_bottom();
  ytop_ = mem.box_top();
  if (horizontal_) {
    if (horizontal_->level < mem.N() + 1) throw DomainError("horizontal barrier cuts through the membrane");
    ytop_ = horizontal_->level;
  }
  allocate();
  for_each_grid_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    std::int32_t& c = code_[cell(p)];
    switch (mem.kind(p)) {
      case PointKind::Boundary:
        c = static_cast<std::int32_t>(targets_.size());
        targets_.push_back(*mem.index_of(p));
        break;
      case PointKind::Internal:
      case PointKind::Removed:
        c = kSolid;
        break;
      case PointKind::External: {
        std::array<LatticePoint, 2 * kMaxDim> to;
        bool any = false;
        for (int dir = 0; dir < 2 * dim_; ++dir) {
          to[dir] = mem.neighbor(p, dir);
          any = any || !(to[dir] == p.step(dir));
        }
        if (any) {
          c = kRelinkBase - static_cast<std::int32_t>(relinks_.size());
          relinks_.push_back(to);
        }
        break;
      }
    }
  });
  plane_index_ = [&mem](const LatticePoint& p) { return *mem.index_of(p); };
}

WalkLattice WalkLattice::one_point(int y0, std::optional<HorizontalBarrier> horizontal,
                                   std::optional<VerticalBarrier> vertical) {
  if (!horizontal) throw DomainError("the one-point lattice needs a horizontal barrier");
  if (y0 < 1 || y0 > horizontal->level) throw DomainError("absorbing point outside the strip");
  WalkLattice w(2);
  w.horizontal_ = horizontal;
  w.vertical_ = vertical;
  int R = vertical ? vertical->half_width : 2 * horizontal->level + y0 + 8;
  w.lo_[0] = -R;
  w.hi_[0] = R;
  w.ybot_ = 0;
  w.ytop_ = horizontal->level;
  w.allocate();
  for (int x = -R; x <= R; ++x) {
    w.code_[w.cell({x, 0})] = static_cast<std::int32_t>(w.targets_.size());
    w.targets_.push_back(x);
  }
  w.code_[w.cell({0, y0})] = kPoint;
  w.plane_index_ = [](const LatticePoint& p) { return SiteIndex(p[0]); };
  return w;
}

bool WalkLattice::free(const LatticePoint& p) const {
  if (p.dim != dim_) return false;
  if (horizontal_ && p.y() > horizontal_->level) return false;
  if (vertical_)
    for (int i = 0; i < dim_ - 1; ++i)
      if (std::abs(p[i]) > vertical_->half_width) return false;
  if (in_grid(p)) {
    std::int32_t c = code_[cell(p)];
    return c == kFree || c <= kRelinkBase;
  }
  return p.y() > 0;
}

WalkLattice::Move WalkLattice::move(const LatticePoint& p, int dir) const {
  Move m;
  LatticePoint q;
  if (in_grid(p)) {
    std::int32_t c = code_[cell(p)];
    q = c <= kRelinkBase ? relinks_[kRelinkBase - c][dir] : p.step(dir);
  } else {
    q = p.step(dir);
  }
  const int axis = direction_axis(dir);
  if (vertical_ && axis < dim_ - 1 && std::abs(q[axis]) > vertical_->half_width) {
    switch (vertical_->mode) {
      case VerticalMode::Cyclic: q[axis] = q[axis] > 0 ? -vertical_->half_width : vertical_->half_width; break;
      case VerticalMode::Absorbing: m.type = Move::Barrier; return m;
      case VerticalMode::Reflecting: m.to = p; return m;
    }
  }
  if (horizontal_ && q.y() > horizontal_->level) {
    if (horizontal_->mode == BarrierMode::Absorbing) {
      m.type = Move::Barrier;
      return m;
    }
    m.to = p;
    return m;
  }
  if (in_grid(q)) {
    std::int32_t c = code_[cell(q)];
    if (c >= 0) {
      m.type = Move::Target;
      m.index = targets_[c];
      return m;
    }
    if (c == kPoint) {
      m.type = Move::Point;
      return m;
    }
    if (c == kSolid) throw std::logic_error("walker stepped into the solid at " + q.str());
    m.to = q;
    return m;
  }
  if (q.y() > 0) {
    m.to = q;
    return m;
  }
  if (q.y() == 0) {
    m.type = Move::Target;
    m.index = plane_index_(q);
    return m;
  }
  throw std::logic_error("walker left the lattice at " + q.str());
}

WalkLattice::Outcome WalkLattice::walk(LatticePoint p, PhiloxStream& rng, std::uint64_t max_steps) const {
  const std::uint32_t dirs = 2 * dim_;
  for (std::uint64_t s = 1; s <= max_steps; ++s) {
    Move m = move(p, static_cast<int>(rng.below(dirs)));
    switch (m.type) {
      case Move::To: p = m.to; break;
      case Move::Target: return {Kind::Target, m.index, s};
      case Move::Barrier: return {Kind::Barrier, 0, s};
      case Move::Point: return {Kind::Point, 0, s};
    }
  }
  throw MaxStepsExceeded("walk exceeded " + std::to_string(max_steps) + " steps");
}

std::vector<LatticePoint> WalkLattice::states() const {
  if (!finite()) throw DomainError("lattice is infinite: set both a horizontal and a vertical barrier");
  std::vector<LatticePoint> out;
  for_each_grid_point(dim_, lo_, hi_, ybot_, ytop_, [&](const LatticePoint& p) {
    std::int32_t c = code_[cell(p)];
    if (c == kFree || c <= kRelinkBase) out.push_back(p);
  });
  return out;
}

double WalkReport::probability(SiteIndex n) const {
  auto it = hits.find(n);
  return it == hits.end() || trials == 0 ? 0.0 : double(it->second) / double(trials);
}

WalkReport run_walks(const WalkLattice& lattice, const LatticePoint& start, const WalkConfig& cfg) {
  if (!lattice.free(start)) throw DomainError("walk start " + start.str() + " is not a free external point");
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, cfg.trials)));
  std::vector<WalkReport> parts(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned t) {
    try {
      std::uint64_t begin = cfg.trials * t / threads, end = cfg.trials * (t + 1) / threads;
      std::unordered_map<SiteIndex, std::uint64_t> local;
      WalkReport& r = parts[t];
      for (std::uint64_t i = begin; i < end; ++i) {
        PhiloxStream rng(cfg.seed, cfg.stream_offset + i);
        auto o = lattice.walk(start, rng, cfg.max_steps);
        r.total_steps += o.steps;
        r.longest = std::max(r.longest, o.steps);
        if (o.kind == WalkLattice::Kind::Target) ++local[o.index];
        else if (o.kind == WalkLattice::Kind::Barrier) ++r.barrier;
        else ++r.point;
      }
      r.hits.insert(local.begin(), local.end());
      r.trials = end - begin;
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  WalkReport out;
  for (const auto& r : parts) {
    out.trials += r.trials;
    out.barrier += r.barrier;
    out.point += r.point;
    out.total_steps += r.total_steps;
    out.longest = std::max(out.longest, r.longest);
    for (auto [n, c] : r.hits) out.hits[n] += c;
  }
  return out;
}

Eigen::MatrixXd monte_carlo_operator(const WalkLattice& lattice, const Membrane& mem,
                                     const std::vector<SiteIndex>& sites, const WalkConfig& cfg,
                                     std::uint64_t* total_steps) {
  const int n = static_cast<int>(sites.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  std::uint64_t steps = 0;
  for (int k = 0; k < n; ++k) {
    WalkConfig row = cfg;
    row.stream_offset = cfg.stream_offset + std::uint64_t(k) * cfg.trials;
    auto rep = run_walks(lattice, mem.site(sites[k]).near(), row);
    steps += rep.total_steps;
    for (auto [idx, c] : rep.hits) {
      auto it = std::lower_bound(sites.begin(), sites.end(), idx);
      if (it != sites.end() && *it == idx) Q(k, it - sites.begin()) = double(c) / double(cfg.trials);
    }
  }
  if (total_steps) *total_steps = steps;
  return Q;
}

AlphaResult alpha_statistic(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& estimate, std::uint64_t trials) {
  AlphaResult r;
  const double s = std::sqrt(double(trials));
  for (int i = 0; i < exact.rows(); ++i)
    for (int j = 0; j < exact.cols(); ++j) {
      double q = exact(i, j);
      if (q <= 0) {
        ++r.excluded;
        continue;
      }
      double a = std::abs(q - estimate(i, j)) / std::sqrt(q) * s;
      if (a > r.alpha) r.alpha = a, r.row = i, r.col = j;
    }
  return r;
}

double BoxSolution::at(const LatticePoint& p, int column) const { return values(row.at(p), column); }

namespace {

// Transition table of a finite lattice: per state and direction, the
// destination state (>= 0), a target column (-1 - col) or barrier loss.
struct Chain {
  std::vector<LatticePoint> states;
  std::unordered_map<LatticePoint, int, LatticePointHash> row;
  std::vector<int> next;
  int dirs = 0;
};

constexpr int kLost = std::numeric_limits<int>::min();

Chain build_chain(const WalkLattice& w, const std::vector<SiteIndex>& targets) {
  Chain c;
  c.states = w.states();
  c.dirs = 2 * w.dim();
  for (std::size_t i = 0; i < c.states.size(); ++i) c.row[c.states[i]] = static_cast<int>(i);
  const int other = static_cast<int>(targets.size());
  c.next.resize(c.states.size() * c.dirs);
  for (std::size_t i = 0; i < c.states.size(); ++i)
    for (int dir = 0; dir < c.dirs; ++dir) {
      auto m = w.move(c.states[i], dir);
      int& out = c.next[i * c.dirs + dir];
      switch (m.type) {
        case WalkLattice::Move::To: out = c.row.at(m.to); break;
        case WalkLattice::Move::Target: {
          auto it = std::find(targets.begin(), targets.end(), m.index);
          out = -1 - (it == targets.end() ? other : static_cast<int>(it - targets.begin()));
          break;
        }
        case WalkLattice::Move::Point: out = -1 - other; break;
        case WalkLattice::Move::Barrier: out = kLost; break;
      }
    }
  return c;
}

}  // namespace

BoxSolution dense_box_solve(const WalkLattice& w, const std::vector<SiteIndex>& targets, double lambda) {
  Chain c = build_chain(w, targets);
  const int n = static_cast<int>(c.states.size());
  const int cols = static_cast<int>(targets.size()) + 1;
  const double p = lambda / c.dirs;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, cols);
  for (int i = 0; i < n; ++i) {
    double diag = 1.0;
    for (int dir = 0; dir < c.dirs; ++dir) {
      int t = c.next[i * c.dirs + dir];
      if (t == i) diag -= p;
      else if (t >= 0) trip.emplace_back(i, t, -p);
      else if (t != kLost) B(i, -1 - t) += p;
    }
    trip.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("box system factorization failed");
  BoxSolution out;
  out.targets = targets;
  out.values = lu.solve(B);
  out.states = std::move(c.states);
  out.row = std::move(c.row);
  return out;
}

Eigen::MatrixXd time_stepped_distribution(const WalkLattice& w, const LatticePoint& start,
                                          const std::vector<SiteIndex>& targets, int steps) {
  Chain c = build_chain(w, targets);
  const int cols = static_cast<int>(targets.size()) + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(steps + 1, cols);
  auto it = c.row.find(start);
  if (it == c.row.end()) throw DomainError("time stepping start " + start.str() + " is not a free point");
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(c.states.size()), fresh(c.states.size());
  dist(it->second) = 1.0;
  const double p = 1.0 / c.dirs;
  for (int t = 1; t <= steps; ++t) {
    fresh.setZero();
    for (Eigen::Index i = 0; i < dist.size(); ++i) {
      double m = dist(i);
      if (m == 0.0) continue;
      for (int dir = 0; dir < c.dirs; ++dir) {
        int to = c.next[i * c.dirs + dir];
        if (to >= 0) fresh(to) += m * p;
        else if (to != kLost) P(t, -1 - to) += m * p;
      }
    }
    dist.swap(fresh);
  }
  return P;
}

}  // namespace bst
