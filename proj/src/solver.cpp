#include "bst/solver.hpp"

#include <algorithm>
#include <unordered_map>

#include "bst/errors.hpp"

namespace bst {

// ---------------------------------------------------------------- site sets

SiteSet SiteSet::window(const Membrane& m) {
  SiteSet s;
  for (const auto& b : m.boundary()) s.indices.push_back(b.index);
  return s;
}

SiteSet SiteSet::nonplane(const Membrane& m) {
  SiteSet s;
  for (SiteIndex i = 1; i <= m.M(); ++i) s.indices.push_back(i);
  return s;
}

void SiteSet::validate(const Membrane& m) const {
  if (!std::is_sorted(indices.begin(), indices.end()) ||
      std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw DomainError("site set must be ascending without repeats");
  for (SiteIndex i : indices)
    if (!m.in_window(i)) throw DomainError("site " + std::to_string(i) + " lies outside the window");
  for (SiteIndex i = 1; i <= m.M(); ++i)
    if (position(i) < 0) throw DomainError("site set misses non-plane point " + std::to_string(i));
}

int SiteSet::position(SiteIndex m) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), m);
  if (it == indices.end() || *it != m) return -1;
  return static_cast<int>(it - indices.begin());
}

Eigen::MatrixXd OperatorBlocks::reduced_D() const {
  if (ground.empty()) return DNN;
  return DNN + DNG * DGG.partialPivLu().solve(DGN);
}

Eigen::MatrixXd OperatorBlocks::reduced_Qstar() const {
  if (ground.empty()) return Qstar;
  return Qstar + DNG * DGG.partialPivLu().solve(rhsG);
}

// ------------------------------------------------------------------- system

namespace {

struct FaceLink {
  LatticePoint face;
  LatticePoint partner;
  bool reflecting;
};

using PointMap = std::unordered_map<LatticePoint, int, LatticePointHash>;

}  // namespace

struct TransportSystem::Impl {
  const Membrane& mem;
  const KernelTable& ker;
  SiteSet sites;
  SolverOptions opt;
  int d;
  int cols;  // sites + residual column

  std::vector<LatticePoint> sources;
  std::vector<std::vector<LatticePoint>> source_ext;
  std::vector<std::pair<LatticePoint, LatticePoint>> relinks;
  std::vector<FaceLink> faces;
  std::vector<LatticePoint> site_near;    // near point of each site
  std::vector<LatticePoint> outside_near; // near points of window points not in the site set
  PointMap nidx, gidx;

  OperatorBlocks blocks;
  Eigen::MatrixXd uN, uG;
  int clamped = 0;

  Impl(const Membrane& m, const KernelTable& k, SiteSet s, SolverOptions o)
      : mem(m), ker(k), sites(std::move(s)), opt(o), d(m.dim()) {
    if (k.dim() != m.dim()) throw DomainError("kernel and membrane dimensions differ");
    sites.validate(mem);
    cols = static_cast<int>(sites.size()) + 1;
    check_barriers();
    collect();
    build();
    solve();
  }

  double Dpt(const LatticePoint& p, const LatticePoint& q) const {
    int x[kMaxDim];
    for (int i = 0; i < d - 1; ++i) x[i] = p[i] - q[i];
    return ker.D(std::span<const int>(x, d - 1), p.y(), q.y());
  }
  double Hpt(const LatticePoint& p, const LatticePoint& q) const {
    int x[kMaxDim];
    for (int i = 0; i < d - 1; ++i) x[i] = p[i] - q[i];
    return ker.H(std::span<const int>(x, d - 1), p.y() - q.y());
  }

  void check_barriers() {
    const auto& cfg = ker.config();
    if (!cfg.vertical) return;
    int L = cfg.vertical->half_width;
    for (int i = 0; i < d - 1; ++i)
      if (mem.window_lo(i) < -L || mem.window_hi(i) > L)
        throw DomainError("window does not fit inside the vertical barrier");
    if (cfg.vertical->mode == VerticalMode::Cyclic) return;
    if (!cfg.horizontal) throw DomainError("absorbing or reflecting vertical barrier needs a horizontal barrier");
    for (const auto& b : mem.boundary())
      for (int i = 0; i < d - 1; ++i)
        if (b.position.y() != 0 && std::abs(b.position[i]) >= L)
          throw DomainError("membrane touches the vertical barrier");
  }

  void add_near(const LatticePoint& p) {
    if (p.y() == 0) return;
    nidx.try_emplace(p, static_cast<int>(blocks.near_points.size()));
    if (nidx.size() > blocks.near_points.size()) blocks.near_points.push_back(p);
  }

  void collect() {
    for (SiteIndex n : sites.indices) site_near.push_back(mem.site(n).near());
    for (const auto& b : mem.boundary())
      if (sites.position(b.index) < 0) outside_near.push_back(b.near());
    for (const auto& p : site_near) add_near(p);
    auto add_source = [&](const LatticePoint& s) {
      std::vector<LatticePoint> ext;
      for (int dir = 0; dir < 2 * d; ++dir) {
        LatticePoint e = s.step(dir);
        if (mem.kind(e) != PointKind::External) continue;
        ext.push_back(e);
        add_near(e);
      }
      sources.push_back(s);
      source_ext.push_back(std::move(ext));
    };
    for (const auto& b : mem.boundary())
      if (b.position.y() != 0) add_source(b.position);
    if (opt.corner_terms) {
      for (const auto& c : mem.corners())
        if (c.removed.y() != 0) add_source(c.removed);
      for (const auto& r : mem.relinks())
        if (r.from.y() != 0) {
          relinks.emplace_back(r.from, r.to);
          add_near(r.to);
        }
    }
    const auto& cfg = ker.config();
    if (cfg.vertical && cfg.vertical->mode != VerticalMode::Cyclic) {
      const int L = cfg.vertical->half_width;
      const bool refl = cfg.vertical->mode == VerticalMode::Reflecting;
      LatticePoint p = LatticePoint::zero(d);
      auto each = [&](int axis) {
        for (int side : {-1, 1}) {
          LatticePoint f = p, q = p;
          f[axis] = side * L;
          q[axis] = -side * L;
          faces.push_back({f, q, refl});
          add_near(f);
          add_near(q);
        }
      };
      for (int y = 1; y <= cfg.horizontal->level; ++y) {
        p.y() = y;
        if (d == 2) {
          each(0);
        } else {
          for (int a = -L; a <= L; ++a) {
            p[1] = a;
            each(0);
          }
          p[1] = 0;
          for (int a = -L; a <= L; ++a) {
            p[0] = a;
            each(1);
          }
          p[0] = 0;
        }
      }
    }
    blocks.ground = mem.ground_points();
    for (std::size_t g = 0; g < blocks.ground.size(); ++g) gidx[blocks.ground[g]] = static_cast<int>(g);
    blocks.sites = sites;
  }

  // Boundary representation of u at an off-plane external point q:
  //   u(q) = K + aN . uN + aG . uG
  void rep_row(const LatticePoint& q, Eigen::Ref<Eigen::RowVectorXd> aN, Eigen::Ref<Eigen::RowVectorXd> aG,
               Eigen::Ref<Eigen::RowVectorXd> K) const {
    aN.setZero();
    aG.setZero();
    K.setZero();
    auto add = [&](const LatticePoint& p, double w) {
      if (w == 0.0) return;
      if (p.y() == 0) {
        auto it = gidx.find(p);
        if (it != gidx.end()) aG(it->second) += w;
        return;
      }
      aN(nidx.at(p)) += w;
    };
    const bool up = q.y() > 0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      if ((sources[s].y() > 0) != up) continue;
      double w = Dpt(q, sources[s]);
      if (w == 0.0) continue;
      for (const auto& e : source_ext[s]) add(e, -w);
    }
    for (const auto& [e, t] : relinks)
      if ((e.y() > 0) == up) add(t, Dpt(q, e));
    for (const auto& f : faces) {
      if (!up) break;
      double w = Dpt(q, f.face);
      add(f.partner, -w);
      if (f.reflecting) add(f.face, w);
    }
    for (std::size_t g = 0; g < blocks.ground.size(); ++g) aG(g) += Hpt(q, blocks.ground[g]);
    for (std::size_t j = 0; j < site_near.size(); ++j) K(j) = Dpt(q, site_near[j]);
    double res = 0;
    for (const auto& p : outside_near) res += Dpt(q, p);
    if (up) {
      res += ker.total(q.y());
      LatticePoint x = LatticePoint::zero(d);
      if (d == 2) {
        for (x[0] = mem.window_lo(0); x[0] <= mem.window_hi(0); ++x[0]) res -= Hpt(q, x);
      } else {
        for (x[0] = mem.window_lo(0); x[0] <= mem.window_hi(0); ++x[0])
          for (x[1] = mem.window_lo(1); x[1] <= mem.window_hi(1); ++x[1]) res -= Hpt(q, x);
      }
    }
    K(cols - 1) = res;
  }

  void reserve_kernels() const {
    int ymax = 2 * std::max(mem.N(), mem.Nstar()) + 4;
    if (ker.config().horizontal) ymax = std::max(ymax, 2 * ker.config().horizontal->level + 2);
    int radius = 0;
    for (int i = 0; i < d - 1; ++i) radius = std::max(radius, mem.window_hi(i) - mem.window_lo(i) + 2);
    for (int y = 1; y <= ymax; ++y) {
      ker.reserve(y, radius);
      if (y <= mem.Nstar() * 2 + 2) ker.reserve(-y, radius);
    }
  }

  void build() {
    reserve_kernels();
    const int nN = static_cast<int>(blocks.near_points.size());
    const int nG = static_cast<int>(blocks.ground.size());
    blocks.DNN.setZero(nN, nN);
    blocks.DNG.setZero(nN, nG);
    blocks.Qstar.setZero(nN, cols);
    Eigen::RowVectorXd aN(nN), aG(nG), K(cols);
    for (int r = 0; r < nN; ++r) {
      rep_row(blocks.near_points[r], aN, aG, K);
      blocks.DNN.row(r) = -aN;
      blocks.DNG.row(r) = aG;
      blocks.Qstar.row(r) = K;
    }
    const double diag = d / ker.config().lambda;
    blocks.DGN.setZero(nG, nN);
    blocks.DGG.setZero(nG, nG);
    blocks.rhsG.setZero(nG, cols);
    for (int g = 0; g < nG; ++g) {
      const LatticePoint& p = blocks.ground[g];
      blocks.DGG(g, g) += diag;
      for (int dir = 0; dir < 2 * d; ++dir) {
        LatticePoint t = mem.neighbor(p, dir);
        PointKind k = mem.kind(t);
        if (k == PointKind::Boundary) {
          int c = sites.position(*mem.index_of(t));
          blocks.rhsG(g, c < 0 ? cols - 1 : c) += 0.5;
        } else if (k == PointKind::External) {
          if (t.y() == 0) {
            blocks.DGG(g, gidx.at(t)) -= 0.5;
          } else {
            rep_row(t, aN, aG, K);
            blocks.DGN.row(g) -= 0.5 * aN;
            blocks.DGG.row(g) -= 0.5 * aG;
            blocks.rhsG.row(g) += 0.5 * K;
          }
        }
      }
    }
  }

  void solve() {
    const int nN = static_cast<int>(blocks.near_points.size());
    const int nG = static_cast<int>(blocks.ground.size());
    Eigen::MatrixXd S(nN + nG, nN + nG);
    S.topLeftCorner(nN, nN) = Eigen::MatrixXd::Identity(nN, nN) + blocks.DNN;
    S.topRightCorner(nN, nG) = -blocks.DNG;
    S.bottomLeftCorner(nG, nN) = blocks.DGN;
    S.bottomRightCorner(nG, nG) = blocks.DGG;
    Eigen::MatrixXd rhs(nN + nG, cols);
    rhs.topRows(nN) = blocks.Qstar;
    rhs.bottomRows(nG) = blocks.rhsG;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    if (!(lu.rcond() > 1e-14)) throw SingularMatrixError("transport system is singular (rcond " + std::to_string(lu.rcond()) + ")");
    Eigen::MatrixXd u = lu.solve(rhs);
    uN = u.topRows(nN);
    uG = u.bottomRows(nG);
    if (opt.corner_terms) {
      clamped = enforce_positive(uN) + enforce_positive(uG);
    }
  }

  int enforce_positive(Eigen::MatrixXd& m) const {
    int n = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double& v = m.data()[i];
      if (v >= 0) continue;
      if (v < -opt.clamp_tolerance)
        throw NumericalError("negative probability " + std::to_string(v) + " beyond tolerance");
      v = 0;
      ++n;
    }
    return n;
  }

  Eigen::RowVectorXd value_row(const LatticePoint& p) const {
    if (p.y() == 0) return uG.row(gidx.at(p));
    if (auto it = nidx.find(p); it != nidx.end()) return uN.row(it->second);
    return composed_row(p);
  }

  Eigen::RowVectorXd composed_row(const LatticePoint& p) const {
    const int nN = static_cast<int>(blocks.near_points.size());
    const int nG = static_cast<int>(blocks.ground.size());
    Eigen::RowVectorXd aN(nN), aG(nG), K(cols);
    rep_row(p, aN, aG, K);
    Eigen::RowVectorXd out = K + aN * uN + aG * uG;
    for (Eigen::Index j = 0; j < out.size(); ++j)
      if (out(j) < 0 && out(j) >= -opt.clamp_tolerance) out(j) = 0;
    return out;
  }

  LatticePoint normalize_start(LatticePoint p) const {
    const auto& cfg = ker.config();
    if (p.dim != d) throw DomainError("start point has the wrong dimension");
    if (cfg.horizontal && p.y() > cfg.horizontal->level) throw DomainError("start lies beyond the horizontal barrier");
    if (!cfg.vertical) return p;
    const int L = cfg.vertical->half_width, P = cfg.vertical->period();
    for (int i = 0; i < d - 1; ++i) {
      if (cfg.vertical->mode == VerticalMode::Cyclic) p[i] = ((p[i] + L) % P + P) % P - L;
      else if (std::abs(p[i]) > L) throw DomainError("start lies beyond the vertical barrier");
    }
    return p;
  }
};

TransportSystem::TransportSystem(const Membrane& membrane, const KernelTable& kernels, SiteSet sites,
                                 SolverOptions options)
    : impl_(std::make_unique<Impl>(membrane, kernels, std::move(sites), options)) {}
TransportSystem::~TransportSystem() = default;
TransportSystem::TransportSystem(TransportSystem&&) noexcept = default;

const SiteSet& TransportSystem::sites() const { return impl_->sites; }
const OperatorBlocks& TransportSystem::blocks() const { return impl_->blocks; }
const Eigen::MatrixXd& TransportSystem::near_solution() const { return impl_->uN; }
const Eigen::MatrixXd& TransportSystem::ground_solution() const { return impl_->uG; }
int TransportSystem::clamped() const { return impl_->clamped; }

Eigen::MatrixXd TransportSystem::Q() const {
  const int n = static_cast<int>(impl_->sites.size());
  Eigen::MatrixXd Q(n, n);
  for (int k = 0; k < n; ++k) Q.row(k) = impl_->value_row(impl_->site_near[k]).head(n);
  return Q;
}

Eigen::VectorXd TransportSystem::tail() const {
  const int n = static_cast<int>(impl_->sites.size());
  Eigen::VectorXd t(n);
  for (int k = 0; k < n; ++k) t(k) = impl_->value_row(impl_->site_near[k])(n);
  return t;
}

Eigen::MatrixXd TransportSystem::Q_composed() const {
  const int n = static_cast<int>(impl_->sites.size());
  Eigen::MatrixXd Q(n, n);
  for (int k = 0; k < n; ++k) {
    const auto& p = impl_->site_near[k];
    Q.row(k) = (p.y() == 0 ? impl_->value_row(p) : impl_->composed_row(p)).head(n);
  }
  return Q;
}

HittingDistribution TransportSystem::hitting_distribution(const LatticePoint& start) const {
  const Impl& s = *impl_;
  LatticePoint p = s.normalize_start(start);
  const int n = static_cast<int>(s.sites.size());
  HittingDistribution h;
  h.start = start;
  h.sites = s.sites.indices;
  h.values.assign(n, 0.0);
  PointKind k = s.mem.kind(p);
  if (k == PointKind::Internal || k == PointKind::Removed)
    throw DomainError("start " + start.str() + " is not an external or boundary point");
  if (k == PointKind::Boundary) {
    int c = s.sites.position(*s.mem.index_of(p));
    if (c >= 0) h.values[c] = 1.0;
    else h.tail = 1.0;
  } else {
    Eigen::RowVectorXd row = s.value_row(p);
    for (int j = 0; j < n; ++j) h.values[j] = row(j);
    h.tail = row(n);
  }
  double sum = 0;
  for (double v : h.values) sum += v;
  h.residual = 1.0 - sum;
  return h;
}

// ---------------------------------------------------------------- functions

OperatorBlocks assemble(const Membrane& membrane, const KernelTable& kernels, const SiteSet& sites) {
  TransportSystem sys(membrane, kernels, sites, SolverOptions{false});
  return sys.blocks();
}

Eigen::MatrixXd solve_near_boundary(const OperatorBlocks& b) {
  Eigen::MatrixXd D = b.reduced_D();
  D += Eigen::MatrixXd::Identity(D.rows(), D.cols());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(D);
  if (D.rows() > 0 && !(lu.rcond() > 1e-14)) throw SingularMatrixError("I + D is singular");
  return lu.solve(b.reduced_Qstar());
}

Eigen::MatrixXd solve_ground(const OperatorBlocks& b, const Eigen::MatrixXd& near) {
  if (b.ground.empty()) return Eigen::MatrixXd(0, b.Qstar.cols());
  return b.DGG.partialPivLu().solve(b.rhsG - b.DGN * near);
}

TransportSystem corner_corrected_system(const Membrane& membrane, const KernelTable& kernels, const SiteSet& sites) {
  return TransportSystem(membrane, kernels, sites, SolverOptions{true});
}

SelfTransportOperator self_transport_operator(const Membrane& membrane, const KernelTable& kernels,
                                              const SiteSet& sites) {
  auto sys = corner_corrected_system(membrane, kernels, sites);
  return SelfTransportOperator{sites.indices, sys.Q(), sys.tail(), kernels.config().describe(), sys.clamped()};
}

HittingDistribution hitting_distribution(const Membrane& membrane, const KernelTable& kernels,
                                         const SiteSet& sites, const LatticePoint& start) {
  return corner_corrected_system(membrane, kernels, sites).hitting_distribution(start);
}

double one_point_probability(const KernelTable& kernels, int y0, const LatticePoint& start) {
  if (y0 < 1) throw DomainError("absorbing point must lie above the plane");
  if (start.y() < 0) throw DomainError("start lies below the plane");
  const int h = kernels.dim() - 1;
  int x[kMaxDim] = {0, 0, 0}, zero[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < h; ++i) x[i] = start[i];
  return kernels.D(std::span<const int>(x, h), start.y(), y0) / kernels.D(std::span<const int>(zero, h), y0, y0);
}

double one_point_plane(const KernelTable& kernels, int y0, const LatticePoint& start, const LatticePoint& target) {
  const int h = kernels.dim() - 1;
  int dx[kMaxDim] = {0, 0, 0}, dn[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < h; ++i) {
    dx[i] = start[i] - target[i];
    dn[i] = -target[i];
  }
  double p = one_point_probability(kernels, y0, start);
  return kernels.H(std::span<const int>(dx, h), start.y()) - kernels.H(std::span<const int>(dn, h), y0) * p;
}

}  // namespace bst
