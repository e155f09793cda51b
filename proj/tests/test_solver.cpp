#include <doctest.h>

#include "bst/errors.hpp"
#include "bst/solver.hpp"

using namespace bst;

namespace {

Membrane fixture(const std::string& name, std::optional<int> margin = {}) {
  return build_membrane(load_membrane(std::string(BST_DATA_DIR) + "/" + name + ".mem"), margin);
}

double H2(const KernelTable& k, int x, int y) {
  int xs[1] = {x};
  return k.H(xs, y);
}

}  // namespace

TEST_CASE("site sets") {
  auto m = fixture("convex2d");
  auto w = SiteSet::window(m);
  CHECK(w.size() == 155);
  CHECK_NOTHROW(w.validate(m));
  auto n = SiteSet::nonplane(m);
  CHECK(n.size() == 91);
  SiteSet bad{{1, 2, 3}};
  CHECK_THROWS_AS(bad.validate(m), DomainError);
  CHECK(w.position(93) == 92);
  CHECK(n.position(150) == -1);
}

TEST_CASE("flat plane reduces to the Poisson kernel") {
  auto m = fixture("plane2d", 6);
  KernelTable k({});
  auto sys = corner_corrected_system(m, k, SiteSet::window(m));
  auto Q = sys.Q();
  auto tail = sys.tail();
  const auto& s = sys.sites().indices;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      int dx = m.site(s[i]).position[0] - m.site(s[j]).position[0];
      CHECK(Q(i, j) == doctest::Approx(H2(k, dx, 1)).epsilon(1e-12));
      row += Q(i, j);
    }
    CHECK(row + tail(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("convex rectangle conserves probability without barriers") {
  auto m = fixture("convex2d");
  KernelTable k({});
  auto sys = corner_corrected_system(m, k, SiteSet::window(m));
  auto Q = sys.Q();
  auto tail = sys.tail();
  for (int i = 0; i < Q.rows(); ++i) CHECK(Q.row(i).sum() + tail(i) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((Q.array() >= 0).all());
  CHECK((sys.Q_composed() - Q).cwiseAbs().maxCoeff() < 1e-10);
  // mirror symmetry: site 1 (left wall, bottom) and site 91 (right wall, bottom)
  int a = sys.sites().position(1), b = sys.sites().position(91);
  CHECK(m.site(91).position == LatticePoint(16, 1));
  CHECK(Q(a, a) == doctest::Approx(Q(b, b)).epsilon(1e-10));
}

TEST_CASE("concave rectangle with ground unknowns") {
  auto m = fixture("concave2d");
  KernelTable k({});
  auto sys = corner_corrected_system(m, k, SiteSet::window(m));
  CHECK(sys.blocks().ground.size() == 31);
  auto Q = sys.Q();
  auto tail = sys.tail();
  for (int i = 0; i < Q.rows(); ++i) CHECK(Q.row(i).sum() + tail(i) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((sys.Q_composed() - Q).cwiseAbs().maxCoeff() < 1e-10);
  auto& bl = sys.blocks();
  Eigen::MatrixXd D = bl.reduced_D();
  Eigen::MatrixXd rhs = bl.reduced_Qstar();
  Eigen::MatrixXd uN = (Eigen::MatrixXd::Identity(D.rows(), D.cols()) + D).partialPivLu().solve(rhs);
  CHECK((uN - sys.near_solution()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("plain assembly follows the kernel formulas") {
  auto m = fixture("bump5");
  KernelTable k({});
  auto sites = SiteSet::window(m);
  auto bl = assemble(m, k, sites);
  // near point row of site 1 against boundary point 2
  const auto& b1 = m.site(1);
  const auto& b2 = m.site(2);
  int r = -1;
  for (std::size_t i = 0; i < bl.near_points.size(); ++i)
    if (bl.near_points[i] == b1.near()) r = static_cast<int>(i);
  REQUIRE(r >= 0);
  int c = -1;
  for (std::size_t i = 0; i < bl.near_points.size(); ++i)
    if (bl.near_points[i] == b2.near()) c = static_cast<int>(i);
  REQUIRE(c >= 0);
  int dx[1] = {b1.near()[0] - b2.position[0]};
  CHECK(bl.DNN(r, c) == doctest::Approx(k.D(dx, b1.near().y(), b2.position.y())).epsilon(1e-13));
  int dq[1] = {b1.near()[0] - b2.near()[0]};
  CHECK(bl.Qstar(r, sites.position(2)) == doctest::Approx(k.D(dq, b1.near().y(), b2.near().y())).epsilon(1e-13));
  auto uN = solve_near_boundary(bl);
  CHECK(uN.rows() == static_cast<int>(bl.near_points.size()));
  CHECK(solve_ground(bl, uN).rows() == 0);
}

TEST_CASE("corner terms change the answer for the smallest bump") {
  auto m = fixture("bump1", 8);
  KernelTable k({});
  auto sites = SiteSet::window(m);
  TransportSystem plain(m, k, sites, SolverOptions{false});
  TransportSystem fixed(m, k, sites);
  double diff = (plain.Q() - fixed.Q()).cwiseAbs().maxCoeff();
  CHECK(diff > 1e-3);
  auto Q = fixed.Q();
  auto tail = fixed.tail();
  for (int i = 0; i < Q.rows(); ++i) CHECK(Q.row(i).sum() + tail(i) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("hitting distribution from arbitrary starts") {
  auto m = fixture("convex2d");
  KernelTable k({});
  auto sys = corner_corrected_system(m, k, SiteSet::window(m));
  auto h = sys.hitting_distribution({0, 40});
  double s = 0;
  for (double v : h.values) s += v;
  CHECK(s + h.tail == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h.residual == doctest::Approx(h.tail).epsilon(1e-9));
  auto at = sys.hitting_distribution(m.site(5).position);
  CHECK(at.values[sys.sites().position(5)] == 1.0);
  CHECK_THROWS_AS(sys.hitting_distribution({0, 5}), DomainError);
  CHECK_THROWS_AS(sys.hitting_distribution({-16, 31}), DomainError);
  auto row = sys.hitting_distribution(m.site(7).near());
  auto Q = sys.Q();
  int i = sys.sites().position(7);
  for (int j = 0; j < Q.cols(); ++j) CHECK(row.values[j] == doctest::Approx(Q(i, j)).epsilon(1e-12));
}

TEST_CASE("lambda below one loses mass") {
  auto m = fixture("bump5", 8);
  KernelConfig cfg;
  cfg.lambda = 0.7;
  KernelTable k(cfg);
  auto sys = corner_corrected_system(m, k, SiteSet::window(m));
  auto Q = sys.Q();
  auto tail = sys.tail();
  for (int i = 0; i < Q.rows(); ++i) CHECK(Q.row(i).sum() + tail(i) < 0.9);
}

TEST_CASE("one point problem") {
  KernelConfig cfg;
  cfg.horizontal = HorizontalBarrier{12, BarrierMode::Reflecting};
  cfg.vertical = VerticalBarrier{9, VerticalMode::Cyclic};
  KernelTable k(cfg);
  const int y0 = 3;
  CHECK(one_point_probability(k, y0, {0, y0}) == doctest::Approx(1.0));
  CHECK(one_point_probability(k, y0, {4, 0}) == 0.0);
  for (LatticePoint s : {LatticePoint(2, 5), LatticePoint(-3, 1), LatticePoint(7, 12)}) {
    double total = one_point_probability(k, y0, s);
    for (int x = -9; x <= 9; ++x) total += one_point_plane(k, y0, s, {x, 0});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one_point_plane(k, y0, s, {0, 0}) >= 0.0);
  }
}
