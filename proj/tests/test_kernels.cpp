#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "bst/errors.hpp"
#include "bst/kernels.hpp"

using namespace bst;

namespace {

double H2(const KernelTable& k, int x, int y) {
  int xs[1] = {x};
  return k.H(xs, y);
}

double D2(const KernelTable& k, int x, int y, int yp) {
  int xs[1] = {x};
  return k.D(xs, y, yp);
}

// Harmonic measure of (0,0) in a cyclic strip of width 2L+1, solved directly.
std::vector<std::vector<double>> strip_poisson(int L, int top, BarrierMode mode) {
  const int P = 2 * L + 1;
  const int n = P * top;
  auto id = [&](int x, int y) { return (y - 1) * P + ((x % P) + P) % P; };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int y = 1; y <= top; ++y)
    for (int x = 0; x < P; ++x) {
      int r = id(x, y);
      A(r, r) += 4;
      A(r, id(x - 1, y)) -= 1;
      A(r, id(x + 1, y)) -= 1;
      if (y < top) A(r, id(x, y + 1)) -= 1;
      else if (mode == BarrierMode::Reflecting) A(r, r) -= 1;
      if (y > 1) A(r, id(x, y - 1)) -= 1;
      else if (x == 0) b(r) += 1;
    }
  Eigen::VectorXd u = A.partialPivLu().solve(b);
  std::vector<std::vector<double>> out(top + 1, std::vector<double>(P));
  for (int y = 1; y <= top; ++y)
    for (int x = 0; x < P; ++x) out[y][x] = u(id(x, y));
  return out;
}

}  // namespace

TEST_CASE("phi at the origin and its symmetric form") {
  CHECK(phi(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  double th[2] = {0.3, -0.7};
  double c = 3.0 - std::cos(0.3) - std::cos(0.7);
  CHECK(phi(th, 3, 1.0) == doctest::Approx(c - std::sqrt(c * c - 1)).epsilon(1e-14));
  double lam = 0.5;
  double cl = 2 / lam - 1;
  CHECK(phi(0.0, lam) == doctest::Approx(cl - std::sqrt(cl * cl - 1)).epsilon(1e-14));
  CHECK(phi(0.4, 1.0) == doctest::Approx(phi(-0.4, 1.0)));
}

TEST_CASE("classic two dimensional values") {
  KernelTable k({});
  CHECK(H2(k, 0, 1) == doctest::Approx(1 - 2 / std::numbers::pi).epsilon(1e-12));
  CHECK(H2(k, 1, 1) == doctest::Approx(2 / std::numbers::pi - 0.5).epsilon(1e-12));
  CHECK(H2(k, 0, 0) == 1.0);
  CHECK(H2(k, 3, 0) == 0.0);
  CHECK(H2(k, 5, -3) == doctest::Approx(H2(k, 5, 3)));
  CHECK(H2(k, -5, 3) == doctest::Approx(H2(k, 5, 3)));
  CHECK(D2(k, 0, 1, 1) == doctest::Approx(H2(k, 0, 1)));
  CHECK(D2(k, 2, 1, -1) == 0.0);
}

TEST_CASE("row sums of the Poisson kernel") {
  KernelTable k({});
  const int X = 300;
  for (int y : {1, 4, 9}) {
    double s = 0;
    for (int x = -X; x <= X; ++x) s += H2(k, x, y);
    double tail = 2 / std::numbers::pi * (std::numbers::pi / 2 - std::atan((X + 0.5) / y));
    CHECK(std::abs(s + tail - 1) < 1e-6);
    CHECK(k.total(y) == doctest::Approx(1.0));
  }
}

TEST_CASE("Green function is the inverse Laplacian") {
  for (double lam : {1.0, 0.6}) {
    KernelConfig cfg;
    cfg.lambda = lam;
    KernelTable k(cfg);
    for (int yp : {1, 3}) {
      for (int y = 1; y <= 5; ++y)
        for (int x = -3; x <= 3; ++x) {
          double lap = 4 / lam * D2(k, x, y, yp) - D2(k, x - 1, y, yp) - D2(k, x + 1, y, yp) -
                       D2(k, x, y + 1, yp) - D2(k, x, y - 1, yp);
          double expect = (x == 0 && y == yp) ? 1.0 : 0.0;
          CHECK(lap == doctest::Approx(expect).epsilon(1e-11).scale(1));
        }
    }
  }
}

TEST_CASE("Poisson kernel is harmonic off the plane in three dimensions") {
  KernelConfig cfg;
  cfg.dim = 3;
  KernelTable k(cfg);
  auto h = [&](int a, int b, int y) {
    int xs[2] = {a, b};
    return k.H(xs, y);
  };
  for (int y = 1; y <= 3; ++y)
    for (int a = 0; a <= 2; ++a) {
      double lap = 6 * h(a, 1, y) - h(a - 1, 1, y) - h(a + 1, 1, y) - h(a, 0, y) - h(a, 2, y) -
                   h(a, 1, y + 1) - h(a, 1, y - 1);
      CHECK(std::abs(lap) < 1e-9);
    }
  CHECK(k.total(2) == doctest::Approx(1.0));
}

TEST_CASE("lambda below one shrinks the total") {
  KernelConfig cfg;
  cfg.lambda = 0.5;
  KernelTable k(cfg);
  double s = 0;
  for (int x = -200; x <= 200; ++x) s += H2(k, x, 2);
  CHECK(s == doctest::Approx(std::pow(phi(0.0, 0.5), 2)).epsilon(1e-12));
  CHECK(k.total(2) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("cyclic strip with barriers matches a direct lattice solve") {
  for (auto mode : {BarrierMode::Absorbing, BarrierMode::Reflecting}) {
    const int L = 3, top = 5;
    KernelConfig cfg;
    cfg.horizontal = HorizontalBarrier{top, mode};
    cfg.vertical = VerticalBarrier{L, VerticalMode::Cyclic};
    KernelTable k(cfg);
    auto ref = strip_poisson(L, top, mode);
    for (int y = 1; y <= top; ++y)
      for (int x = 0; x < 2 * L + 1; ++x) CHECK(H2(k, x, y) == doctest::Approx(ref[y][x]).epsilon(1e-12));
    CHECK(H2(k, 1, top + 1) == 0.0);
    CHECK(H2(k, 1, 2) == doctest::Approx(H2(k, 1 + 7, 2)));
    CHECK(H2(k, 1, -2) > 0.0);
    if (mode == BarrierMode::Reflecting) CHECK(k.total(3) == doctest::Approx(1.0).epsilon(1e-13));
    else CHECK(k.total(3) < 1.0);
  }
}

TEST_CASE("Cauchy limit far from the source") {
  KernelTable k({});
  int xs[1] = {60};
  double a = cauchy_asymptotic(xs, 25, 2);
  CHECK(std::abs(H2(k, 60, 25) / a - 1) < 0.01);
}

TEST_CASE("bad configurations are rejected") {
  KernelConfig cfg;
  cfg.dim = 1;
  CHECK_THROWS_AS(KernelTable{cfg}, DomainError);
  cfg.dim = 2;
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(KernelTable{cfg}, DomainError);
  cfg.lambda = 1.0;
  cfg.horizontal = HorizontalBarrier{0, BarrierMode::Absorbing};
  CHECK_THROWS_AS(KernelTable{cfg}, DomainError);
}

TEST_CASE("cache round trip") {
  KernelTable k({});
  double v = H2(k, 3, 2);
  std::string path = "kernel_cache_test.bin";
  k.save(path);
  KernelTable other({});
  CHECK(other.load(path));
  CHECK(other.cached_blocks() == k.cached_blocks());
  CHECK(H2(other, 3, 2) == v);
  KernelConfig cfg;
  cfg.lambda = 0.9;
  KernelTable mismatched(cfg);
  CHECK_FALSE(mismatched.load(path));
  std::remove(path.c_str());
}

TEST_CASE("gamma sums") {
  double p = phi(1.1, 1.0);
  CHECK(gamma_sum(0, 3, p) == 0.0);
  CHECK(gamma_sum(1, 1, p) == doctest::Approx(p));
  CHECK(gamma_sum(2, 1, p) == doctest::Approx(p * p));
  double lh = 4 - 2 * std::cos(1.1);
  for (int yp = 1; yp <= 6; ++yp)
    for (int y = 1; y <= 8; ++y)
      CHECK(gamma_sum(y + 1, yp, p) - lh * gamma_sum(y, yp, p) + gamma_sum(y - 1, yp, p) ==
            doctest::Approx(y == yp ? -1.0 : 0.0).scale(1));
}

TEST_CASE("Green function stays exact next to a horizontal barrier") {
  for (auto mode : {BarrierMode::Absorbing, BarrierMode::Reflecting}) {
    KernelConfig cfg;
    cfg.horizontal = HorizontalBarrier{6, mode};
    cfg.vertical = VerticalBarrier{4, VerticalMode::Cyclic};
    KernelTable k(cfg);
    for (int yp : {2, 5, 6})
      for (int y = 1; y <= 6; ++y)
        for (int x = -2; x <= 2; ++x) {
          double up = y < 6 ? D2(k, x, y + 1, yp) : (mode == BarrierMode::Reflecting ? D2(k, x, y, yp) : 0.0);
          double lap = 4 * D2(k, x, y, yp) - D2(k, x - 1, y, yp) - D2(k, x + 1, y, yp) - up - D2(k, x, y - 1, yp);
          CHECK(lap == doctest::Approx(x == 0 && y == yp ? 1.0 : 0.0).scale(1).epsilon(1e-12));
        }
  }
}
