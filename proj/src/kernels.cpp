#include "bst/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bst/errors.hpp"
#include "bst/lattice.hpp"

namespace bst {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
Rule gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  return r;
}

// Composite rule on [0, pi]: panels shrinking geometrically toward 0
// (the symbol has a conical point there when lambda = 1) plus uniform
// panels of width pi/16 to resolve oscillations.
// Uniform panels grow with the radius so each holds a couple of cos(x theta) periods.
Rule graded_rule(int order, int radius) {
  Rule base = gauss_legendre(order);
  std::vector<double> breaks{0.0};
  const int panels = std::max(16, (radius + 3) / 4);
  const double h = kPi / panels;
  const int levels = order;
  for (int j = levels; j >= 1; --j) breaks.push_back(h * std::ldexp(1.0, -j));
  for (int j = 1; j <= panels; ++j) breaks.push_back(h * j);
  Rule r;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    double a = breaks[p], b = breaks[p + 1];
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * base.nodes[i]);
      r.weights.push_back(0.5 * (b - a) * base.weights[i] / kPi);
    }
  }
  return r;
}

Rule periodic_rule(int period) {
  Rule r;
  for (int h = 0; h < period; ++h) {
    r.nodes.push_back(2 * kPi * h / period);
    r.weights.push_back(1.0 / period);
  }
  return r;
}

// Geometric-sum ratio (1 - q^a) / (1 - q^b) with q = phi^2, stable at q = 1.
double sum_ratio(int a, int b, double phi_value) {
  if (a <= 0) return 0.0;
  double lq = 2 * std::log(phi_value);
  if (lq == 0.0) return static_cast<double>(a) / b;
  return std::expm1(a * lq) / std::expm1(b * lq);
}

int fold(int x, const std::optional<VerticalBarrier>& v) {
  if (!v) return std::abs(x);
  int P = v->period();
  int r = ((x % P) + P) % P;
  return std::min(r, P - r);
}

}  // namespace

void KernelConfig::validate() const {
  if (dim < 2 || dim > kMaxDim) throw DomainError("dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
  if (horizontal && horizontal->level < 1) throw DomainError("horizontal barrier level must be >= 1");
  if (vertical && vertical->half_width < 1) throw DomainError("vertical barrier half width must be >= 1");
  if (quadrature.initial_order < 2 || quadrature.max_order < quadrature.initial_order)
    throw DomainError("bad quadrature orders");
}

double KernelConfig::tolerance() const {
  if (quadrature.tolerance > 0) return quadrature.tolerance;
  return dim == 2 ? 1e-12 : 1e-10;
}

std::string KernelConfig::describe() const {
  std::ostringstream os;
  os << "d=" << dim << " lambda=" << lambda;
  if (horizontal)
    os << " hbarrier=" << horizontal->level << (horizontal->mode == BarrierMode::Absorbing ? ":abs" : ":ref");
  if (vertical) {
    const char* m = vertical->mode == VerticalMode::Cyclic ? "cyclic"
                    : vertical->mode == VerticalMode::Absorbing ? "abs" : "ref";
    os << " vbarrier=" << vertical->half_width << ":" << m;
  }
  return os.str();
}

double phi(std::span<const double> theta, int dim, double lambda) {
  double s = dim / lambda - dim;  // c - 1 without cancellation
  for (double t : theta) {
    double h = std::sin(0.5 * t);
    s += 2 * h * h;
  }
  double c = 1 + s;
  return 1.0 / (c + std::sqrt(s * (c + 1)));
}

double phi(double theta, double lambda) {
  double t[1] = {theta};
  return phi(t, 2, lambda);
}

double barrier_profile(int y, double p, const std::optional<HorizontalBarrier>& barrier) {
  if (y == 0) return 1.0;
  if (y < 0 || !barrier) return std::pow(p, std::abs(y));
  int n = barrier->level;
  if (y > n) return 0.0;
  if (barrier->mode == BarrierMode::Absorbing) return sum_ratio(n + 1 - y, n + 1, p) * std::pow(p, y);
  return (1 + std::pow(p, 2 * n + 1 - 2 * y)) / (1 + std::pow(p, 2 * n + 1)) * std::pow(p, y);
}

double gamma_sum(int y, int yp, double p) {
  if (y <= 0 || yp <= 0) return 0.0;
  const int m = std::min(y, yp);
  double term = std::pow(p, 1 + std::abs(y - yp)), sum = 0;
  for (int j = 1; j <= m; ++j, term *= p * p) sum += term;
  return sum;
}

double cauchy_asymptotic(std::span<const int> x, int y, int dim) {
  double r2 = double(y) * y;
  for (int v : x) r2 += double(v) * v;
  if (r2 == 0) throw DomainError("cauchy_asymptotic at the origin");
  return std::tgamma(0.5 * dim) / std::pow(kPi, 0.5 * dim) * std::abs(y) / std::pow(r2, 0.5 * dim);
}

KernelTable::KernelTable(KernelConfig config) : config_(config) { config_.validate(); }

double KernelTable::symbol(std::span<const double> theta, int y) const {
  return barrier_profile(y, phi(theta, config_.dim, config_.lambda), config_.horizontal);
}

double KernelTable::Block::at(std::span<const int> ax) const {
  std::size_t idx = 0;
  for (int i = 0; i < axes; ++i) idx = idx * rows + ax[i];
  return values[idx];
}

KernelTable::Block KernelTable::compute_with_order(int y, int radius, int order) const {
  const int axes = config_.dim - 1;
  Rule rule = config_.vertical ? periodic_rule(config_.vertical->period()) : graded_rule(order, radius);
  const std::size_t n = rule.nodes.size();
  const int rows = radius + 1;
  std::vector<double> C(rows * n);
  for (int x = 0; x < rows; ++x)
    for (std::size_t i = 0; i < n; ++i) C[x * n + i] = rule.weights[i] * std::cos(x * rule.nodes[i]);

  Block b;
  b.radius = radius;
  b.rows = rows;
  b.axes = axes;
  if (axes == 1) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      double t[1] = {rule.nodes[i]};
      f[i] = symbol(t, y);
    }
    b.values.assign(rows, 0.0);
    for (int x = 0; x < rows; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += C[x * n + i] * f[i];
      b.values[x] = s;
    }
    return b;
  }
  // axes == 2: H = C F C^T
  std::vector<double> F(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double t[2] = {rule.nodes[i], rule.nodes[j]};
      F[i * n + j] = F[j * n + i] = symbol(t, y);
    }
  std::vector<double> T(rows * n, 0.0);  // T = C F
  for (int x = 0; x < rows; ++x)
    for (std::size_t i = 0; i < n; ++i) {
      double c = C[x * n + i];
      if (c == 0.0) continue;
      const double* Fi = &F[i * n];
      double* Tx = &T[x * n];
      for (std::size_t j = 0; j < n; ++j) Tx[j] += c * Fi[j];
    }
  b.values.assign(rows * rows, 0.0);
  for (int x1 = 0; x1 < rows; ++x1)
    for (int x2 = x1; x2 < rows; ++x2) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += T[x1 * n + j] * C[x2 * n + j];
      b.values[x1 * rows + x2] = b.values[x2 * rows + x1] = s;
    }
  return b;
}

KernelTable::Block KernelTable::compute_periodic(int y) const {
  return compute_with_order(y, config_.vertical->half_width, 0);
}

KernelTable::Block KernelTable::compute_quadrature(int y, int radius) const {
  const double tol = config_.tolerance();
  int order = config_.quadrature.initial_order;
  Block coarse = compute_with_order(y, radius, order);
  while (order < config_.quadrature.max_order) {
    order *= 2;
    Block fine = compute_with_order(y, radius, order);
    double diff = 0;
    for (std::size_t i = 0; i < fine.values.size(); ++i)
      diff = std::max(diff, std::abs(fine.values[i] - coarse.values[i]));
    if (diff <= tol) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureError("Poisson kernel at height " + std::to_string(y) + " radius " + std::to_string(radius) +
                        " did not converge to " + std::to_string(tol));
}

std::shared_ptr<const KernelTable::Block> KernelTable::block(int y, int radius) const {
  {
    std::lock_guard lock(mutex_);
    auto it = blocks_.find(y);
    if (it != blocks_.end() && it->second->radius >= radius) return it->second;
    if (it != blocks_.end()) radius = std::max(radius, 2 * it->second->radius);
  }
  auto fresh = std::make_shared<const Block>(config_.vertical ? compute_periodic(y) : compute_quadrature(y, radius));
  std::lock_guard lock(mutex_);
  auto& slot = blocks_[y];
  if (!slot || slot->radius < fresh->radius) slot = fresh;
  return slot;
}

void KernelTable::reserve(int y, int radius) const {
  if (y == 0) return;
  if (config_.horizontal && y > config_.horizontal->level) return;
  int key = config_.horizontal ? y : std::abs(y);
  block(key, config_.vertical ? config_.vertical->half_width : radius);
}

double KernelTable::H(std::span<const int> x, int y) const {
  const int axes = config_.dim - 1;
  int ax[kMaxDim];
  int radius = 0;
  for (int i = 0; i < axes; ++i) {
    ax[i] = fold(x[i], config_.vertical);
    radius = std::max(radius, ax[i]);
  }
  if (y == 0) return radius == 0 ? 1.0 : 0.0;
  if (config_.horizontal && y > config_.horizontal->level) return 0.0;
  int key = config_.horizontal ? y : std::abs(y);
  auto b = block(key, radius);
  return b->at(std::span<const int>(ax, axes));
}

double KernelTable::D(std::span<const int> x, int y, int yp) const {
  if (y == 0 || yp == 0 || (y > 0) != (yp > 0)) return 0.0;
  int a = std::abs(y), b = std::abs(yp);
  int s = y > 0 ? 1 : -1;
  int m = std::min(a, b), off = std::abs(a - b);
  double sum = 0;
  const auto& h = config_.horizontal;
  for (int j = 1; j <= m; ++j) {
    int t = 2 * j - 1 + off;
    // above the barrier the profile continues by its image
    if (s > 0 && h && t > h->level) {
      if (h->mode == BarrierMode::Absorbing) {
        if (t > h->level + 1) sum -= H(x, 2 * h->level + 2 - t);
      } else {
        sum += H(x, 2 * h->level + 1 - t);
      }
      continue;
    }
    sum += H(x, s * t);
  }
  return sum;
}

double KernelTable::total(int y) const {
  double zero[kMaxDim] = {0, 0, 0};
  if (y == 0) return 1.0;
  return symbol(std::span<const double>(zero, config_.dim - 1), y);
}

std::size_t KernelTable::cached_blocks() const {
  std::lock_guard lock(mutex_);
  return blocks_.size();
}

// Cache file layout (little endian):
//   char[4] "BSTK", u32 version = 1,
//   i32 dim, f64 lambda, i32 hlevel (-1 none), i32 hmode, i32 vhalf (-1 none), i32 vmode, f64 tol,
//   u64 block count, then per block: i32 y, i32 radius, i32 axes, u64 n, f64[n].
namespace {

struct Header {
  std::int32_t dim;
  double lambda;
  std::int32_t hlevel, hmode, vhalf, vmode;
  double tol;
  bool operator==(const Header&) const = default;
};

Header header_of(const KernelConfig& c) {
  return Header{c.dim,
                c.lambda,
                c.horizontal ? c.horizontal->level : -1,
                c.horizontal ? static_cast<std::int32_t>(c.horizontal->mode) : 0,
                c.vertical ? c.vertical->half_width : -1,
                c.vertical ? static_cast<std::int32_t>(c.vertical->mode) : 0,
                c.tolerance()};
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

void KernelTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  Header h = header_of(config_);
  os.write("BSTK", 4);
  put<std::uint32_t>(os, 1);
  put(os, h.dim), put(os, h.lambda), put(os, h.hlevel), put(os, h.hmode), put(os, h.vhalf), put(os, h.vmode),
      put(os, h.tol);
  std::lock_guard lock(mutex_);
  put<std::uint64_t>(os, blocks_.size());
  for (auto& [y, b] : blocks_) {
    put<std::int32_t>(os, y);
    put<std::int32_t>(os, b->radius);
    put<std::int32_t>(os, b->axes);
    put<std::uint64_t>(os, b->values.size());
    os.write(reinterpret_cast<const char*>(b->values.data()), b->values.size() * sizeof(double));
  }
}

bool KernelTable::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  std::uint32_t version = 0;
  Header h{};
  if (!is.read(magic, 4) || std::memcmp(magic, "BSTK", 4) != 0) return false;
  if (!get(is, version) || version != 1) return false;
  if (!(get(is, h.dim) && get(is, h.lambda) && get(is, h.hlevel) && get(is, h.hmode) && get(is, h.vhalf) &&
        get(is, h.vmode) && get(is, h.tol)))
    return false;
  if (!(h == header_of(config_))) return false;
  std::uint64_t count = 0;
  if (!get(is, count)) return false;
  std::map<int, std::shared_ptr<const Block>> loaded;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::int32_t y, radius, axes;
    std::uint64_t n;
    if (!(get(is, y) && get(is, radius) && get(is, axes) && get(is, n))) return false;
    auto b = std::make_shared<Block>();
    b->radius = radius;
    b->rows = radius + 1;
    b->axes = axes;
    b->values.resize(n);
    if (!is.read(reinterpret_cast<char*>(b->values.data()), n * sizeof(double))) return false;
    loaded[y] = b;
  }
  std::lock_guard lock(mutex_);
  blocks_ = std::move(loaded);
  return true;
}

}  // namespace bst
