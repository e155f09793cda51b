#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bst {

enum class BarrierMode { Absorbing, Reflecting };
enum class VerticalMode { Cyclic, Absorbing, Reflecting };

// Horizontal barrier: levels 1..level are walkable, level + 1 is the barrier.
struct HorizontalBarrier {
  int level = 0;
  BarrierMode mode = BarrierMode::Absorbing;
};

// Vertical barrier: horizontal coordinates live in [-half_width, half_width].
// Cyclic identifies the two faces; Absorbing/Reflecting act on the faces.
struct VerticalBarrier {
  int half_width = 0;
  VerticalMode mode = VerticalMode::Cyclic;
  int period() const { return 2 * half_width + 1; }
};

struct QuadratureOptions {
  int initial_order = 8;    // Gauss nodes per panel
  int max_order = 128;
  double tolerance = 0.0;   // 0 selects 1e-12 (d = 2) or 1e-10 (d > 2)
};

struct KernelConfig {
  int dim = 2;
  double lambda = 1.0;
  std::optional<HorizontalBarrier> horizontal;
  std::optional<VerticalBarrier> vertical;
  QuadratureOptions quadrature;

  void validate() const;
  double tolerance() const;
  std::string describe() const;
};

// phi(theta; lambda) = c - sqrt(c^2 - 1), c = d/lambda - sum_i cos(theta_i).
double phi(std::span<const double> theta, int dim, double lambda);
double phi(double theta, double lambda);  // d = 2

// Fourier symbol of the Poisson kernel at height y, given phi.
// Without a barrier this is phi^|y|.
double barrier_profile(int y, double phi_value, const std::optional<HorizontalBarrier>& barrier);

// sum_{j=1}^{min(y,y')} phi^(2j-1+|y-y'|); 0 if y <= 0 or y' <= 0.
double gamma_sum(int y, int yp, double phi_value);

// Large-distance limit Gamma(d/2) / pi^(d/2) * |y| / (|x|^2 + y^2)^(d/2).
double cauchy_asymptotic(std::span<const int> x, int y, int dim);

// Poisson kernel H^y_x (first hitting of the plane y = 0) and the
// Green function D^{y,y'}_x of the half space, with caching.
class KernelTable {
 public:
  explicit KernelTable(KernelConfig config);
  KernelTable(const KernelTable&) = delete;
  KernelTable& operator=(const KernelTable&) = delete;

  const KernelConfig& config() const { return config_; }
  int dim() const { return config_.dim; }

  // y > 0: upper half (barriers apply); y < 0: lower half, plain kernel.
  double H(std::span<const int> x, int y) const;
  double D(std::span<const int> x, int y, int yp) const;
  // Sum over the whole plane of H^y_x.
  double total(int y) const;
  // Make sure the table for height y covers |x_i| <= radius.
  void reserve(int y, int radius) const;

  struct Block {
    int radius = 0;
    int rows = 0;      // radius + 1 per axis
    int axes = 1;      // d - 1
    std::vector<double> values;
    double at(std::span<const int> ax) const;
  };

  // Cache persistence. Returns false when the file belongs to another config.
  void save(const std::string& path) const;
  bool load(const std::string& path);
  std::size_t cached_blocks() const;

 private:
  std::shared_ptr<const Block> block(int y, int radius) const;
  Block compute_quadrature(int y, int radius) const;
  Block compute_periodic(int y) const;
  Block compute_with_order(int y, int radius, int order) const;
  double symbol(std::span<const double> theta, int y) const;

  KernelConfig config_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::shared_ptr<const Block>> blocks_;
};

}  // namespace bst
