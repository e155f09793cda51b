#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bst/kernels.hpp"
#include "bst/membrane.hpp"
#include "bst/philox.hpp"

namespace bst {

// Walkable lattice: external points, absorbing targets and barriers,
// stored on a grid. Outside the grid (only without a vertical barrier)
// points above the plane are free and the plane absorbs.
class WalkLattice {
 public:
  WalkLattice(const Membrane& membrane, std::optional<HorizontalBarrier> horizontal,
              std::optional<VerticalBarrier> vertical);
  // Plane y = 0 plus one absorbing point at (0, y0); d = 2. Plane targets
  // are indexed by their x coordinate.
  static WalkLattice one_point(int y0, std::optional<HorizontalBarrier> horizontal,
                               std::optional<VerticalBarrier> vertical);

  enum class Kind { Target, Barrier, Point };
  struct Outcome {
    Kind kind = Kind::Target;
    SiteIndex index = 0;
    std::uint64_t steps = 0;
  };

  Outcome walk(LatticePoint p, PhiloxStream& rng, std::uint64_t max_steps) const;
  bool free(const LatticePoint& p) const;
  int dim() const { return dim_; }
  bool finite() const { return vertical_.has_value() && horizontal_.has_value(); }

  // One step of the chain from a free point: the next free point, or an
  // absorbing outcome. `stay` is set when a reflecting barrier keeps the walker.
  struct Move {
    enum Type { To, Target, Barrier, Point } type = To;
    LatticePoint to;
    SiteIndex index = 0;
  };
  Move move(const LatticePoint& p, int dir) const;

  // Every free point of a finite lattice.
  std::vector<LatticePoint> states() const;

 private:
  WalkLattice(int dim) : dim_(dim) {}
  void allocate();
  bool in_grid(const LatticePoint& p) const;
  std::size_t cell(const LatticePoint& p) const;

  static constexpr std::int32_t kFree = -1, kSolid = -2, kPoint = -3, kRelinkBase = -10;

  int dim_;
  std::optional<HorizontalBarrier> horizontal_;
  std::optional<VerticalBarrier> vertical_;
  std::array<int, kMaxDim - 1> lo_{}, hi_{};
  int ybot_ = 0, ytop_ = 0;
  std::array<std::size_t, kMaxDim> extent_{};
  std::vector<std::int32_t> code_;
  std::vector<SiteIndex> targets_;
  std::vector<std::array<LatticePoint, 2 * kMaxDim>> relinks_;  // per relinked cell, target or self
  std::function<SiteIndex(const LatticePoint&)> plane_index_;
};

struct WalkConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;  // trial i uses stream stream_offset + i
  unsigned threads = 0;             // 0: hardware concurrency
  std::uint64_t max_steps = 100000000;
};

struct WalkReport {
  std::uint64_t trials = 0;
  std::map<SiteIndex, std::uint64_t> hits;
  std::uint64_t barrier = 0;
  std::uint64_t point = 0;
  std::uint64_t total_steps = 0;
  std::uint64_t longest = 0;
  double probability(SiteIndex n) const;
};

WalkReport run_walks(const WalkLattice& lattice, const LatticePoint& start, const WalkConfig& config);

// Monte Carlo estimate of Q over a site set: row k starts at the near point
// of site k and uses trial streams k * trials + i.
Eigen::MatrixXd monte_carlo_operator(const WalkLattice& lattice, const Membrane& membrane,
                                     const std::vector<SiteIndex>& sites, const WalkConfig& config,
                                     std::uint64_t* total_steps = nullptr);

struct AlphaResult {
  double alpha = 0;
  int row = -1, col = -1;
  std::size_t excluded = 0;  // pairs with Q = 0
};

// alpha = max |Q - Qmc| / sqrt(Q) * sqrt(trials) over pairs with Q > 0.
AlphaResult alpha_statistic(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& estimate, std::uint64_t trials);

// Direct sparse solve of the harmonic problem on a finite lattice. Columns:
// one per target, plus one for every other absorbing outcome.
struct BoxSolution {
  std::vector<SiteIndex> targets;
  std::vector<LatticePoint> states;
  Eigen::MatrixXd values;
  std::unordered_map<LatticePoint, int, LatticePointHash> row;
  double at(const LatticePoint& p, int column) const;
};

BoxSolution dense_box_solve(const WalkLattice& lattice, const std::vector<SiteIndex>& targets, double lambda = 1.0);

// P(t, j): probability of first absorption at target j exactly at step t,
// t = 0..steps (row 0 is zero for a free start). Last column: other outcomes.
Eigen::MatrixXd time_stepped_distribution(const WalkLattice& lattice, const LatticePoint& start,
                                          const std::vector<SiteIndex>& targets, int steps);

}  // namespace bst
