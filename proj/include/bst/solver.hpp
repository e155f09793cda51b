#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "bst/kernels.hpp"
#include "bst/membrane.hpp"

namespace bst {

// Set of boundary indices on which the operator is computed. Must contain
// every non-plane point 1..M and lie inside the window.
struct SiteSet {
  std::vector<SiteIndex> indices;  // ascending, unique

  static SiteSet window(const Membrane& m);
  static SiteSet nonplane(const Membrane& m);
  void validate(const Membrane& m) const;
  int position(SiteIndex m) const;  // -1 if absent
  std::size_t size() const { return indices.size(); }
};

// Linear system in block form. Unknowns: values u at off-plane points of
// `near_points` and at the ground points. Columns: one per site, plus a
// last column collecting every boundary point outside the site set.
//   (I + DNN) uN - DNG uG = Qstar
//   DGN uN + DGG uG = rhsG
struct OperatorBlocks {
  std::vector<LatticePoint> near_points;
  std::vector<LatticePoint> ground;
  SiteSet sites;
  Eigen::MatrixXd DNN, DNG, DGN, DGG, Qstar, rhsG;

  // Reduced form: D = DNN + DNG DGG^-1 DGN, Q* = Qstar + DNG DGG^-1 rhsG.
  Eigen::MatrixXd reduced_D() const;
  Eigen::MatrixXd reduced_Qstar() const;
};

struct SolverOptions {
  bool corner_terms = true;       // relinks and removed points as sources
  double clamp_tolerance = 1e-10; // negative values above -tol are set to 0
};

struct HittingDistribution {
  LatticePoint start;
  std::vector<SiteIndex> sites;
  std::vector<double> values;
  double tail = 0;      // mass on boundary points outside the site set
  double residual = 0;  // 1 - sum(values): tail plus barrier absorption
};

class TransportSystem {
 public:
  TransportSystem(const Membrane& membrane, const KernelTable& kernels, SiteSet sites, SolverOptions options = {});
  ~TransportSystem();
  TransportSystem(TransportSystem&&) noexcept;

  const SiteSet& sites() const;
  const OperatorBlocks& blocks() const;
  const Eigen::MatrixXd& near_solution() const;    // rows of blocks().near_points
  const Eigen::MatrixXd& ground_solution() const;  // rows of blocks().ground

  // Q(k, n) for k, n in the site set; tail(k) is the mass outside it.
  Eigen::MatrixXd Q() const;
  Eigen::VectorXd tail() const;
  // Q recomposed from the boundary representation at each near point.
  Eigen::MatrixXd Q_composed() const;

  HittingDistribution hitting_distribution(const LatticePoint& start) const;
  int clamped() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

OperatorBlocks assemble(const Membrane& membrane, const KernelTable& kernels, const SiteSet& sites);
Eigen::MatrixXd solve_near_boundary(const OperatorBlocks& blocks);
Eigen::MatrixXd solve_ground(const OperatorBlocks& blocks, const Eigen::MatrixXd& near);

TransportSystem corner_corrected_system(const Membrane& membrane, const KernelTable& kernels, const SiteSet& sites);

struct SelfTransportOperator {
  std::vector<SiteIndex> sites;
  Eigen::MatrixXd Q;
  Eigen::VectorXd tail;
  std::string config;
  int clamped = 0;
};

SelfTransportOperator self_transport_operator(const Membrane& membrane, const KernelTable& kernels,
                                              const SiteSet& sites);

HittingDistribution hitting_distribution(const Membrane& membrane, const KernelTable& kernels,
                                         const SiteSet& sites, const LatticePoint& start);

// Absorbing point at (0, y0) above the absorbing plane.
double one_point_probability(const KernelTable& kernels, int y0, const LatticePoint& start);
double one_point_plane(const KernelTable& kernels, int y0, const LatticePoint& start, const LatticePoint& target);

}  // namespace bst
