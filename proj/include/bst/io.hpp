#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bst/kernels.hpp"
#include "bst/membrane.hpp"
#include "bst/oracle.hpp"
#include "bst/solver.hpp"

namespace bst {

inline constexpr const char* kToolVersion = "0.1.0";

std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  std::string membrane_hash;  // FNV-1a of the canonical membrane text
  std::string kernel_config;
  double tolerance = 0;
  double clamp_tolerance = 0;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  double wall_time = 0;  // seconds
  std::map<std::string, std::string> extra;

  std::string json() const;
};

RunManifest make_manifest(const std::string& command, const Membrane* membrane, const KernelConfig& config);

// Q with boundary index and coordinate headers; the last column is the tail.
void write_operator_csv(std::ostream& os, const Membrane& m, const SelfTransportOperator& q);
// Rows (n, x.., y, P).
void write_distribution_csv(std::ostream& os, const Membrane& m, const HittingDistribution& h);
// Header row of x offsets, one row per y. For d = 3 the second offset is fixed.
// yp < 0 dumps H, otherwise D(x, y, yp).
void write_kernel_csv(std::ostream& os, const KernelTable& k, int xmax, int ymin, int ymax, int yp = -1,
                      int x1 = 0);
void write_walk_report_csv(std::ostream& os, const Membrane& m, const WalkReport& r);
// rows = membranes, columns = trial counts
void write_alpha_table(std::ostream& os, const std::vector<std::string>& rows, const std::vector<std::uint64_t>& trials,
                       const std::vector<std::vector<double>>& alpha);

}  // namespace bst
