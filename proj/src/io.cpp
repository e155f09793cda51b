#include "bst/io.hpp"

#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

namespace bst {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string RunManifest::json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["membrane_hash"] = membrane_hash;
  j["kernel_config"] = kernel_config;
  j["tolerance"] = tolerance;
  j["clamp_tolerance"] = clamp_tolerance;
  j["seed"] = seed;
  j["version"] = version;
  j["wall_time"] = wall_time;
  for (const auto& [k, v] : extra) j["extra"][k] = v;
  return j.dump(2);
}

RunManifest make_manifest(const std::string& command, const Membrane* m, const KernelConfig& cfg) {
  RunManifest r;
  r.command = command;
  if (m) r.membrane_hash = fnv1a_hex(serialize(m->spec()));
  r.kernel_config = cfg.describe();
  r.tolerance = cfg.tolerance();
  r.clamp_tolerance = SolverOptions{}.clamp_tolerance;
  return r;
}

namespace {

std::string coords(const LatticePoint& p) {
  std::string s;
  for (int i = 0; i < p.dim; ++i) s += (i ? " " : "") + std::to_string(p[i]);
  return s;
}

void num(std::ostream& os, double v) { os << std::setprecision(17) << v; }

}  // namespace

void write_operator_csv(std::ostream& os, const Membrane& m, const SelfTransportOperator& q) {
  os << "k\\n";
  for (SiteIndex n : q.sites) os << "," << n << " (" << coords(m.site(n).position) << ")";
  os << ",tail\n";
  for (std::size_t i = 0; i < q.sites.size(); ++i) {
    os << q.sites[i] << " (" << coords(m.site(q.sites[i]).position) << ")";
    for (std::size_t j = 0; j < q.sites.size(); ++j) {
      os << ",";
      num(os, q.Q(i, j));
    }
    os << ",";
    num(os, q.tail(i));
    os << "\n";
  }
}

void write_distribution_csv(std::ostream& os, const Membrane& m, const HittingDistribution& h) {
  os << (m.dim() == 2 ? "n,x,y,P\n" : "n,x0,x1,y,P\n");
  for (std::size_t j = 0; j < h.sites.size(); ++j) {
    const auto& p = m.site(h.sites[j]).position;
    os << h.sites[j];
    for (int i = 0; i < p.dim; ++i) os << "," << p[i];
    os << ",";
    num(os, h.values[j]);
    os << "\n";
  }
}

void write_kernel_csv(std::ostream& os, const KernelTable& k, int xmax, int ymin, int ymax, int yp, int x1) {
  const int d = k.config().dim;
  os << "y";
  for (int x = -xmax; x <= xmax; ++x) os << "," << x;
  os << "\n";
  for (int y = ymin; y <= ymax; ++y) {
    os << y;
    for (int x = -xmax; x <= xmax; ++x) {
      int off[2] = {x, x1};
      std::span<const int> s(off, d - 1);
      os << ",";
      num(os, yp < 0 ? k.H(s, y) : k.D(s, y, yp));
    }
    os << "\n";
  }
}

void write_walk_report_csv(std::ostream& os, const Membrane& m, const WalkReport& r) {
  os << "outcome,n,position,count,probability\n";
  for (auto [n, c] : r.hits) {
    os << "target," << n << ",";
    if (m.in_window(n)) os << coords(m.site(n).position);
    os << "," << c << ",";
    num(os, double(c) / double(r.trials));
    os << "\n";
  }
  os << "barrier,,," << r.barrier << ",";
  num(os, double(r.barrier) / double(r.trials));
  os << "\n# trials=" << r.trials << " total_steps=" << r.total_steps << " longest=" << r.longest << "\n";
}

void write_alpha_table(std::ostream& os, const std::vector<std::string>& rows, const std::vector<std::uint64_t>& trials,
                       const std::vector<std::vector<double>>& alpha) {
  os << std::left << std::setw(14) << "membrane";
  for (auto t : trials) os << std::right << std::setw(12) << ("Nt=" + std::to_string(t));
  os << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << std::left << std::setw(14) << rows[i];
    for (double a : alpha[i]) os << std::right << std::setw(12) << std::fixed << std::setprecision(3) << a;
    os << "\n";
  }
  os.unsetf(std::ios::fixed);
}

}  // namespace bst
