#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>

#include "bst/errors.hpp"
#include "bst/io.hpp"

using namespace bst;

namespace {

struct Common {
  int dim = 2;
  double lambda = 1.0;
  int hbarrier = -1;
  std::string hmode = "abs";
  int vbarrier = -1;
  std::string vmode = "cyclic";
  double tol = 0;
  int window = -1;
  std::string out;
  std::string file;
};

void add_config(CLI::App* c, Common& o) {
  c->add_option("--lambda", o.lambda, "survival factor per step, 0 < lambda <= 1")->capture_default_str();
  c->add_option("--hbarrier", o.hbarrier, "horizontal barrier level (walk lattice stops at y = LEVEL)");
  c->add_option("--hmode", o.hmode, "horizontal barrier mode")->check(CLI::IsMember({"abs", "ref"}))->capture_default_str();
  c->add_option("--vbarrier", o.vbarrier, "vertical barriers at |x| = L");
  c->add_option("--vmode", o.vmode, "vertical barrier mode")
      ->check(CLI::IsMember({"cyclic", "abs", "ref"}))
      ->capture_default_str();
  c->add_option("--tol", o.tol, "quadrature tolerance (default 1e-12 for d=2, 1e-10 for d=3)");
  c->add_option("--out", o.out, "output CSV path; the manifest goes to PATH.manifest.json");
}

void add_membrane(CLI::App* c, Common& o) {
  c->add_option("membrane", o.file, "membrane file")->required()->check(CLI::ExistingFile);
  c->add_option("--window", o.window, "window margin around the membrane footprint");
}

KernelConfig kernel_config(const Common& o, int dim) {
  KernelConfig c;
  c.dim = dim;
  c.lambda = o.lambda;
  if (o.hbarrier >= 0) c.horizontal = HorizontalBarrier{o.hbarrier, o.hmode == "abs" ? BarrierMode::Absorbing : BarrierMode::Reflecting};
  if (o.vbarrier >= 0)
    c.vertical = VerticalBarrier{o.vbarrier, o.vmode == "cyclic" ? VerticalMode::Cyclic
                                             : o.vmode == "abs"  ? VerticalMode::Absorbing
                                                                 : VerticalMode::Reflecting};
  if (o.tol > 0) c.quadrature.tolerance = o.tol;
  c.validate();
  return c;
}

Membrane membrane_of(const Common& o) {
  auto spec = load_membrane(o.file);
  return build_membrane(spec, o.window >= 0 ? std::optional<int>(o.window) : std::nullopt);
}

// Writes the CSV body to --out (plus manifest) or stdout (manifest on stderr).
template <class F>
void emit(const Common& o, RunManifest man, std::chrono::steady_clock::time_point t0, F&& body) {
  if (o.out.empty()) {
    body(std::cout);
    man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << man.json() << "\n";
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw DomainError("cannot write " + o.out);
  body(f);
  man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(o.out + ".manifest.json") << man.json() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-transport operator of lattice membranes"};
  app.require_subcommand(1);
  Common o;
  auto t0 = std::chrono::steady_clock::now();

  auto* validate = app.add_subcommand("validate", "check a membrane file and print M G N N*");
  add_membrane(validate, o);

  int xmax = 8, ymin = 0, ymax = 8, yp = -1, x1 = 0;
  auto* kernels = app.add_subcommand("kernels", "dump H (or D with --yp) as CSV");
  add_config(kernels, o);
  kernels->add_option("--dim", o.dim, "lattice dimension")->check(CLI::Range(2, 3))->capture_default_str();
  kernels->add_option("--xmax", xmax, "offsets -xmax..xmax")->capture_default_str();
  kernels->add_option("--ymin", ymin)->capture_default_str();
  kernels->add_option("--ymax", ymax)->capture_default_str();
  kernels->add_option("--yp", yp, "source height; dumps D instead of H");
  kernels->add_option("--x1", x1, "fixed second offset for d = 3")->capture_default_str();

  std::string site_mode = "window";
  auto* solve = app.add_subcommand("solve", "compute Q on the site set and write it as CSV");
  add_membrane(solve, o);
  add_config(solve, o);
  solve->add_option("--sites", site_mode, "site set")->check(CLI::IsMember({"window", "nonplane"}))->capture_default_str();

  std::vector<std::uint64_t> trials{100000};
  std::uint64_t seed = 1;
  unsigned threads = 0;
  auto* verify = app.add_subcommand("verify", "compare Q with Monte Carlo walks and the box oracle");
  add_membrane(verify, o);
  add_config(verify, o);
  verify->add_option("--trials", trials, "walks per row; repeat for several table columns")->capture_default_str();
  verify->add_option("--seed", seed)->capture_default_str();
  verify->add_option("--threads", threads, "0: hardware concurrency")->capture_default_str();

  SiteIndex row = 1;
  auto* plot = app.add_subcommand("plotdata", "hitting distribution from the near point of one site");
  add_membrane(plot, o);
  add_config(plot, o);
  plot->add_option("--row", row, "site index k")->capture_default_str();

  app.footer(
      "examples:\n"
      "  bstq validate data/convex2d.mem\n"
      "  bstq kernels --dim 2 --xmax 5 --ymax 4 --out H.csv\n"
      "  bstq solve data/convex2d.mem --out Q.csv\n"
      "  bstq verify data/bump5.mem --hbarrier 20 --vbarrier 40 --trials 10000 --trials 100000\n"
      "  bstq plotdata data/convex2d.mem --row 20 --out row20.csv\n"
      "exit codes: 0 success, 1 validation failure, 2 numerical failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) {
      auto m = membrane_of(o);
      std::cout << "M=" << m.window_sites() << " G=" << m.G() << " N=" << m.N() << " N*=" << m.Nstar()
                << " nonplane=" << m.M() << " corners=" << m.corners().size() << "\n";
    } else if (*kernels) {
      KernelTable k(kernel_config(o, o.dim));
      auto man = make_manifest("kernels", nullptr, k.config());
      emit(o, man, t0, [&](std::ostream& os) { write_kernel_csv(os, k, xmax, ymin, ymax, yp, x1); });
    } else if (*solve) {
      auto m = membrane_of(o);
      KernelTable k(kernel_config(o, m.dim()));
      auto sites = site_mode == "window" ? SiteSet::window(m) : SiteSet::nonplane(m);
      auto q = self_transport_operator(m, k, sites);
      auto man = make_manifest("solve", &m, k.config());
      man.extra["sites"] = std::to_string(sites.size());
      man.extra["clamped"] = std::to_string(q.clamped);
      double worst = 0;
      for (int i = 0; i < q.Q.rows(); ++i) worst = std::max(worst, q.Q.row(i).sum());
      man.extra["max_row_sum"] = std::to_string(worst);
      emit(o, man, t0, [&](std::ostream& os) { write_operator_csv(os, m, q); });
      std::cerr << "max row sum " << worst << " over " << sites.size() << " sites\n";
    } else if (*verify) {
      auto m = membrane_of(o);
      KernelConfig cfg = kernel_config(o, m.dim());
      if (!cfg.horizontal) throw DomainError("verify needs --hbarrier so that walks terminate");
      KernelTable k(cfg);
      auto sites = SiteSet::window(m);
      auto sys = corner_corrected_system(m, k, sites);
      Eigen::MatrixXd Q = sys.Q();
      WalkLattice w(m, cfg.horizontal, cfg.vertical);
      auto man = make_manifest("verify", &m, cfg);
      man.seed = seed;
      if (w.finite()) {
        auto box = dense_box_solve(w, sites.indices, cfg.lambda);
        double gap = 0;
        for (std::size_t i = 0; i < sites.size(); ++i)
          for (std::size_t j = 0; j < sites.size(); ++j)
            gap = std::max(gap, std::abs(Q(i, j) - box.at(m.site(sites.indices[i]).near(), int(j))));
        std::cout << "dense oracle max abs diff " << gap << "\n";
        man.extra["dense_gap"] = std::to_string(gap);
      }
      std::vector<double> alphas;
      for (auto nt : trials) {
        WalkConfig wc;
        wc.trials = nt;
        wc.seed = seed;
        wc.threads = threads;
        std::uint64_t steps = 0;
        auto est = monte_carlo_operator(w, m, sites.indices, wc, &steps);
        auto a = alpha_statistic(Q, est, nt);
        alphas.push_back(a.alpha);
        man.extra["steps_" + std::to_string(nt)] = std::to_string(steps);
        man.extra["excluded_" + std::to_string(nt)] = std::to_string(a.excluded);
      }
      std::ostringstream table;
      write_alpha_table(table, {m.spec().name}, trials, {alphas});
      emit(o, man, t0, [&](std::ostream& os) { os << table.str(); });
    } else if (*plot) {
      auto m = membrane_of(o);
      KernelTable k(kernel_config(o, m.dim()));
      auto sites = SiteSet::window(m);
      auto h = hitting_distribution(m, k, sites, m.site(row).near());
      auto man = make_manifest("plotdata", &m, k.config());
      man.extra["row"] = std::to_string(row);
      emit(o, man, t0, [&](std::ostream& os) { write_distribution_csv(os, m, h); });
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
