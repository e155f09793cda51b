#include <doctest.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bst/io.hpp"

using namespace bst;

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("manifest is valid json") {
  auto m = build_membrane(load_membrane(std::string(BST_DATA_DIR) + "/bump5.mem"), 4);
  KernelConfig cfg;
  cfg.horizontal = HorizontalBarrier{10, BarrierMode::Reflecting};
  auto man = make_manifest("solve", &m, cfg);
  man.seed = 9;
  man.extra["sites"] = "12";
  auto j = nlohmann::json::parse(man.json());
  CHECK(j["command"] == "solve");
  CHECK(j["membrane_hash"].get<std::string>().size() == 16);
  CHECK(j["kernel_config"] == cfg.describe());
  CHECK(j["tolerance"] == 1e-12);
  CHECK(j["seed"] == 9);
  CHECK(j["extra"]["sites"] == "12");
}

TEST_CASE("csv layouts") {
  auto m = build_membrane(load_membrane(std::string(BST_DATA_DIR) + "/plane2d.mem"), 2);
  KernelTable k({});
  auto q = self_transport_operator(m, k, SiteSet::window(m));
  std::ostringstream os;
  write_operator_csv(os, m, q);
  const std::string text = os.str();
  std::string first = text.substr(0, text.find('\n'));
  CHECK(first.rfind("k\\n,", 0) == 0);
  CHECK(first.find(",tail") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == long(q.sites.size()) + 1);

  std::ostringstream ks;
  write_kernel_csv(ks, k, 2, 0, 2);
  std::istringstream in(ks.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "y,-2,-1,0,1,2");
  std::getline(in, line);
  CHECK(line == "0,0,0,1,0,0");

  auto h = hitting_distribution(m, k, SiteSet::window(m), {0, 3});
  std::ostringstream ds;
  write_distribution_csv(ds, m, h);
  CHECK(ds.str().rfind("n,x,y,P\n", 0) == 0);

  std::ostringstream ts;
  write_alpha_table(ts, {"a", "b"}, {10, 100}, {{1.5, 2.5}, {3.5, 4.5}});
  CHECK(ts.str().find("Nt=100") != std::string::npos);
  CHECK(ts.str().find("4.500") != std::string::npos);
}
