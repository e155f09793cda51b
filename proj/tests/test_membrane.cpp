#include <doctest.h>

#include <set>

#include "bst/errors.hpp"
#include "bst/membrane.hpp"

using namespace bst;

namespace {

Membrane fixture(const std::string& name, std::optional<int> margin = {}) {
  return build_membrane(load_membrane(std::string(BST_DATA_DIR) + "/" + name + ".mem"), margin);
}

ViolationKind violation_of(const std::string& text) {
  try {
    build_membrane(parse_membrane(text));
  } catch (const ValidationError& e) {
    return e.kind();
  }
  FAIL("no violation raised");
  return ViolationKind::Bijection;
}

}  // namespace

TEST_CASE("parse and serialize round trip") {
  auto spec = load_membrane(std::string(BST_DATA_DIR) + "/convex2d.mem");
  CHECK(spec.dim == 2);
  CHECK(spec.polyline.size() == 4);
  std::string once = serialize(spec);
  CHECK(serialize(parse_membrane(once)) == once);
  auto cube = load_membrane(std::string(BST_DATA_DIR) + "/cube3d.mem");
  CHECK(cube.facets.size() == 5);
  std::string c1 = serialize(cube);
  CHECK(serialize(parse_membrane(c1)) == c1);
}

TEST_CASE("malformed text") {
  CHECK_THROWS_AS(parse_membrane("dim 2\npolyline\n1 2 3\nend\n"), ParseError);
  CHECK_THROWS_AS(parse_membrane("dim x\n"), ParseError);
  CHECK_THROWS_AS(parse_membrane("dim 2\npolyline\n0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_membrane("dim 3\nfacet 1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_membrane("bogus\n"), ParseError);
  try {
    parse_membrane("dim 2\npolyline\n0 0\nzz 1\nend\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("convex rectangle counts") {
  auto m = fixture("convex2d");
  CHECK(m.M() == 91);
  CHECK(m.N() == 31);
  CHECK(m.Nstar() == 0);
  CHECK(m.G() == 0);
  CHECK(m.window_sites() == 155);
  CHECK(m.corners().size() == 2);
  CHECK(m.kind({-16, 31}) == PointKind::Removed);
  CHECK(m.kind({16, 0}) == PointKind::Internal);
  CHECK(m.kind({0, 10}) == PointKind::Internal);
  CHECK(m.kind({-17, 10}) == PointKind::External);
  CHECK(m.kind({-16, 10}) == PointKind::Boundary);
  CHECK(m.kind({400, 0}) == PointKind::Boundary);
  CHECK(m.kind({400, -3}) == PointKind::Internal);
  // traversal order: left wall upward first
  CHECK(m.site(1).position == LatticePoint(-16, 1));
  CHECK(m.site(30).position == LatticePoint(-16, 30));
  CHECK(m.site(31).position == LatticePoint(-15, 31));
  CHECK(m.site(1).near() == LatticePoint(-17, 1));
  CHECK(m.site(31).near() == LatticePoint(-15, 32));
  // relink around the removed corner
  CHECK(m.neighbor({-17, 31}, 1) == LatticePoint(-16, 32));
  CHECK(m.neighbor({-16, 32}, 2) == LatticePoint(-17, 31));
  CHECK(m.neighbor({-17, 30}, 1) == LatticePoint(-16, 30));
}

TEST_CASE("index function is a bijection on the plane tails") {
  auto m = fixture("convex2d");
  std::set<SiteIndex> seen;
  for (int x = -300; x <= 300; ++x) {
    auto idx = m.index_of({x, 0});
    if (x >= -16 && x <= 16) {
      CHECK_FALSE(idx.has_value());
      continue;
    }
    REQUIRE(idx.has_value());
    CHECK(seen.insert(*idx).second);
  }
  for (auto& b : m.boundary()) CHECK(m.index_of(b.position) == b.index);
  CHECK(m.index_of({-49, 0}) == 0);
  CHECK(m.index_of({-50, 0}) == -1);
  CHECK(m.index_of({49, 0}) == 156);
  CHECK_FALSE(m.index_of({0, 5}).has_value());
}

TEST_CASE("concave rectangle counts") {
  auto m = fixture("concave2d");
  CHECK(m.M() == 91);
  CHECK(m.Nstar() == 31);
  CHECK(m.N() == 0);
  CHECK(m.G() == 31);
  CHECK(m.window_sites() == 155);
  CHECK(m.corners().size() == 2);
  CHECK(m.kind({-16, 0}) == PointKind::Removed);
  CHECK(m.kind({16, -31}) == PointKind::Internal);
  CHECK(m.kind({0, -10}) == PointKind::External);
  CHECK(m.kind({0, 0}) == PointKind::External);
  auto c = m.classify({-15, 0});
  CHECK(c.ground.has_value());
  CHECK(m.neighbor({-16, 1}, 2) == LatticePoint(-15, 0));
  CHECK(m.neighbor({-15, 0}, 0) == LatticePoint(-16, 1));
}

TEST_CASE("unit pit and smallest bump") {
  auto pit = fixture("pit1");
  CHECK(pit.M() == 1);
  CHECK(pit.G() == 1);
  CHECK(pit.corners().size() == 2);
  auto bump = fixture("bump1");
  CHECK(bump.M() == 0);
  CHECK(bump.corners().size() == 2);
  auto& rec = bump.corners().front();
  CHECK(rec.removed == LatticePoint(0, 1));
  CHECK(rec.normal_dirs.size() == 2);
}

TEST_CASE("planar membrane") {
  auto m = fixture("plane2d");
  CHECK(m.M() == 0);
  CHECK(m.corners().empty());
  CHECK(m.window_sites() == 2 * m.window_margin() + 1);
}

TEST_CASE("cube and pit in three dimensions") {
  auto cube = fixture("cube3d");
  CHECK(cube.M() == 125);
  CHECK(cube.N() == 6);
  CHECK(cube.window_sites() == 365);
  CHECK(cube.corners().size() == 44);
  std::size_t triple = 0;
  for (auto& c : cube.corners()) triple += c.normal_dirs.size() == 3;
  CHECK(triple == 4);
  auto pit = fixture("pit3d");
  CHECK(pit.M() == 125);
  CHECK(pit.G() == 25);
  CHECK(pit.Nstar() == 6);
  std::set<SiteIndex> seen;
  for (int a = -12; a <= 12; ++a)
    for (int b = -12; b <= 12; ++b) {
      auto idx = cube.index_of({a, b, 0});
      if (idx) CHECK(seen.insert(*idx).second);
    }
  CHECK(seen.size() == 25 * 25 - 49);
}

TEST_CASE("violations") {
  CHECK(violation_of("dim 2\npolyline\n0 0\n2 2\n2 0\nend\n") == ViolationKind::Accessibility);
  CHECK(violation_of("dim 2\npolyline\n0 0\n0 2\n2 2\n2 1\n-1 1\n-1 0\nend\n") == ViolationKind::Bijection);
  CHECK(violation_of("dim 2\npolyline\n0 0\n0 2\n2 2\n2 3\nend\n") == ViolationKind::Boundary);
  CHECK(violation_of("dim 2\npolyline\n3 0\n3 2\n0 2\n0 0\nend\n") == ViolationKind::Boundary);
  CHECK(violation_of("dim 3\nfootprint -2 2 -2 2\nfacet 0 -2 -2 2 -3 0\nfacet 0 2 -2 2 -3 0\n"
                     "facet 1 -2 -2 2 -3 0\nfacet 1 2 -2 2 -3 0\n") == ViolationKind::Compactness);
  try {
    build_membrane(parse_membrane("dim 2\npolyline\n0 0\n2 2\n2 0\nend\n"));
  } catch (const ValidationError& e) {
    CHECK(e.point() == "(0,0)");
  }
}
