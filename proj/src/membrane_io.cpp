#include <fstream>
#include <sstream>

#include "bst/errors.hpp"
#include "bst/membrane.hpp"

namespace bst {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

int to_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + s + "'");
  }
}

}  // namespace

MembraneSpec parse_membrane(const std::string& text) {
  MembraneSpec spec;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  bool have_dim = false, in_polyline = false, have_polyline = false, have_footprint = false;
  while (std::getline(is, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    auto t = tokens(raw);
    if (t.empty()) continue;
    if (in_polyline) {
      if (t[0] == "end") {
        if (t.size() != 1) throw ParseError(line, "trailing tokens after 'end'");
        in_polyline = false;
        continue;
      }
      if (t.size() != 2) throw ParseError(line, "polyline vertex needs two coordinates");
      spec.polyline.emplace_back(to_int(t[0], line), to_int(t[1], line));
      continue;
    }
    const std::string& key = t[0];
    if (key == "dim") {
      if (t.size() != 2 || have_dim) throw ParseError(line, "bad or repeated 'dim'");
      spec.dim = to_int(t[1], line);
      if (spec.dim != 2 && spec.dim != 3) throw ParseError(line, "only dim 2 and 3 membranes are supported");
      have_dim = true;
    } else if (key == "name") {
      if (t.size() != 2) throw ParseError(line, "name must be a single token");
      spec.name = t[1];
    } else if (key == "polyline") {
      if (!have_dim || spec.dim != 2 || have_polyline || t.size() != 1)
        throw ParseError(line, "'polyline' needs a preceding 'dim 2'");
      in_polyline = have_polyline = true;
    } else if (key == "footprint") {
      if (!have_dim || spec.dim != 3 || t.size() != 5 || have_footprint)
        throw ParseError(line, "'footprint lo0 hi0 lo1 hi1' needs a preceding 'dim 3'");
      for (int i = 0; i < 4; ++i) spec.footprint[i] = to_int(t[i + 1], line);
      if (spec.footprint[0] > spec.footprint[1] || spec.footprint[2] > spec.footprint[3])
        throw ParseError(line, "footprint bounds out of order");
      have_footprint = true;
    } else if (key == "facet") {
      if (!have_dim || spec.dim != 3 || t.size() != 7)
        throw ParseError(line, "'facet axis level lo hi lo hi' needs a preceding 'dim 3'");
      Facet f;
      f.axis = to_int(t[1], line);
      f.level = to_int(t[2], line);
      if (f.axis < 0 || f.axis > 2) throw ParseError(line, "facet axis must be 0, 1 or 2");
      for (int i = 0; i < 2; ++i) {
        f.lo[i] = to_int(t[3 + 2 * i], line);
        f.hi[i] = to_int(t[4 + 2 * i], line);
        if (f.lo[i] > f.hi[i]) throw ParseError(line, "facet range out of order");
      }
      spec.facets.push_back(f);
    } else {
      throw ParseError(line, "unknown keyword '" + key + "'");
    }
  }
  if (in_polyline) throw ParseError(line, "polyline not terminated by 'end'");
  if (!have_dim) throw ParseError(line, "missing 'dim'");
  if (spec.dim == 3 && !have_footprint && !spec.facets.empty()) throw ParseError(line, "missing 'footprint'");
  return spec;
}

MembraneSpec load_membrane(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_membrane(ss.str());
}

std::string serialize(const MembraneSpec& spec) {
  std::ostringstream os;
  os << "dim " << spec.dim << "\n";
  if (!spec.name.empty()) os << "name " << spec.name << "\n";
  if (spec.dim == 2) {
    os << "polyline\n";
    for (auto& p : spec.polyline) os << p[0] << " " << p[1] << "\n";
    os << "end\n";
    return os.str();
  }
  os << "footprint " << spec.footprint[0] << " " << spec.footprint[1] << " " << spec.footprint[2] << " "
     << spec.footprint[3] << "\n";
  for (auto& f : spec.facets)
    os << "facet " << f.axis << " " << f.level << " " << f.lo[0] << " " << f.hi[0] << " " << f.lo[1] << " "
       << f.hi[1] << "\n";
  return os.str();
}

}  // namespace bst
