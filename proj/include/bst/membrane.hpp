#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bst/lattice.hpp"

namespace bst {

// Axis-aligned piece of the membrane surface. The normal axis is fixed at
// `level`; the other axes (in increasing order) span the closed ranges lo..hi.
struct Facet {
  int axis = 0;
  int level = 0;
  std::array<int, kMaxDim - 1> lo{};
  std::array<int, kMaxDim - 1> hi{};
  bool operator==(const Facet&) const = default;
};

// Text form. 2D files hold a polyline from (xa, 0) to (xb, 0); 3D files hold
// a footprint box plus facets. Tails of the plane y = 0 complete the surface
// outside the open footprint.
struct MembraneSpec {
  int dim = 2;
  std::string name;
  std::vector<LatticePoint> polyline;   // d = 2
  std::array<int, 2 * (kMaxDim - 1)> footprint{};  // lo0 hi0 lo1 hi1 (d = 3)
  std::vector<Facet> facets;            // d = 3, or derived from the polyline

  bool planar() const { return dim == 2 ? polyline.empty() : facets.empty(); }
};

MembraneSpec parse_membrane(const std::string& text);
MembraneSpec load_membrane(const std::string& path);
std::string serialize(const MembraneSpec& spec);

enum class PointKind { External, Boundary, Internal, Removed };

struct BoundaryPoint {
  SiteIndex index = 0;
  LatticePoint position;
  int normal_dir = 0;  // direction toward the single external neighbour
  LatticePoint near() const { return position.step(normal_dir); }
  bool on_plane() const { return position.y() == 0; }
};

// External corner removed during normalization.
struct CornerRecord {
  LatticePoint removed;
  std::vector<int> normal_dirs;             // directions toward external neighbours
  std::vector<SiteIndex> neighbor_indices;  // adjacent boundary points
};

struct PointClass {
  PointKind kind = PointKind::External;
  std::optional<SiteIndex> boundary;        // index when kind == Boundary
  std::vector<SiteIndex> near_boundary_of;  // boundary points whose normal lands here
  std::optional<int> ground;                // position in ground_points()
};

struct Relink {
  LatticePoint from;
  int dir;
  LatticePoint to;
  LatticePoint via;  // removed corner
};

class Membrane {
 public:
  Membrane(MembraneSpec spec, int window_margin);

  int dim() const { return dim_; }
  const MembraneSpec& spec() const { return spec_; }

  // Boundary points of the window in index order: non-plane first (1..M),
  // then plane points of the window.
  const std::vector<BoundaryPoint>& boundary() const { return boundary_; }
  int M() const { return m_nonplane_; }
  int N() const { return n_height_; }
  int Nstar() const { return n_depth_; }
  int G() const { return static_cast<int>(ground_.size()); }
  int window_sites() const { return static_cast<int>(boundary_.size()); }
  SiteIndex first_plane_index() const { return m_nonplane_ + 1; }

  // External points at level 0 above the footprint, lexicographic order.
  const std::vector<LatticePoint>& ground_points() const { return ground_; }
  const std::vector<CornerRecord>& corners() const { return corners_; }
  const std::vector<Relink>& relinks() const { return relinks_; }

  PointKind kind(const LatticePoint& p) const;
  PointClass classify(const LatticePoint& p) const;
  std::optional<SiteIndex> index_of(const LatticePoint& p) const;
  // Boundary point of the window with index m (throws DomainError otherwise).
  const BoundaryPoint& site(SiteIndex m) const;
  bool in_window(SiteIndex m) const;

  // Neighbour of an external point in direction dir on the normalized
  // lattice: a step into a removed corner is sent to the next external
  // neighbour of that corner.
  LatticePoint neighbor(const LatticePoint& p, int dir) const;

  // Window: horizontal box [lo_i, hi_i]; vertical range of the stored box.
  int window_lo(int axis) const { return lo_[axis]; }
  int window_hi(int axis) const { return hi_[axis]; }
  int box_bottom() const { return ybot_; }
  int box_top() const { return ytop_; }
  int window_margin() const { return margin_; }

 private:
  bool solid(const LatticePoint& p) const;
  bool in_box(const LatticePoint& p) const;
  std::size_t cell(const LatticePoint& p) const;
  bool open_footprint_contains(const LatticePoint& p) const;
  void prepare_polyline();
  void prepare_facets();
  void setup_box();
  void rasterize();
  void classify_cells();
  void check_accessibility() const;
  void enumerate();
  SiteIndex index_beyond_window(const LatticePoint& p) const;

  MembraneSpec spec_;
  int dim_;
  int margin_;
  std::array<int, kMaxDim - 1> lo_{}, hi_{};
  std::array<int, kMaxDim - 1> flo_{}, fhi_{};  // footprint
  int ybot_ = 0, ytop_ = 0;
  std::array<std::size_t, kMaxDim> extent_{};
  std::vector<LatticePoint> traversal_;  // surface points in file order
  std::vector<std::uint8_t> solid_;
  std::vector<PointKind> kinds_;
  std::vector<std::int32_t> slot_;  // position in boundary_ for boundary cells
  std::vector<BoundaryPoint> boundary_;
  std::vector<LatticePoint> ground_;
  std::unordered_map<LatticePoint, int, LatticePointHash> ground_slot_;
  std::vector<CornerRecord> corners_;
  std::vector<Relink> relinks_;
  std::unordered_map<LatticePoint, std::array<int, 2 * kMaxDim>, LatticePointHash> relink_slot_;
  std::unordered_map<LatticePoint, std::vector<SiteIndex>, LatticePointHash> near_of_;
  int m_nonplane_ = 0, n_height_ = 0, n_depth_ = 0;
};

int default_window_margin(int dim);
Membrane build_membrane(const MembraneSpec& spec, std::optional<int> window_margin = {});

}  // namespace bst
