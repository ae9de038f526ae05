#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pinnflow/vec2.hpp"

namespace pinnflow::geom {

enum class BcKind { Dirichlet, Neumann };
enum class BcApplies { U, V, Both };

/// Boundary condition attached to one boundary segment. For Dirichlet the
/// value function returns the prescribed velocity (u, v) at a boundary
/// point; for Neumann it returns the prescribed normal derivatives
/// (du/dn, dv/dn).
struct BCSpec {
  BcKind kind = BcKind::Dirichlet;
  BcApplies applies = BcApplies::Both;
  std::function<Vec2(Vec2)> value;
};

struct BoundarySegment {
  std::string name;
  BCSpec bc;
  /// Dirichlet pressure on this segment, where the case prescribes one
  /// (e.g. a channel outlet). Unset means no pressure condition.
  std::optional<std::function<double(Vec2)>> pressure_value;
  /// True if the boundary point belongs to this segment. Segments are
  /// tested in list order; the first match wins.
  std::function<bool(Vec2)> contains;
};

/// Axis-aligned rectangular cavity/box, fluid inside.
struct RectShape {
  Vec2 lo, hi;
};

/// Half-disk {x^2 + y^2 <= R^2, y <= 0} with the flat lid on top (y = 0).
struct SemicircleShape {
  double radius = 1.0;
};

/// Channel x in [0, length] between y_bot(x) and y_top(x) with
/// y_top(x) = h + A sin(2 pi x / lambda), y_bot(x) = -y_top(x).
struct WavyChannelShape {
  double length = 8.0;
  double half_height = 1.0;
  double amplitude = 0.2;
  double wavelength = 2.0;

  double y_top(double x) const;
  double y_top_prime(double x) const;
};

/// Rectangle with a circular hole; fluid between the rectangle and the disk.
struct RectWithDiskHoleShape {
  Vec2 lo, hi;
  Vec2 center;
  double hole_radius = 0.25;
};

using Shape =
    std::variant<RectShape, SemicircleShape, WavyChannelShape, RectWithDiskHoleShape>;

struct Projection {
  Vec2 point;    // nearest boundary point P
  Vec2 normal;   // outward unit normal at P
  double dist;   // |query - P|
  int segment;   // index into segments()
};

struct MirrorRecord {
  Vec2 external;   // A
  Vec2 boundary;   // P
  Vec2 mirror;     // Q = 2P - A (or the substituted point when degenerate)
  double ap;       // |A - P| = |P - Q| for the non-degenerate mirror
  Vec2 normal;     // outward unit normal at P
  int segment;
  bool degenerate = false;  // Q = 2P - A fell outside the fluid
};

struct BoundaryPoint {
  Vec2 pos;
  int segment;
};

/// Analytic signed-distance geometry. Negative strictly inside the fluid,
/// positive outside, zero on the boundary.
class LevelSetGeometry {
 public:
  LevelSetGeometry(Shape shape, std::vector<BoundarySegment> segments);

  double signed_distance(Vec2 p) const;
  Projection project_to_boundary(Vec2 p) const;

  /// Mirror construction for an external point. Throws ConfigError when the
  /// point is farther than max_dist from the boundary (stencil width
  /// exceeded), InvalidArgumentError when the point is not outside.
  MirrorRecord mirror_point(Vec2 external,
                            double max_dist = std::numeric_limits<double>::infinity()) const;

  std::pair<Vec2, Vec2> bounding_box() const;
  double min_feature_size() const;
  double boundary_length() const;

  /// Boundary points placed by arclength marching, centered within each
  /// piece (spacing ~ spacing argument; exact count when total_count set).
  std::vector<BoundaryPoint> boundary_points(double spacing,
                                             std::optional<int> total_count = {}) const;

  const std::vector<BoundarySegment>& segments() const { return segments_; }
  const Shape& shape() const { return shape_; }

  /// Segment owning a boundary point (first predicate match in list order).
  int segment_at(Vec2 boundary_point) const;

 private:
  Shape shape_;
  std::vector<BoundarySegment> segments_;
};

// Case factories. Segment BC values are installed per the benchmark cases;
// the rect factory takes an arbitrary Dirichlet field for oracle-driven
// boundary data.
LevelSetGeometry make_square_cavity(double size = 1.0, double lid_velocity = 1.0);
LevelSetGeometry make_semicircle_cavity(double radius = 1.0, double lid_velocity = 1.0);
LevelSetGeometry make_wavy_channel(double length = 8.0, double half_height = 1.0,
                                   double amplitude = 0.2, double wavelength = 2.0);
LevelSetGeometry make_rect_with_disk_hole(Vec2 lo, Vec2 hi, Vec2 center,
                                          double hole_radius);
LevelSetGeometry make_rect_dirichlet(Vec2 lo, Vec2 hi,
                                     std::function<Vec2(Vec2)> velocity);

}  // namespace pinnflow::geom
