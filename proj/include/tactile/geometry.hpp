#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tactile {

/// Raised when an input violates an operation's precondition
/// (degenerate polygon, collinear point set, malformed file, ...).
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(Point3 a, Point3 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double squared_norm(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
/// Counter-clockwise quarter turn.
inline Point2 perp(Point2 a) { return {-a.y, a.x}; }
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Closed vertex loop, normalized to counter-clockwise order on construction.
/// Consecutive duplicate vertices (and a repeated closing vertex) are dropped.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Point2> vertices);

  [[nodiscard]] const std::vector<Point2>& vertices() const { return vertices_; }
  [[nodiscard]] std::size_t size() const { return vertices_.size(); }
  [[nodiscard]] const Point2& operator[](std::size_t i) const { return vertices_[i]; }
  /// Edge i runs from vertex i to vertex (i+1) mod n.
  [[nodiscard]] Point2 edge_start(std::size_t i) const { return vertices_[i]; }
  [[nodiscard]] Point2 edge_end(std::size_t i) const {
    return vertices_[(i + 1) % vertices_.size()];
  }

 private:
  std::vector<Point2> vertices_;
};

struct BoundingBox {
  double x_min, y_min, x_max, y_max;
};

double signed_area(std::span<const Point2> loop);
double polygon_area(const Polygon& poly);
double polygon_perimeter(const Polygon& poly);
Point2 polygon_centroid(const Polygon& poly);
BoundingBox bounding_box(const Polygon& poly);

/// Boundary points count as inside. Throws GeometryError for zero-area input.
bool point_in_polygon(Point2 p, const Polygon& poly);

/// Winding number of the loop around p (0 outside for simple CCW loops, 1 inside).
int winding_number(Point2 p, const Polygon& poly);

Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b);
double point_segment_distance(Point2 p, Point2 a, Point2 b);
double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d);
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

struct BoundaryProjection {
  Point2 point;
  double distance = 0.0;
  std::size_t edge = 0;
};

/// Nearest point on the polygon boundary.
BoundaryProjection closest_boundary_point(Point2 p, const Polygon& poly);

/// True iff segment ab touches an edge of poly or lies inside it.
bool segment_polygon_intersect(Point2 a, Point2 b, const Polygon& poly);

/// Minimum distance between the boundaries of two polygons.
double polygon_boundary_distance(const Polygon& a, const Polygon& b);

bool is_simple(const Polygon& poly);

/// `n` points at equal arc-length spacing along the closed boundary, starting at vertex 0.
std::vector<Point2> resample_perimeter(const Polygon& poly, std::size_t n);

/// Outer boundary of the alpha shape: Delaunay triangles with circumradius < alpha,
/// largest edge-connected component, collinear vertices removed.
Polygon alpha_shape(std::span<const Point2> points, double alpha);

struct Triangle {
  std::size_t a, b, c;  // counter-clockwise
};
/// Bowyer-Watson Delaunay triangulation. Duplicate points are ignored.
std::vector<Triangle> delaunay_triangulation(std::span<const Point2> points);

/// Intersection-over-union of two polygons, rasterized at resolution x resolution
/// cell centers over the joint bounding box.
double polygon_iou(const Polygon& a, const Polygon& b, int resolution = 512);

/// Outward offset: each vertex moves along its corner bisector so that every
/// edge shifts by `distance`. Miter length is capped at `miter_limit * distance`.
Polygon offset_polygon(const Polygon& poly, double distance, double miter_limit = 4.0);

/// Interior point farthest from the boundary, found by grid search refined
/// around the best cell.
Point2 pole_of_inaccessibility(const Polygon& poly, int grid = 64);

// --- vertical raycasting ---------------------------------------------------

/// z-extruded footprint with optional through-holes.
struct Prism {
  Polygon footprint;
  double height = 0.0;
  std::vector<Polygon> holes;
};

/// Half-ellipsoid cap: z = height * sqrt(1 - (dx/rx)^2 - (dy/ry)^2).
/// A hemisphere of radius r is {center, r, r, r}.
struct Dome {
  Point2 center;
  double rx = 0.0;
  double ry = 0.0;
  double height = 0.0;
};

/// Footprint with a planar sloped top z = base + slope . (p - origin), clamped at 0.
struct Wedge {
  Polygon footprint;
  Point2 origin;
  double base = 0.0;
  Point2 slope;
};

using ShapeVolume = std::variant<Prism, Dome, Wedge>;

Dome hemisphere(Point2 center, double radius);

/// Highest surface point above (x, y), or nullopt when the vertical line misses.
std::optional<double> raycast_down(double x, double y, const ShapeVolume& volume);

}  // namespace tactile
