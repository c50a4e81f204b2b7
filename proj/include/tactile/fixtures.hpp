#pragma once

#include <string>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/scene.hpp"

namespace tactile {

// --- shape builders ------------------------------------------------------------

Polygon rectangle(Point2 lo, Point2 hi);
Polygon regular_polygon(Point2 center, double radius, int sides, double rotation = 0.0);
Polygon ellipse_polygon(Point2 center, double rx, double ry, int segments = 48);
inline Polygon circle_polygon(Point2 center, double r, int segments = 48) {
  return ellipse_polygon(center, r, r, segments);
}
/// Five-pointed star; inner radius is r_out * 0.382 (regular pentagram).
Polygon pentagram(Point2 center, double r_out, double rotation = 0.0);
/// Vertical bar of height h plus horizontal foot of width w, stroke thickness t.
Polygon l_shape(Point2 origin, double w, double h, double t);
/// Three horizontal bars joined by alternating vertical strokes.
Polygon s_shape(Point2 origin, double w, double h, double t);
/// Annulus sector with an opening of `gap` radians centred on the +x axis.
Polygon c_shape(Point2 center, double r_in, double r_out, double gap, int segments = 32);

// --- benchmark scenes ----------------------------------------------------------

/// Names "a" .. "f": small primitives, large primitives, small squares,
/// enclosed centre object, pentagrams, S shape.
std::vector<std::string> fixture_names();
Scene fixture_scene(const std::string& name);

/// Object id of the enclosed centre block in fixture "d".
constexpr int kEnclosedObjectId = 3;

}  // namespace tactile
