#include "tactile/fixtures.hpp"

#include <numbers>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFixtureHeight = 0.05;

void add(Scene& s, int id, Polygon poly) {
  SceneObject obj{id, poly, Prism{poly, kFixtureHeight, {}}};
  s.objects.push_back(std::move(obj));
}

}  // namespace

Polygon rectangle(Point2 lo, Point2 hi) {
  return Polygon({lo, {hi.x, lo.y}, hi, {lo.x, hi.y}});
}

Polygon regular_polygon(Point2 center, double radius, int sides, double rotation) {
  std::vector<Point2> v;
  for (int k = 0; k < sides; ++k) {
    const double a = rotation + 2.0 * kPi * k / sides;
    v.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return Polygon(std::move(v));
}

Polygon ellipse_polygon(Point2 center, double rx, double ry, int segments) {
  std::vector<Point2> v;
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * kPi * k / segments;
    v.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
  }
  return Polygon(std::move(v));
}

Polygon pentagram(Point2 center, double r_out, double rotation) {
  const double r_in = r_out * 0.381966;
  std::vector<Point2> v;
  for (int k = 0; k < 10; ++k) {
    const double a = rotation + kPi / 2.0 + kPi * k / 5.0;
    const double r = (k % 2 == 0) ? r_out : r_in;
    v.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  return Polygon(std::move(v));
}

Polygon l_shape(Point2 o, double w, double h, double t) {
  return Polygon({o, {o.x + w, o.y}, {o.x + w, o.y + t}, {o.x + t, o.y + t},
                  {o.x + t, o.y + h}, {o.x, o.y + h}});
}

Polygon s_shape(Point2 o, double w, double h, double t) {
  const double mid_lo = (h - t) / 2.0, mid_hi = (h + t) / 2.0;
  return Polygon({{o.x, o.y},
                  {o.x + w, o.y},
                  {o.x + w, o.y + mid_hi},
                  {o.x + t, o.y + mid_hi},
                  {o.x + t, o.y + h - t},
                  {o.x + w, o.y + h - t},
                  {o.x + w, o.y + h},
                  {o.x, o.y + h},
                  {o.x, o.y + mid_lo},
                  {o.x + w - t, o.y + mid_lo},
                  {o.x + w - t, o.y + t},
                  {o.x, o.y + t}});
}

Polygon c_shape(Point2 center, double r_in, double r_out, double gap, int segments) {
  std::vector<Point2> v;
  const double a0 = gap / 2.0, a1 = 2.0 * kPi - gap / 2.0;
  for (int k = 0; k <= segments; ++k) {
    const double a = a0 + (a1 - a0) * k / segments;
    v.push_back({center.x + r_out * std::cos(a), center.y + r_out * std::sin(a)});
  }
  for (int k = segments; k >= 0; --k) {
    const double a = a0 + (a1 - a0) * k / segments;
    v.push_back({center.x + r_in * std::cos(a), center.y + r_in * std::sin(a)});
  }
  return Polygon(std::move(v));
}

std::vector<std::string> fixture_names() { return {"a", "b", "c", "d", "e", "f"}; }

Scene fixture_scene(const std::string& name) {
  Scene s;
  s.task_space = {0.0, 0.0, 1.0, 1.0};
  if (name == "a") {
    add(s, 1, circle_polygon({0.25, 0.25}, 0.07));
    add(s, 2, rectangle({0.63, 0.18}, {0.77, 0.32}));
    add(s, 3, regular_polygon({0.5, 0.55}, 0.09, 3, kPi / 2.0));
    add(s, 4, regular_polygon({0.25, 0.75}, 0.08, 6));
    add(s, 5, circle_polygon({0.75, 0.75}, 0.06));
  } else if (name == "b") {
    add(s, 1, circle_polygon({0.28, 0.28}, 0.12));
    add(s, 2, rectangle({0.58, 0.16}, {0.82, 0.40}));
    add(s, 3, regular_polygon({0.30, 0.72}, 0.15, 3, kPi / 2.0));
    add(s, 4, regular_polygon({0.72, 0.72}, 0.13, 5, kPi / 2.0));
  } else if (name == "c") {
    int id = 1;
    for (double y : {0.3, 0.7}) {
      for (double x : {0.2, 0.5, 0.8}) {
        add(s, id++, rectangle({x - 0.045, y - 0.045}, {x + 0.045, y + 0.045}));
      }
    }
  } else if (name == "d") {
    // Two L-shaped walls enclose a centre block; the diagonal slits are offset so
    // that no axis-parallel line through a slit reaches the block.
    add(s, 1, Polygon({{0.28, 0.42}, {0.34, 0.42}, {0.34, 0.66}, {0.58, 0.66},
                       {0.58, 0.72}, {0.28, 0.72}}));
    add(s, 2, Polygon({{0.42, 0.28}, {0.72, 0.28}, {0.72, 0.58}, {0.66, 0.58},
                       {0.66, 0.34}, {0.42, 0.34}}));
    add(s, kEnclosedObjectId, rectangle({0.43, 0.43}, {0.57, 0.57}));
  } else if (name == "e") {
    add(s, 1, pentagram({0.28, 0.30}, 0.14));
    add(s, 2, pentagram({0.72, 0.30}, 0.14));
    add(s, 3, pentagram({0.50, 0.72}, 0.14));
  } else if (name == "f") {
    add(s, 1, s_shape({0.30, 0.25}, 0.40, 0.50, 0.08));
  } else {
    throw std::invalid_argument("unknown fixture scene '" + name + "'");
  }
  check_scene(s);
  return s;
}

}  // namespace tactile
