#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "tactile/geometry.hpp"

using namespace tactile;

namespace {

Polygon unit_square() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// Independent oracle: total turning angle of the loop around p.
int angle_sum_winding(Point2 p, const Polygon& poly) {
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly.edge_start(i) - p, b = poly.edge_end(i) - p;
    total += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// Gift-wrapping hull, strictly convex vertices only.
std::vector<Point2> gift_wrap(const std::vector<Point2>& pts) {
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[start].x || (pts[i].x == pts[start].x && pts[i].y < pts[start].y)) start = i;
  }
  std::vector<Point2> hull;
  std::size_t cur = start;
  do {
    hull.push_back(pts[cur]);
    std::size_t cand = (cur + 1) % pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double o = cross(pts[cand] - pts[cur], pts[i] - pts[cur]);
      if (o < 0 || (o == 0 && distance(pts[cur], pts[i]) > distance(pts[cur], pts[cand]))) cand = i;
    }
    cur = cand;
  } while (cur != start && hull.size() <= pts.size());
  return hull;
}

double shoelace(const std::vector<Point2>& v) {
  double a = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(a);
}

Polygon random_star_polygon(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.3, 1.0), c(-1.0, 1.0);
  std::uniform_int_distribution<int> nv(3, 12);
  const int n = nv(rng);
  const Point2 center{c(rng), c(rng)};
  std::vector<double> angles(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (auto& a : angles) a = ang(rng);
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> v;
  for (double a : angles) {
    const double rad = r(rng);
    v.push_back({center.x + rad * std::cos(a), center.y + rad * std::sin(a)});
  }
  return Polygon(v);
}

}  // namespace

TEST_CASE("polygon normalizes orientation and drops repeated vertices") {
  Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}});
  CHECK(cw.size() == 4);
  CHECK(polygon_area(cw) == doctest::Approx(1.0));
  CHECK(cw[0] == Point2{0, 0});
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 1}}), GeometryError);
}

TEST_CASE("point_in_polygon examples") {
  const auto sq = unit_square();
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({2, 2}, sq));
  CHECK(point_in_polygon({1.0, 0.5}, sq));
  CHECK(point_in_polygon({0.0, 0.0}, sq));
  CHECK_THROWS_AS(point_in_polygon({0, 0}, Polygon({{0, 0}, {1, 0}, {2, 0}})), GeometryError);
}

TEST_CASE("point_in_polygon agrees with the winding-number oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2.2, 2.2);
  int disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto poly = random_star_polygon(rng);
    const Point2 p{u(rng), u(rng)};
    if (closest_boundary_point(p, poly).distance < 1e-9) continue;
    const bool oracle = angle_sum_winding(p, poly) != 0;
    if (point_in_polygon(p, poly) != oracle) ++disagreements;
    if ((winding_number(p, poly) != 0) != oracle) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("segment_polygon_intersect examples") {
  const auto sq = unit_square();
  CHECK(segment_polygon_intersect({-1, 0.5}, {2, 0.5}, sq));
  CHECK_FALSE(segment_polygon_intersect({-1, -1}, {-0.5, -0.5}, sq));
  CHECK(segment_polygon_intersect({0.2, 0.2}, {0.8, 0.8}, sq));
  CHECK(segment_polygon_intersect({-1, 0}, {0, 0}, sq));  // touching a corner
}

TEST_CASE("raycast_down examples") {
  const ShapeVolume prism = Prism{unit_square(), 0.1, {}};
  REQUIRE(raycast_down(0.5, 0.5, prism).has_value());
  CHECK(*raycast_down(0.5, 0.5, prism) == doctest::Approx(0.1));
  CHECK_FALSE(raycast_down(2, 2, prism).has_value());

  const ShapeVolume dome = hemisphere({0.5, 0.5}, 0.5);
  CHECK(*raycast_down(0.5, 0.5, dome) == doctest::Approx(0.5));
  CHECK_FALSE(raycast_down(1.2, 0.5, dome).has_value());

  Prism holed{unit_square(), 0.2, {Polygon({{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}})}};
  CHECK_FALSE(raycast_down(0.5, 0.5, ShapeVolume{holed}).has_value());
  CHECK(*raycast_down(0.2, 0.2, ShapeVolume{holed}) == doctest::Approx(0.2));

  const ShapeVolume wedge = Wedge{unit_square(), {0, 0}, 0.1, {0.1, 0.0}};
  CHECK(*raycast_down(0.5, 0.5, wedge) == doctest::Approx(0.15));
}

TEST_CASE("resample_perimeter examples") {
  const auto sq = unit_square();
  auto four = resample_perimeter(sq, 4);
  REQUIRE(four.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(four[i].x == doctest::Approx(sq[i].x));
    CHECK(four[i].y == doctest::Approx(sq[i].y));
  }
  auto eight = resample_perimeter(sq, 8);
  CHECK(eight[1].x == doctest::Approx(0.5));
  CHECK(eight[1].y == doctest::Approx(0.0));
  CHECK(eight[3].x == doctest::Approx(1.0));
  CHECK(eight[3].y == doctest::Approx(0.5));
  CHECK_THROWS_AS(resample_perimeter(sq, 2), GeometryError);
}

TEST_CASE("resample_perimeter gaps are equal by cumulative arc length") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto poly = random_star_polygon(rng);
    const auto pts = resample_perimeter(poly, 64);
    REQUIRE(pts.size() == 64);
    // Oracle: arc-length coordinate of each point by walking edges.
    std::vector<double> s;
    double walked = 0.0;
    std::size_t k = 0;
    for (std::size_t e = 0; e < poly.size() && k < pts.size(); ++e) {
      const Point2 a = poly.edge_start(e), b = poly.edge_end(e);
      const double len = distance(a, b);
      while (k < pts.size() && point_segment_distance(pts[k], a, b) < 1e-12 &&
             (s.empty() || walked + distance(a, pts[k]) >= s.back() - 1e-12)) {
        s.push_back(walked + distance(a, pts[k]));
        ++k;
      }
      walked += len;
    }
    REQUIRE(s.size() == 64);
    const double gap = walked / 64.0;
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs((s[i] - s[i - 1]) - gap) <= 1e-9 * gap);
    CHECK(std::abs((walked - s.back()) - gap) <= 1e-9 * gap);
  }
}

TEST_CASE("alpha_shape of square corners is the square") {
  std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto poly = alpha_shape(pts, 10.0);
  CHECK(poly.size() == 4);
  CHECK(polygon_area(poly) == doctest::Approx(1.0));
}

TEST_CASE("alpha_shape with large alpha equals the convex hull") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Point2> pts(60);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto shape = alpha_shape(pts, 1e6);
    const auto hull = gift_wrap(pts);
    std::set<std::pair<double, double>> a, b;
    for (const auto& p : shape.vertices()) a.insert({p.x, p.y});
    for (const auto& p : hull) b.insert({p.x, p.y});
    CHECK(a == b);
  }
}

TEST_CASE("alpha_shape of a C-shaped cloud is non-convex") {
  std::vector<Point2> pts;
  const double spacing = 0.02;
  for (double r = 0.3; r <= 0.5 + 1e-9; r += spacing) {
    const double dtheta = spacing / r;
    for (double t = 0.0; t <= 1.5 * std::numbers::pi; t += dtheta) {
      pts.push_back({r * std::cos(t), r * std::sin(t)});
    }
  }
  const auto shape = alpha_shape(pts, 2.0 * spacing);
  const auto hull = gift_wrap(pts);
  const double shape_area = shoelace(shape.vertices());
  CHECK(shape_area == doctest::Approx(polygon_area(shape)));
  CHECK(shape_area < 0.8 * shoelace(hull));
  // Annulus sector area 0.75 * pi * (0.5^2 - 0.3^2) ~ 0.377
  CHECK(shape_area == doctest::Approx(0.75 * std::numbers::pi * (0.25 - 0.09)).epsilon(0.05));
  CHECK(is_simple(shape));
}

TEST_CASE("alpha_shape rejects collinear input") {
  std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(alpha_shape(pts, 10.0), GeometryError);
}

TEST_CASE("area, centroid and IoU") {
  const auto sq = unit_square();
  CHECK(polygon_area(sq) == doctest::Approx(1.0));
  const auto c = polygon_centroid(sq);
  CHECK(c.x == doctest::Approx(0.5));
  CHECK(c.y == doctest::Approx(0.5));
  CHECK(polygon_iou(sq, sq) == doctest::Approx(1.0));
  const Polygon shifted({{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}});
  // Analytic overlap 0.5 over union 1.5.
  CHECK(polygon_iou(sq, shifted) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("polygon_iou is symmetric") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_star_polygon(rng), b = random_star_polygon(rng);
    CHECK(polygon_iou(a, b) == doctest::Approx(polygon_iou(b, a)).epsilon(1e-12));
    CHECK(polygon_iou(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("offset_polygon miters the corners") {
  const auto grown = offset_polygon(unit_square(), 0.01);
  const auto bb = bounding_box(grown);
  CHECK(bb.x_max - bb.x_min == doctest::Approx(1.02));
  CHECK(bb.y_max - bb.y_min == doctest::Approx(1.02));
  CHECK(polygon_area(grown) == doctest::Approx(1.02 * 1.02));
  const auto same = offset_polygon(unit_square(), 0.0);
  CHECK(same.vertices() == unit_square().vertices());
}

TEST_CASE("pole of inaccessibility lies inside an L shape whose centroid does not") {
  const Polygon ell({{0, 0}, {1, 0}, {1, 0.1}, {0.1, 0.1}, {0.1, 1}, {0, 1}});
  const auto c = polygon_centroid(ell);
  CHECK_FALSE(point_in_polygon(c, ell));
  const auto p = pole_of_inaccessibility(ell);
  CHECK(point_in_polygon(p, ell));
  // Best achievable clearance in this L is 0.05 (half the arm width); grid search gets close.
  CHECK(closest_boundary_point(p, ell).distance > 0.045);
}

TEST_CASE("is_simple detects a bow tie") {
  CHECK(is_simple(unit_square()));
  const Polygon bow({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  CHECK_FALSE(is_simple(bow));
}
