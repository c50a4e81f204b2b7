#include "tactile/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace tactile {

namespace {

constexpr double kAreaEps = 1e-15;

double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

double loop_scale(std::span<const Point2> pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return std::max(s, 1.0);
}

void require_nondegenerate(const Polygon& poly, const char* what) {
  if (poly.size() < 3 || std::abs(polygon_area(poly)) <= kAreaEps) {
    throw GeometryError(std::string(what) + ": degenerate polygon (zero area)");
  }
}

}  // namespace

Polygon::Polygon(std::vector<Point2> vertices) {
  for (const auto& p : vertices) {
    if (!is_finite(p)) throw GeometryError("Polygon: non-finite vertex");
    if (vertices_.empty() || !(vertices_.back() == p)) vertices_.push_back(p);
  }
  while (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
  if (vertices_.size() < 3) throw GeometryError("Polygon: fewer than 3 distinct vertices");
  if (signed_area(vertices_) < 0.0) std::reverse(vertices_.begin() + 1, vertices_.end());
}

double signed_area(std::span<const Point2> loop) {
  double a = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(loop[i], loop[(i + 1) % n]);
  return 0.5 * a;
}

double polygon_area(const Polygon& poly) { return signed_area(poly.vertices()); }

double polygon_perimeter(const Polygon& poly) {
  double p = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) p += distance(poly.edge_start(i), poly.edge_end(i));
  return p;
}

Point2 polygon_centroid(const Polygon& poly) {
  require_nondegenerate(poly, "polygon_centroid");
  // Shift to vertex 0 to limit cancellation for polygons far from the origin.
  const Point2 o = poly[0];
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 p = poly.edge_start(i) - o, q = poly.edge_end(i) - o;
    const double w = cross(p, q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {o.x + cx / (3.0 * a), o.y + cy / (3.0 * a)};
}

BoundingBox bounding_box(const Polygon& poly) {
  BoundingBox b{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
  for (const auto& p : poly.vertices()) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = squared_norm(ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  return distance(p, closest_point_on_segment(p, a, b));
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double eps = 1e-14 * loop_scale(std::array{a, b, c, d});
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  auto sgn = [eps](double v) { return v > eps ? 1 : (v < -eps ? -1 : 0); };
  const int s1 = sgn(d1), s2 = sgn(d2), s3 = sgn(d3), s4 = sgn(d4);
  if (s1 * s2 < 0 && s3 * s4 < 0) return true;
  auto on_seg = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) - 1e-15 <= r.x && r.x <= std::max(p.x, q.x) + 1e-15 &&
           std::min(p.y, q.y) - 1e-15 <= r.y && r.y <= std::max(p.y, q.y) + 1e-15;
  };
  if (s1 == 0 && on_seg(c, d, a)) return true;
  if (s2 == 0 && on_seg(c, d, b)) return true;
  if (s3 == 0 && on_seg(a, b, c)) return true;
  if (s4 == 0 && on_seg(a, b, d)) return true;
  return false;
}

double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

BoundaryProjection closest_boundary_point(Point2 p, const Polygon& poly) {
  BoundaryProjection best{poly[0], std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 q = closest_point_on_segment(p, poly.edge_start(i), poly.edge_end(i));
    const double d = distance(p, q);
    if (d < best.distance) best = {q, d, i};
  }
  return best;
}

int winding_number(Point2 p, const Polygon& poly) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly.edge_start(i), b = poly.edge_end(i);
    if (a.y <= p.y) {
      if (b.y > p.y && orient(a, b, p) > 0) ++wn;
    } else if (b.y <= p.y && orient(a, b, p) < 0) {
      --wn;
    }
  }
  return wn;
}

bool point_in_polygon(Point2 p, const Polygon& poly) {
  require_nondegenerate(poly, "point_in_polygon");
  const double eps = 1e-12 * loop_scale(poly.vertices());
  bool inside = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly.edge_start(i), b = poly.edge_end(i);
    if (point_segment_distance(p, a, b) <= eps) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool segment_polygon_intersect(Point2 a, Point2 b, const Polygon& poly) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (segments_intersect(a, b, poly.edge_start(i), poly.edge_end(i))) return true;
  }
  return point_in_polygon(a, poly);
}

double polygon_boundary_distance(const Polygon& a, const Polygon& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      best = std::min(best, segment_segment_distance(a.edge_start(i), a.edge_end(i),
                                                     b.edge_start(j), b.edge_end(j)));
    }
  }
  return best;
}

bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Point2 a = poly.edge_start(i), b = poly.edge_end(i);
      const Point2 c = poly.edge_start(j), d = poly.edge_end(j);
      if (adjacent) {
        // Adjacent edges share one vertex; they may not fold back onto each other.
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 u = (j == i + 1) ? a : b;
        const Point2 w = (j == i + 1) ? d : c;
        if (std::abs(orient(shared, u, w)) <= 1e-18 && dot(u - shared, w - shared) > 0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

std::vector<Point2> resample_perimeter(const Polygon& poly, std::size_t n) {
  if (n < 3) throw GeometryError("resample_perimeter: n must be >= 3");
  const double perimeter = polygon_perimeter(poly);
  if (!(perimeter > 0.0)) throw GeometryError("resample_perimeter: zero perimeter");

  std::vector<double> cum(poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    cum[i + 1] = cum[i] + distance(poly.edge_start(i), poly.edge_end(i));
  }
  std::vector<Point2> out;
  out.reserve(n);
  std::size_t edge = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = perimeter * static_cast<double>(k) / static_cast<double>(n);
    while (edge + 1 < poly.size() && cum[edge + 1] <= s) ++edge;
    const double len = cum[edge + 1] - cum[edge];
    const double t = len > 0.0 ? (s - cum[edge]) / len : 0.0;
    const Point2 a = poly.edge_start(edge), b = poly.edge_end(edge);
    out.push_back(a + t * (b - a));
  }
  return out;
}

// --- Delaunay / alpha shape --------------------------------------------------

namespace {

constexpr std::size_t kGhost = 0xFFFFFFFFull;

struct Tri {
  std::array<std::size_t, 3> v;  // CCW; ghost (if any) always in slot 2
  bool alive = true;
};

Tri make_tri(std::size_t a, std::size_t b, std::size_t c) {
  // Rotate so that the ghost vertex, if present, is last.
  if (a == kGhost) return {{b, c, a}};
  if (b == kGhost) return {{c, a, b}};
  return {{a, b, c}};
}

bool in_circumcircle(const std::vector<Point2>& pts, const Tri& t, Point2 p) {
  if (t.v[2] == kGhost) {
    // Ghost triangle (u, v, g): the outside half-plane left of u->v, plus the open edge.
    const Point2 u = pts[t.v[0]], v = pts[t.v[1]];
    const double o = orient(u, v, p);
    const double scale = std::max(squared_norm(v - u), 1e-300);
    if (o > 1e-14 * scale) return true;
    if (o < -1e-14 * scale) return false;
    const double s = dot(p - u, v - u) / scale;
    return s > 0.0 && s < 1.0;
  }
  const Point2 a = pts[t.v[0]] - p, b = pts[t.v[1]] - p, c = pts[t.v[2]] - p;
  const double det = squared_norm(a) * cross(b, c) - squared_norm(b) * cross(a, c) +
                     squared_norm(c) * cross(a, b);
  return det > 0.0;
}

double circumradius(Point2 a, Point2 b, Point2 c) {
  const double la = distance(b, c), lb = distance(a, c), lc = distance(a, b);
  const double area2 = std::abs(orient(a, b, c));
  if (area2 == 0.0) return std::numeric_limits<double>::infinity();
  return la * lb * lc / (2.0 * area2);
}

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

std::vector<Triangle> delaunay_triangulation(std::span<const Point2> input) {
  // Deduplicate while remembering original indices.
  std::vector<std::size_t> order(input.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::tie(input[i].x, input[i].y, i) < std::tie(input[j].x, input[j].y, j);
  });
  std::vector<std::size_t> unique_ids;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && distance(input[order[k]], input[unique_ids.back()]) <= 1e-12) continue;
    unique_ids.push_back(order[k]);
  }
  std::sort(unique_ids.begin(), unique_ids.end());

  std::vector<Point2> pts(input.begin(), input.end());
  if (unique_ids.size() < 3) throw GeometryError("delaunay_triangulation: fewer than 3 points");

  // Seed with the first non-collinear triple.
  const std::size_t i0 = unique_ids[0], i1 = unique_ids[1];
  std::size_t i2 = kGhost;
  const double scale = loop_scale(pts);
  for (std::size_t k = 2; k < unique_ids.size(); ++k) {
    if (std::abs(orient(pts[i0], pts[i1], pts[unique_ids[k]])) > 1e-12 * scale * scale) {
      i2 = unique_ids[k];
      break;
    }
  }
  if (i2 == kGhost) throw GeometryError("delaunay_triangulation: all points collinear");

  std::vector<Tri> tris;
  std::size_t a = i0, b = i1, c = i2;
  if (orient(pts[a], pts[b], pts[c]) < 0) std::swap(b, c);
  tris.push_back(make_tri(a, b, c));
  tris.push_back(make_tri(b, a, kGhost));
  tris.push_back(make_tri(c, b, kGhost));
  tris.push_back(make_tri(a, c, kGhost));

  std::unordered_map<std::uint64_t, std::size_t> edge_owner;
  auto add_tri = [&](const Tri& t) {
    const std::size_t idx = tris.size();
    tris.push_back(t);
    for (int e = 0; e < 3; ++e) edge_owner[edge_key(t.v[e], t.v[(e + 1) % 3])] = idx;
  };
  {
    std::vector<Tri> seed;
    seed.swap(tris);
    for (const auto& t : seed) add_tri(t);
  }
  auto contains = [&](const Tri& t, Point2 p) {
    if (t.v[2] == kGhost) return in_circumcircle(pts, t, p);
    for (int e = 0; e < 3; ++e)
      if (orient(pts[t.v[e]], pts[t.v[(e + 1) % 3]], p) < 0.0) return false;
    return true;
  };

  for (std::size_t id : unique_ids) {
    if (id == i0 || id == i1 || id == i2) continue;
    const Point2 p = pts[id];
    std::size_t start = kGhost;
    for (std::size_t k = 0; k < tris.size(); ++k) {
      if (tris[k].alive && contains(tris[k], p)) {
        start = k;
        if (tris[k].v[2] != kGhost) break;
      }
    }
    if (start == kGhost) continue;

    // Grow the cavity through edge neighbours so it stays connected.
    std::vector<std::size_t> cavity{start};
    std::vector<char> in_cavity(tris.size(), 0);
    in_cavity[start] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const Tri t = tris[cavity[q]];
      for (int e = 0; e < 3; ++e) {
        const auto it = edge_owner.find(edge_key(t.v[(e + 1) % 3], t.v[e]));
        if (it == edge_owner.end() || in_cavity[it->second]) continue;
        if (!in_circumcircle(pts, tris[it->second], p)) continue;
        in_cavity[it->second] = 1;
        cavity.push_back(it->second);
      }
    }
    // Keep the cavity star-shaped from p: absorb neighbours behind invisible edges.
    std::vector<std::pair<std::size_t, std::size_t>> boundary;
    for (bool changed = true; changed;) {
      changed = false;
      boundary.clear();
      for (std::size_t q = 0; q < cavity.size() && !changed; ++q) {
        const Tri t = tris[cavity[q]];
        for (int e = 0; e < 3; ++e) {
          const std::size_t u = t.v[e], v = t.v[(e + 1) % 3];
          const auto it = edge_owner.find(edge_key(v, u));
          if (it != edge_owner.end() && in_cavity[it->second]) continue;
          if (u != kGhost && v != kGhost && orient(pts[u], pts[v], p) <= 0.0 &&
              it != edge_owner.end()) {
            in_cavity[it->second] = 1;
            cavity.push_back(it->second);
            changed = true;
            break;
          }
          boundary.emplace_back(u, v);
        }
      }
    }
    for (std::size_t k : cavity) {
      tris[k].alive = false;
      for (int e = 0; e < 3; ++e) {
        const auto key = edge_key(tris[k].v[e], tris[k].v[(e + 1) % 3]);
        const auto it = edge_owner.find(key);
        if (it != edge_owner.end() && it->second == k) edge_owner.erase(it);
      }
    }
    for (const auto& [u, v] : boundary) add_tri(make_tri(u, v, id));
  }
  std::erase_if(tris, [](const Tri& t) { return !t.alive; });

  std::vector<Triangle> out;
  for (const auto& t : tris) {
    if (t.v[2] != kGhost) out.push_back({t.v[0], t.v[1], t.v[2]});
  }
  return out;
}

Polygon alpha_shape(std::span<const Point2> points, double alpha) {
  if (points.size() < 3) throw GeometryError("alpha_shape: fewer than 3 points");
  const auto tris = delaunay_triangulation(points);

  std::vector<Triangle> kept;
  for (const auto& t : tris) {
    if (circumradius(points[t.a], points[t.b], points[t.c]) < alpha) kept.push_back(t);
  }
  if (kept.empty()) throw GeometryError("alpha_shape: alpha too small, no triangle survives");

  // Edge-adjacency components.
  std::unordered_map<std::uint64_t, std::size_t> owner;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& t = kept[i];
    owner[edge_key(t.a, t.b)] = i;
    owner[edge_key(t.b, t.c)] = i;
    owner[edge_key(t.c, t.a)] = i;
  }
  std::vector<std::size_t> comp(kept.size(), kGhost);
  std::vector<double> comp_area;
  for (std::size_t s = 0; s < kept.size(); ++s) {
    if (comp[s] != kGhost) continue;
    const std::size_t cid = comp_area.size();
    comp_area.push_back(0.0);
    std::vector<std::size_t> stack{s};
    comp[s] = cid;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const auto& t = kept[i];
      comp_area[cid] += 0.5 * orient(points[t.a], points[t.b], points[t.c]);
      for (auto [u, v] : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}}) {
        auto it = owner.find(edge_key(v, u));
        if (it != owner.end() && comp[it->second] == kGhost) {
          comp[it->second] = cid;
          stack.push_back(it->second);
        }
      }
    }
  }
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(comp_area.begin(), comp_area.end()) - comp_area.begin());

  // Directed boundary edges of the chosen component.
  std::multimap<std::size_t, std::size_t> next;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (comp[i] != best) continue;
    const auto& t = kept[i];
    for (auto [u, v] : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}}) {
      auto it = owner.find(edge_key(v, u));
      if (it == owner.end() || comp[it->second] != best) next.emplace(u, v);
    }
  }

  // Trace loops; at pinch vertices take the sharpest right turn to hug the outside.
  std::vector<std::vector<Point2>> loops;
  while (!next.empty()) {
    auto start_it = next.begin();
    const std::size_t start = start_it->first;
    std::size_t prev = start, cur = start_it->second;
    next.erase(start_it);
    std::vector<Point2> loop{points[start]};
    std::size_t guard = 0;
    while (cur != start && guard++ < points.size() * 4) {
      loop.push_back(points[cur]);
      auto [lo, hi] = next.equal_range(cur);
      if (lo == hi) break;
      auto chosen = lo;
      if (std::next(lo) != hi) {
        const Point2 in = points[cur] - points[prev];
        double best_angle = std::numeric_limits<double>::infinity();
        for (auto it = lo; it != hi; ++it) {
          const Point2 out = points[it->second] - points[cur];
          const double ang = std::atan2(cross(in, out), dot(in, out));
          if (ang < best_angle) {
            best_angle = ang;
            chosen = it;
          }
        }
      }
      prev = cur;
      cur = chosen->second;
      next.erase(chosen);
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  if (loops.empty()) throw GeometryError("alpha_shape: no boundary loop");
  auto outer = std::max_element(loops.begin(), loops.end(), [](const auto& l, const auto& r) {
    return signed_area(l) < signed_area(r);
  });

  // Drop collinear vertices.
  std::vector<Point2> loop = *outer;
  const double tol = 1e-12 * loop_scale(loop) * loop_scale(loop);
  bool changed = true;
  while (changed && loop.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < loop.size() && loop.size() > 3; ++i) {
      const Point2 p = loop[(i + loop.size() - 1) % loop.size()], q = loop[i],
                   r = loop[(i + 1) % loop.size()];
      if (std::abs(orient(p, q, r)) <= tol && dot(q - p, r - q) >= 0.0) {
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  return Polygon(std::move(loop));
}

// --- area measures -----------------------------------------------------------

namespace {

// Marks cells of `row` whose centers lie inside `poly` (even-odd rule).
void rasterize_row(const Polygon& poly, double y, double x0, double cell, int res,
                   std::vector<char>& row) {
  std::vector<double> xs;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly.edge_start(i), b = poly.edge_end(i);
    if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
    const int lo = std::max(0, static_cast<int>(std::ceil((xs[k] - x0) / cell - 0.5)));
    const int hi = std::min(res - 1, static_cast<int>(std::floor((xs[k + 1] - x0) / cell - 0.5)));
    for (int c = lo; c <= hi; ++c) row[static_cast<std::size_t>(c)] = 1;
  }
}

}  // namespace

double polygon_iou(const Polygon& a, const Polygon& b, int resolution) {
  require_nondegenerate(a, "polygon_iou");
  require_nondegenerate(b, "polygon_iou");
  if (resolution < 1) throw GeometryError("polygon_iou: resolution must be positive");
  const auto ba = bounding_box(a), bb = bounding_box(b);
  const double x0 = std::min(ba.x_min, bb.x_min), y0 = std::min(ba.y_min, bb.y_min);
  const double x1 = std::max(ba.x_max, bb.x_max), y1 = std::max(ba.y_max, bb.y_max);
  const double cw = (x1 - x0) / resolution, ch = (y1 - y0) / resolution;
  std::vector<char> ra(static_cast<std::size_t>(resolution)), rb(ra.size());
  long inter = 0, uni = 0;
  for (int r = 0; r < resolution; ++r) {
    const double y = y0 + (r + 0.5) * ch;
    std::fill(ra.begin(), ra.end(), 0);
    std::fill(rb.begin(), rb.end(), 0);
    rasterize_row(a, y, x0, cw, resolution, ra);
    rasterize_row(b, y, x0, cw, resolution, rb);
    for (std::size_t c = 0; c < ra.size(); ++c) {
      inter += (ra[c] && rb[c]);
      uni += (ra[c] || rb[c]);
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Polygon offset_polygon(const Polygon& poly, double dist, double miter_limit) {
  if (dist == 0.0) return poly;
  const std::size_t n = poly.size();
  auto outward = [&](std::size_t i) {
    const Point2 e = poly.edge_end(i) - poly.edge_start(i);
    const double len = norm(e);
    return Point2{e.y / len, -e.x / len};
  };
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 n_prev = outward((i + n - 1) % n), n_next = outward(i);
    Point2 m = n_prev + n_next;
    double len = norm(m);
    if (len < 1e-12) {
      m = perp(n_next);
      len = 1.0;
    }
    m = (1.0 / len) * m;
    const double c = dot(m, n_next);
    double reach = c > 1e-12 ? dist / c : miter_limit * std::abs(dist);
    reach = std::clamp(reach, -miter_limit * std::abs(dist), miter_limit * std::abs(dist));
    out.push_back(poly[i] + reach * m);
  }
  return Polygon(std::move(out));
}

Point2 pole_of_inaccessibility(const Polygon& poly, int grid) {
  require_nondegenerate(poly, "pole_of_inaccessibility");
  const auto bb = bounding_box(poly);
  double cx = 0.5 * (bb.x_min + bb.x_max), cy = 0.5 * (bb.y_min + bb.y_max);
  double hw = 0.5 * (bb.x_max - bb.x_min), hh = 0.5 * (bb.y_max - bb.y_min);
  Point2 best{};
  double best_d = -1.0;
  for (int round = 0; round < 4; ++round) {
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const Point2 p{cx - hw + (2.0 * hw) * (i + 0.5) / grid, cy - hh + (2.0 * hh) * (j + 0.5) / grid};
        if (!point_in_polygon(p, poly)) continue;
        const double d = closest_boundary_point(p, poly).distance;
        if (d > best_d) {
          best_d = d;
          best = p;
        }
      }
    }
    if (best_d < 0.0) throw GeometryError("pole_of_inaccessibility: no interior sample");
    cx = best.x;
    cy = best.y;
    hw *= 4.0 / grid;
    hh *= 4.0 / grid;
  }
  return best;
}

Dome hemisphere(Point2 center, double radius) { return Dome{center, radius, radius, radius}; }

std::optional<double> raycast_down(double x, double y, const ShapeVolume& volume) {
  const Point2 p{x, y};
  return std::visit(
      [&](const auto& v) -> std::optional<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Prism>) {
          if (!point_in_polygon(p, v.footprint)) return std::nullopt;
          for (const auto& hole : v.holes) {
            if (point_in_polygon(p, hole)) return std::nullopt;
          }
          return v.height;
        } else if constexpr (std::is_same_v<T, Dome>) {
          const double dx = (x - v.center.x) / v.rx, dy = (y - v.center.y) / v.ry;
          const double q = dx * dx + dy * dy;
          if (q > 1.0) return std::nullopt;
          return v.height * std::sqrt(1.0 - q);
        } else {
          if (!point_in_polygon(p, v.footprint)) return std::nullopt;
          return std::max(0.0, v.base + dot(v.slope, p - v.origin));
        }
      },
      volume);
}

}  // namespace tactile
