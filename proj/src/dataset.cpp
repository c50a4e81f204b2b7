#include "tactile/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tactile/fixtures.hpp"
#include "tactile/policy.hpp"

namespace tactile {

namespace {

constexpr double kPi = 3.14159265358979323846;

Polygon transform(const Polygon& poly, double sx, double sy) {
  std::vector<Point2> v;
  for (const auto& p : poly.vertices()) v.push_back({p.x * sx, p.y * sy});
  return Polygon(std::move(v));
}

Polygon centered(const Polygon& poly) {
  const Point2 c = polygon_centroid(poly);
  std::vector<Point2> v;
  for (const auto& p : poly.vertices()) v.push_back(p - c);
  return Polygon(std::move(v));
}

}  // namespace

const std::vector<ShapeClass>& all_shape_classes() {
  static const std::vector<ShapeClass> all{ShapeClass::Circle,    ShapeClass::Square,
                                           ShapeClass::Triangle,  ShapeClass::Pentagram,
                                           ShapeClass::LShape,    ShapeClass::SShape,
                                           ShapeClass::SplitRing, ShapeClass::Ellipse};
  return all;
}

std::string shape_class_name(ShapeClass c) {
  switch (c) {
    case ShapeClass::Circle: return "circle";
    case ShapeClass::Square: return "square";
    case ShapeClass::Triangle: return "triangle";
    case ShapeClass::Pentagram: return "pentagram";
    case ShapeClass::LShape: return "l-shape";
    case ShapeClass::SShape: return "s-shape";
    case ShapeClass::SplitRing: return "split-ring";
    case ShapeClass::Ellipse: return "ellipse";
  }
  return "?";
}

ShapeClass parse_shape_class(const std::string& name) {
  for (auto c : all_shape_classes()) {
    if (shape_class_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown shape class '" + name + "'");
}

double ShapeInstance::height_at(Point2 p) const {
  const Point2 local = rotate(p, -rotation);
  const auto z = raycast_down(local.x, local.y, volume);
  return z ? *z : 0.0;
}

ShapeInstance make_shape(ShapeClass c, double noise, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };
  const double s = uniform(0.5, 1.5);
  const double aspect = uniform(0.7, 1.3);

  // Prism heights differ by class (in units of the scale), so that probes carry
  // information beyond the outline.
  double height = 0.0;
  Polygon local;
  bool dome = false;
  double rx = 0.0, ry = 0.0;
  switch (c) {
    case ShapeClass::Circle:
      rx = ry = 0.5 * s;
      local = circle_polygon({0, 0}, rx, 128);
      dome = true;
      break;
    case ShapeClass::Ellipse:
      rx = 0.5 * s;
      ry = rx * uniform(0.45, 0.65);
      local = ellipse_polygon({0, 0}, rx, ry, 128);
      dome = true;
      break;
    case ShapeClass::Square:
      local = rectangle({-0.45 * s, -0.45 * s * aspect}, {0.45 * s, 0.45 * s * aspect});
      height = s * uniform(0.15, 0.3);
      break;
    case ShapeClass::Triangle:
      local = transform(regular_polygon({0, 0}, 0.55 * s, 3, kPi / 2.0), 1.0, aspect);
      height = s * uniform(0.3, 0.45);
      break;
    case ShapeClass::Pentagram:
      local = transform(pentagram({0, 0}, 0.55 * s, kPi / 2.0), 1.0, aspect);
      height = s * uniform(0.45, 0.6);
      break;
    case ShapeClass::LShape:
      local = centered(l_shape({0, 0}, s, s * aspect, 0.3 * s));
      height = s * uniform(0.6, 0.75);
      break;
    case ShapeClass::SShape:
      local = centered(s_shape({0, 0}, 0.8 * s, s * aspect, 0.22 * s));
      height = s * uniform(0.75, 0.9);
      break;
    case ShapeClass::SplitRing:
      local = transform(c_shape({0, 0}, 0.3 * s, 0.5 * s, 0.9, 48), 1.0, aspect);
      height = s * uniform(0.3, 0.45);
      break;
  }

  if (noise > 0.0) {
    // Smooth random displacement field, so dense outlines stay simple.
    struct Wave {
      Point2 k;
      double phase, ax, ay;
    };
    std::vector<Wave> waves;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 3; ++i) {
      const double len = uniform(0.5, 1.0) * s, dir = uniform(0.0, 2.0 * kPi);
      waves.push_back({(2.0 * kPi / len) * Point2{std::cos(dir), std::sin(dir)},
                       uniform(0.0, 2.0 * kPi), gauss(rng), gauss(rng)});
    }
    std::vector<Point2> v;
    for (const auto& p : local.vertices()) {
      Point2 d{0.0, 0.0};
      for (const auto& w : waves) {
        const double c = std::sin(dot(w.k, p) + w.phase);
        d = d + Point2{w.ax * c, w.ay * c};
      }
      v.push_back(p + (noise * s / std::sqrt(3.0)) * d);
    }
    local = Polygon(std::move(v));
  }

  ShapeInstance inst;
  inst.rotation = uniform(0.0, 2.0 * kPi);
  if (dome) {
    const double h = c == ShapeClass::Circle ? rx * uniform(0.9, 1.0) : ry * uniform(0.4, 0.6);
    inst.volume = Dome{{0, 0}, rx, ry, h};
  } else {
    inst.volume = Prism{local, height, {}};
  }
  std::vector<Point2> world;
  for (const auto& p : local.vertices()) world.push_back(rotate(p, inst.rotation));
  inst.footprint = Polygon(std::move(world));
  return inst;
}

PointSetSample sample_from_shape(const ShapeInstance& shape, int label, int k_fs, Rng& rng) {
  const auto bb = bounding_box(shape.footprint);
  const double size = std::max(bb.x_max - bb.x_min, bb.y_max - bb.y_min);
  const double spacing = 0.03 * size;

  // Projected surface vertices: the footprint outline plus a top-face grid.
  std::vector<Point2> cloud = shape.footprint.vertices();
  for (const auto& p : resample_perimeter(shape.footprint, 200)) cloud.push_back(p);
  for (double y = bb.y_min + spacing / 2; y < bb.y_max; y += spacing) {
    for (double x = bb.x_min + spacing / 2; x < bb.x_max; x += spacing) {
      const Point2 p{x, y};
      if (point_in_polygon(p, shape.footprint) &&
          closest_boundary_point(p, shape.footprint).distance > 0.25 * spacing) {
        cloud.push_back(p);
      }
    }
  }
  const Polygon hull = alpha_shape(cloud, 2.0 * spacing);

  PointSetSample out;
  out.label = label;
  for (const auto& p : resample_perimeter(hull, kContourPoints)) out.contour.push_back({p.x, p.y, 0.0});
  if (k_fs > 0) {
    for (const auto& p : place_probes(hull, k_fs, rng)) out.probes.push_back({p.x, p.y, shape.height_at(p)});
  }
  return out;
}

void normalize_sample(PointSetSample& sample) {
  if (sample.contour.empty()) return;
  double cx = 0.0, cy = 0.0;
  for (const auto& p : sample.contour) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(sample.contour.size());
  cy /= static_cast<double>(sample.contour.size());
  double r = 0.0;
  for (const auto& p : sample.contour) r = std::max(r, std::hypot(p.x - cx, p.y - cy));
  if (r <= 0.0) r = 1.0;
  auto apply = [&](Point3& p) { p = {(p.x - cx) / r, (p.y - cy) / r, p.z / r}; };
  for (auto& p : sample.contour) apply(p);
  for (auto& p : sample.probes) apply(p);
}

std::vector<PointSetSample> generate_dataset(const DatasetOptions& options) {
  if (options.per_class < 1) throw std::invalid_argument("generate_dataset: per_class must be >= 1");
  if (options.k_fs < 0) throw std::invalid_argument("generate_dataset: k_fs must be >= 0");
  if (options.classes.empty()) throw std::invalid_argument("generate_dataset: no classes");
  Rng rng(options.seed);
  std::vector<PointSetSample> out;
  for (std::size_t label = 0; label < options.classes.size(); ++label) {
    for (int i = 0; i < options.per_class; ++i) {
      const auto shape = make_shape(options.classes[label], options.noise, rng);
      auto sample = sample_from_shape(shape, static_cast<int>(label), options.k_fs, rng);
      normalize_sample(sample);
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::vector<PointSetSample> without_probes(const std::vector<PointSetSample>& samples) {
  auto out = samples;
  for (auto& s : out) s.probes.clear();
  return out;
}

void write_dataset(const std::vector<PointSetSample>& samples, std::ostream& out) {
  char buf[128];
  for (const auto& s : samples) {
    out << s.label << ';';
    for (const auto& p : s.contour) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g", p.x, p.y);
      out << buf;
    }
    out << ';';
    for (const auto& p : s.probes) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g", p.x, p.y, p.z);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<PointSetSample> read_dataset(std::istream& in) {
  std::vector<PointSetSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto a = line.find(';');
    const auto b = a == std::string::npos ? a : line.find(';', a + 1);
    if (b == std::string::npos) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": expected 3 fields");
    }
    PointSetSample s;
    std::istringstream label(line.substr(0, a)), contour(line.substr(a + 1, b - a - 1)),
        probes(line.substr(b + 1));
    if (!(label >> s.label)) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": bad label");
    }
    const auto numbers = [&](std::istringstream& f, std::size_t arity, const char* what) {
      std::vector<double> v;
      double x;
      while (f >> x) v.push_back(x);
      if (!f.eof() || v.size() % arity != 0) {
        throw std::runtime_error("dataset line " + std::to_string(line_no) + ": bad " + what);
      }
      return v;
    };
    const auto c = numbers(contour, 2, "contour");
    for (std::size_t i = 0; i < c.size(); i += 2) s.contour.push_back({c[i], c[i + 1], 0.0});
    const auto q = numbers(probes, 3, "probes");
    for (std::size_t i = 0; i < q.size(); i += 3) s.probes.push_back({q[i], q[i + 1], q[i + 2]});
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tactile
