#include "tactile/scene.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace tactile {

namespace {

Point2 edge_outward_normal(const Polygon& poly, std::size_t edge) {
  const Point2 e = poly.edge_end(edge) - poly.edge_start(edge);
  const double len = norm(e);
  return {e.y / len, -e.x / len};
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, int line, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw SceneParseError("line " + std::to_string(line) + ": field '" + field +
                              "': expected a number, got '" + tok + "'",
                          line);
  }
  return v;
}

std::vector<Point2> parse_vertices(const std::vector<std::string>& toks, std::size_t first,
                                   int line) {
  const std::size_t count = toks.size() - first;
  if (count % 2 != 0 || count < 6) {
    throw SceneParseError("line " + std::to_string(line) +
                              ": field 'polygon': need at least 3 x/y pairs",
                          line);
  }
  std::vector<Point2> pts;
  for (std::size_t k = first; k < toks.size(); k += 2) {
    const std::string idx = std::to_string((k - first) / 2);
    pts.push_back({parse_number(toks[k], line, "polygon x" + idx),
                   parse_number(toks[k + 1], line, "polygon y" + idx)});
  }
  return pts;
}

}  // namespace

Point2 TaskSpace::clamp(Point2 p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

double min_pairwise_distance(const Scene& scene) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.objects.size(); ++j) {
      best = std::min(best, polygon_boundary_distance(scene.objects[i].polygon,
                                                      scene.objects[j].polygon));
    }
  }
  return best;
}

bool validate_isolation(const Scene& scene, double d_s) {
  return min_pairwise_distance(scene) > d_s;
}

void check_scene(const Scene& scene) {
  const auto& ts = scene.task_space;
  if (!(ts.x_min < ts.x_max) || !(ts.y_min < ts.y_max)) {
    throw GeometryError("scene: empty task space");
  }
  std::set<int> ids;
  for (const auto& obj : scene.objects) {
    if (!ids.insert(obj.id).second) {
      throw GeometryError("scene: duplicate object id " + std::to_string(obj.id));
    }
    for (const auto& v : obj.polygon.vertices()) {
      if (!(v.x > ts.x_min && v.x < ts.x_max && v.y > ts.y_min && v.y < ts.y_max)) {
        throw GeometryError("scene: object " + std::to_string(obj.id) +
                            " is not strictly inside the task space");
      }
    }
  }
}

ContactReport query_contact(const Scene& scene, Point2 sensor_pos, double contact_radius) {
  ContactReport best;
  double best_signed = std::numeric_limits<double>::infinity();
  BoundaryProjection best_proj;
  const SceneObject* best_obj = nullptr;
  for (const auto& obj : scene.objects) {
    const auto proj = closest_boundary_point(sensor_pos, obj.polygon);
    const bool inside = point_in_polygon(sensor_pos, obj.polygon);
    const double signed_dist = inside ? -proj.distance : proj.distance;
    if (signed_dist > contact_radius) continue;
    if (signed_dist < best_signed || (signed_dist == best_signed && obj.id < best.object_id)) {
      best_signed = signed_dist;
      best_proj = proj;
      best_obj = &obj;
      best.object_id = obj.id;
    }
  }
  if (best_obj == nullptr) return {};

  best.in_contact = true;
  best.contact_point = best_proj.point;
  const Point2 away = sensor_pos - best_proj.point;
  const double d = norm(away);
  if (d > 1e-12) {
    best.contact_normal = (best_signed < 0.0 ? -1.0 : 1.0) * (1.0 / d) * away;
  } else {
    best.contact_normal = edge_outward_normal(best_obj->polygon, best_proj.edge);
  }
  return best;
}

bool occupied(const Scene& scene, Point2 p) {
  return std::any_of(scene.objects.begin(), scene.objects.end(),
                     [&](const SceneObject& o) { return point_in_polygon(p, o.polygon); });
}

Scene parse_scene(const std::string& text, double d_s) {
  Scene scene;
  bool have_task_space = false;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (toks[0] == "taskspace") {
      if (toks.size() != 5) {
        throw SceneParseError(where + "field 'taskspace': expected 4 numbers", line_no);
      }
      scene.task_space = {parse_number(toks[1], line_no, "taskspace x_min"),
                          parse_number(toks[2], line_no, "taskspace y_min"),
                          parse_number(toks[3], line_no, "taskspace x_max"),
                          parse_number(toks[4], line_no, "taskspace y_max")};
      have_task_space = true;
    } else if (toks[0] == "object") {
      if (toks.size() < 3) {
        throw SceneParseError(where + "field 'object': missing id or shape kind", line_no);
      }
      SceneObject obj;
      const double id = parse_number(toks[1], line_no, "object id");
      if (id != std::floor(id)) {
        throw SceneParseError(where + "field 'object id': expected an integer", line_no);
      }
      obj.id = static_cast<int>(id);
      std::size_t first = 0;
      std::optional<double> height;
      if (toks[2] == "polygon") {
        first = 3;
      } else if (toks[2] == "prism") {
        if (toks.size() < 4 || toks[3] == "polygon") {
          throw SceneParseError(where + "field 'prism height': missing", line_no);
        }
        height = parse_number(toks[3], line_no, "prism height");
        if (toks.size() < 5 || toks[4] != "polygon") {
          throw SceneParseError(where + "field 'polygon': expected keyword after prism height",
                                line_no);
        }
        first = 5;
      } else {
        throw SceneParseError(where + "field 'object kind': unknown '" + toks[2] + "'",
                              line_no);
      }
      try {
        obj.polygon = Polygon(parse_vertices(toks, first, line_no));
      } catch (const GeometryError& e) {
        throw SceneParseError(where + "field 'polygon': " + e.what(), line_no);
      }
      if (height) obj.volume = Prism{obj.polygon, *height, {}};
      scene.objects.push_back(std::move(obj));
    } else {
      throw SceneParseError(where + "unknown record '" + toks[0] + "'", line_no);
    }
  }
  if (!have_task_space) throw SceneParseError("missing field 'taskspace'", 0);
  try {
    check_scene(scene);
  } catch (const GeometryError& e) {
    throw SceneParseError(e.what(), 0);
  }
  scene.isolation_warning = !validate_isolation(scene, d_s);
  return scene;
}

std::string format_scene(const Scene& scene) {
  std::ostringstream out;
  out << std::setprecision(17);
  const auto& ts = scene.task_space;
  out << "taskspace " << ts.x_min << ' ' << ts.y_min << ' ' << ts.x_max << ' ' << ts.y_max
      << '\n';
  for (const auto& obj : scene.objects) {
    out << "object " << obj.id;
    if (obj.volume && std::holds_alternative<Prism>(*obj.volume)) {
      out << " prism " << std::get<Prism>(*obj.volume).height;
    }
    out << " polygon";
    for (const auto& v : obj.polygon.vertices()) out << ' ' << v.x << ' ' << v.y;
    out << '\n';
  }
  return out.str();
}

Scene load_scene(const std::filesystem::path& path, double d_s) {
  std::ifstream in(path);
  if (!in) throw SceneParseError("cannot open scene file " + path.string(), 0);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scene(buf.str(), d_s);
  } catch (const SceneParseError& e) {
    throw SceneParseError(path.string() + ": " + e.what(), e.line());
  }
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file " + path.string());
  out << format_scene(scene);
}

}  // namespace tactile
