#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/geometry.hpp"

namespace tactile {

struct TaskSpace {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }
  [[nodiscard]] bool contains(Point2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  [[nodiscard]] Point2 clamp(Point2 p) const;
};

struct SceneObject {
  int id = 0;
  Polygon polygon;
  std::optional<ShapeVolume> volume;
};

struct Scene {
  TaskSpace task_space;
  std::vector<SceneObject> objects;
  /// Set by load_scene when the isolation check fails at the requested d_s.
  bool isolation_warning = false;
};

struct ContactReport {
  bool in_contact = false;
  Point2 contact_point;
  Point2 contact_normal;  // unit, pointing away from the object surface
  int object_id = -1;
};

/// Malformed scene file. `line` is 1-based; 0 when the error is not tied to a line.
class SceneParseError : public std::runtime_error {
 public:
  SceneParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

constexpr double kDefaultContactRadius = 0.005;

/// True iff every pair of object boundaries is farther apart than d_s.
bool validate_isolation(const Scene& scene, double d_s);

/// Smallest boundary distance over all object pairs (infinity for < 2 objects).
double min_pairwise_distance(const Scene& scene);

/// Throws GeometryError if the task space is empty or an object leaves it.
void check_scene(const Scene& scene);

ContactReport query_contact(const Scene& scene, Point2 sensor_pos,
                            double contact_radius = kDefaultContactRadius);

/// True iff p lies inside (or on) any object polygon.
bool occupied(const Scene& scene, Point2 p);

Scene parse_scene(const std::string& text, double d_s);
std::string format_scene(const Scene& scene);
Scene load_scene(const std::filesystem::path& path, double d_s);
void save_scene(const Scene& scene, const std::filesystem::path& path);

}  // namespace tactile
