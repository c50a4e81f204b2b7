#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tactile/ctnet.hpp"
#include "tactile/geometry.hpp"
#include "tactile/tos.hpp"

namespace tactile {

enum class ShapeClass { Circle, Square, Triangle, Pentagram, LShape, SShape, SplitRing, Ellipse };

inline constexpr int kContourPoints = 64;

const std::vector<ShapeClass>& all_shape_classes();
std::string shape_class_name(ShapeClass c);
ShapeClass parse_shape_class(const std::string& name);

struct ShapeInstance {
  Polygon footprint;   // world frame
  ShapeVolume volume;  // local frame
  double rotation = 0.0;

  /// Surface height above a world point, 0 where the ray misses.
  [[nodiscard]] double height_at(Point2 p) const;
};

/// Randomized instance: scale in [0.5, 1.5], aspect in [0.7, 1.3] (circles stay round,
/// ellipses use their own elongated range), random orientation, footprint vertex
/// jitter of `noise` times the scale.
ShapeInstance make_shape(ShapeClass c, double noise, Rng& rng);

/// Projected surface vertices (boundary and top-face samples) -> alpha shape ->
/// 64 perimeter points; probes by raycasting at place_probes locations. Not normalized.
PointSetSample sample_from_shape(const ShapeInstance& shape, int label, int k_fs, Rng& rng);

/// Translates the contour centroid to the origin and divides all coordinates by the
/// largest contour point radius.
void normalize_sample(PointSetSample& sample);

struct DatasetOptions {
  std::vector<ShapeClass> classes = all_shape_classes();
  int per_class = 50;
  int k_fs = 1;
  double noise = 0.02;
  std::uint64_t seed = 0;
};

/// Samples ordered by class then index; labels are positions in `classes`.
std::vector<PointSetSample> generate_dataset(const DatasetOptions& options);

/// Copy with the probe points removed (contour-only ablation).
std::vector<PointSetSample> without_probes(const std::vector<PointSetSample>& samples);

/// One sample per line: `label; x y x y ...; x y z x y z ...`.
void write_dataset(const std::vector<PointSetSample>& samples, std::ostream& out);
std::vector<PointSetSample> read_dataset(std::istream& in);

}  // namespace tactile
