#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/gpr.hpp"
#include "tactile/hopf.hpp"
#include "tactile/scene.hpp"
#include "tactile/tos.hpp"

namespace tactile {

enum class Mode { ObjectSearching, ContourTracing, FeatureSampling, Done };
const char* mode_name(Mode m);

enum class SensorModel { GroundTruth, Filtered };

struct PolicyParams {
  HopfParams hopf;
  TosParams tos;
  BounceMode bounce = BounceMode::Directed;
  SensorModel sensor = SensorModel::GroundTruth;
  double contact_radius = kDefaultContactRadius;
  double lengthscale = kDefaultLengthscale;
  double gp_noise = kDefaultGpNoise;
  /// Clearance added around extracted contours; negative means contact_radius + r_H / 2.
  double dilation = -1.0;
  double obs_spacing = 0.04;         // free-space observation spacing along paths (m)
  double termination_sigma = 0.2;    // stop when max free-grid sigma drops below this
  int termination_grid = 50;
  int metric_grid = 100;
  int contour_samples = 200;
  int k_fs = 1;
  double os_speed = 0.1;  // m/s, only used for log timestamps
  std::size_t trace_max_steps = 20000;
  std::optional<Point2> start;  // default: 0.05 in from the lower-left corner

  [[nodiscard]] double effective_dilation() const;
  [[nodiscard]] Point2 start_position(const TaskSpace& ts) const;
};

struct ContactRecord {
  double t = 0.0;
  Point2 point;
  Point2 normal;
  int object_id = -1;  // ground-truth id, for evaluation only
  Mode mode = Mode::ObjectSearching;
};

struct Transition {
  double t = 0.0;
  Mode from = Mode::ObjectSearching;
  Mode to = Mode::ObjectSearching;
};

struct CycleMetrics {
  int cycle = 0;
  double t = 0.0;
  double travel = 0.0;
  double scene_uncertainty = 0.0;
  double contour_uncertainty = 0.0;
};

struct ExtractedObject {
  double t = 0.0;  // time the contour was extracted
  Polygon polygon;
  std::vector<Point2> contacts;
  bool closed = false;
  int truth_id = -1;  // majority ground-truth id of the contacts
  std::vector<Point3> probes;
};

struct EpisodeLog {
  std::string policy;
  std::uint64_t seed = 0;
  double budget = 0.0;
  std::vector<TrajectorySample> trajectory;
  std::vector<ContactRecord> contacts;
  std::vector<Transition> transitions;
  std::vector<CycleMetrics> metrics;
  std::vector<ExtractedObject> objects;
  /// Contact sequences of contour traces that ended with fewer than 3 contacts.
  std::vector<std::vector<Point2>> point_detections;
  std::vector<Observation> observations;
  std::vector<double> observation_times;
  GpOccupancyModel gp;
  double travel_distance = 0.0;
  std::string end_reason;

  /// Line-delimited records: `<event> <t> <payload...>`.
  void write(std::ostream& out) const;
  /// Parses the output of write(); the GP is refit on the logged observations.
  /// Throws std::runtime_error with the line number on malformed input.
  static EpisodeLog read(std::istream& in);
  void write_trajectory_csv(std::ostream& out) const;
  void write_contacts_csv(std::ostream& out) const;
  /// One row per distinct travel distance (the latest cycle at that distance).
  void write_metrics_csv(std::ostream& out) const;
  void write_contours(std::ostream& out) const;

  /// Time at which the trajectory's path length first reaches `distance` (the last
  /// sample time if it never does).
  [[nodiscard]] double time_at_travel(double distance) const;
  /// The episode as it stood at time t: records up to t and the GP refit on the
  /// observations made by then.
  [[nodiscard]] EpisodeLog snapshot(double t) const;
};

EpisodeLog run_episode(const Scene& scene, const PolicyParams& params, double budget,
                       std::uint64_t seed);
EpisodeLog run_baseline_pure_os(const Scene& scene, const PolicyParams& params, double budget,
                                std::uint64_t seed);
EpisodeLog run_baseline_line_sweep(const Scene& scene, const PolicyParams& params,
                                   double budget, std::uint64_t seed);

/// Polygon through the contacts in trace order. Throws GeometryError for < 3 contacts.
Polygon extract_contour(const std::vector<Point2>& contacts);

/// Centroid first (pole of inaccessibility when the centroid is outside), then
/// k_fs - 1 uniform interior points.
std::vector<Point2> place_probes(const Polygon& contour, int k_fs, Rng& rng);

/// Vertical probe heights at the probe locations; 0 where nothing is hit.
std::vector<Point3> feature_sample(const Scene& scene, const Polygon& contour, int k_fs, Rng& rng);
std::vector<Point3> raycast_probes(const Scene& scene, const std::vector<Point2>& probes);

/// Mean posterior std over a grid_n x grid_n midpoint grid of the task space.
double scene_uncertainty(const GpOccupancyModel& gp, const TaskSpace& ts, int grid_n = 100);

/// Arc-length weighted mean posterior std over the contours' perimeters.
double contour_uncertainty(const GpOccupancyModel& gp, const std::vector<Polygon>& contours,
                           int samples_per_contour = 200);

/// Area labelled as known: grid cells crossed by the sensor trajectory (outside the
/// extracted contours) plus the area enclosed by the extracted contours.
double known_area(const EpisodeLog& log, const TaskSpace& ts, int grid_n = 100);

/// GP heatmap CSV `x,y,mean,std` over a grid_n x grid_n midpoint grid.
void write_heatmap_csv(const GpOccupancyModel& gp, const TaskSpace& ts, int grid_n,
                       std::ostream& out);

}  // namespace tactile
