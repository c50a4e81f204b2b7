#pragma once

#include <limits>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/scene.hpp"

namespace tactile {

struct HopfParams {
  double r_h = 0.025;   // limit-cycle radius (m)
  double gamma = 10.0;  // convergence ratio, applied to the normalized radius
  double f_h = 0.5;     // Hz
  double dt = 0.01;     // s

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  [[nodiscard]] double omega() const;
  /// Per-step displacement cap used while tracing.
  [[nodiscard]] double max_step() const;
};

struct HopfState {
  Point2 center;
  Point2 sensor;
};

/// Time derivative of the sensor offset (sensor - center):
/// radial term gamma * (1 - |r|^2 / r_h^2) * r plus rotation at 2 pi f_h.
Point2 hopf_velocity(Point2 offset, const HopfParams& params);

/// One RK4 step; returns the new sensor position. The center is unchanged.
Point2 step(const HopfState& state, const HopfParams& params);

/// Reflects the center through the contact point: 2 p - c.
Point2 recenter_binary(const HopfState& state, Point2 contact_point);

/// Center placed at sensor + r_h * (z x c) for the unit contact direction c.
Point2 recenter_directed(const HopfState& state, Point2 contact_dir, double r_h);

enum class BounceMode { Directed, Binary };

struct TraceConfig {
  BounceMode mode = BounceMode::Directed;
  double contact_radius = kDefaultContactRadius;
  std::size_t max_steps = 20000;
  /// Closure: back within closure_factor * r_h of the first contact after the
  /// path is longer than min_arc_factor * r_h.
  double closure_factor = 1.5;
  double min_arc_factor = 4.0;
  /// A loop needs at least this many contacts before it can close.
  std::size_t min_contacts = 3;
  /// Path-length cap; tracing stops unclosed once it is used up.
  double max_arc_length = std::numeric_limits<double>::infinity();
};

struct TrajectorySample {
  double t = 0.0;
  Point2 position;
  bool contact = false;
};

struct TraceResult {
  std::vector<Point2> contacts;  // boundary points, in trace order
  std::vector<ContactReport> reports;
  std::vector<TrajectorySample> trajectory;
  bool closed = false;
  double arc_length = 0.0;
  Point2 final_sensor;
};

/// Outcome of moving the sensor along a straight segment.
struct MoveResult {
  Point2 reached;        // last contact-free position
  bool blocked = false;  // true if a contact stopped the motion
  ContactReport contact;
};

/// Moves from `from` toward `to`, stopping (within 1e-6 m) before the first
/// position in contact. `from` is assumed contact-free.
MoveResult move_until_contact(const Scene& scene, Point2 from, Point2 to,
                              double contact_radius);

/// Oscillator-driven contour tracing starting from a contact made at `sensor`.
TraceResult trace_contour(const Scene& scene, Point2 sensor, const ContactReport& start_contact,
                          const HopfParams& params, const TraceConfig& config = {},
                          double t0 = 0.0);

}  // namespace tactile
