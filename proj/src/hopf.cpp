#include "tactile/hopf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tactile {

void HopfParams::validate() const {
  if (!(r_h > 0.0) || !(gamma > 0.0) || !(f_h > 0.0)) {
    throw std::invalid_argument("HopfParams: r_h, gamma and f_h must be > 0");
  }
  if (!(dt > 0.0) || dt > 1.0 / (20.0 * f_h)) {
    throw std::invalid_argument("HopfParams: dt must be in (0, 1/(20 f_h)]");
  }
}

double HopfParams::omega() const { return 2.0 * std::numbers::pi * f_h; }

double HopfParams::max_step() const { return 3.0 * r_h * omega() * dt; }

Point2 hopf_velocity(Point2 offset, const HopfParams& p) {
  const double radial = p.gamma * (1.0 - squared_norm(offset) / (p.r_h * p.r_h));
  const double w = p.omega();
  return {radial * offset.x - w * offset.y, radial * offset.y + w * offset.x};
}

Point2 step(const HopfState& state, const HopfParams& p) {
  const Point2 x = state.sensor - state.center;
  const double h = p.dt;
  const Point2 k1 = hopf_velocity(x, p);
  const Point2 k2 = hopf_velocity(x + (h / 2.0) * k1, p);
  const Point2 k3 = hopf_velocity(x + (h / 2.0) * k2, p);
  const Point2 k4 = hopf_velocity(x + h * k3, p);
  const Point2 next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return state.center + next;
}

Point2 recenter_binary(const HopfState& state, Point2 contact_point) {
  return 2.0 * contact_point - state.center;
}

Point2 recenter_directed(const HopfState& state, Point2 contact_dir, double r_h) {
  const double n = norm(contact_dir);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("recenter_directed: zero contact direction");
  }
  // Planar part of z x c is c rotated by +90 degrees.
  const Point2 w = perp(contact_dir);
  return state.sensor + (r_h / n) * w;
}

MoveResult move_until_contact(const Scene& scene, Point2 from, Point2 to,
                              double contact_radius) {
  MoveResult out;
  out.reached = from;
  const Point2 target = scene.task_space.clamp(to);
  const double len = distance(from, target);
  if (len == 0.0) return out;
  const int pieces = std::max(1, static_cast<int>(std::ceil(len / (0.5 * contact_radius))));
  Point2 free = from;
  for (int k = 1; k <= pieces; ++k) {
    const Point2 p = from + (static_cast<double>(k) / pieces) * (target - from);
    const auto rep = query_contact(scene, p, contact_radius);
    if (!rep.in_contact) {
      free = p;
      continue;
    }
    Point2 lo = free, hi = p;
    ContactReport hit = rep;
    while (distance(lo, hi) > 1e-6) {
      const Point2 mid = 0.5 * (lo + hi);
      const auto r = query_contact(scene, mid, contact_radius);
      if (r.in_contact) {
        hi = mid;
        hit = r;
      } else {
        lo = mid;
      }
    }
    out.reached = lo;
    out.blocked = true;
    out.contact = hit;
    return out;
  }
  out.reached = free;
  return out;
}

TraceResult trace_contour(const Scene& scene, Point2 sensor, const ContactReport& start_contact,
                          const HopfParams& params, const TraceConfig& config, double t0) {
  params.validate();
  if (!start_contact.in_contact) throw std::invalid_argument("trace_contour: no start contact");
  TraceResult res;
  HopfState state{recenter_directed({{}, sensor}, start_contact.contact_normal, params.r_h),
                  sensor};
  const Point2 first = start_contact.contact_point;
  res.contacts.push_back(first);
  res.reports.push_back(start_contact);
  res.trajectory.push_back({t0, sensor, true});

  const auto period_steps = static_cast<std::size_t>(std::ceil(1.25 / (params.f_h * params.dt)));
  std::size_t since_contact = 0;
  int stalled = 0;
  double t = t0;
  for (std::size_t i = 0; i < config.max_steps; ++i) {
    Point2 proposed = step(state, params);
    const Point2 delta = proposed - state.sensor;
    const double len = norm(delta);
    const double cap = std::min(params.max_step(), config.max_arc_length - res.arc_length);
    if (cap <= 0.0) break;
    if (len > cap) proposed = state.sensor + (cap / len) * delta;

    const MoveResult mv = move_until_contact(scene, state.sensor, proposed, config.contact_radius);
    const double moved = distance(state.sensor, mv.reached);
    res.arc_length += moved;
    state.sensor = mv.reached;
    t += params.dt;
    res.trajectory.push_back({t, state.sensor, mv.blocked});

    if (mv.blocked) {
      res.contacts.push_back(mv.contact.contact_point);
      res.reports.push_back(mv.contact);
      stalled = moved < 1e-9 ? stalled + 1 : 0;
      if (config.mode == BounceMode::Binary || stalled >= 2) {
        state.center = recenter_binary(state, state.sensor);
      } else {
        state.center = recenter_directed(state, mv.contact.contact_normal, params.r_h);
      }
      since_contact = 0;
    } else if (++since_contact > period_steps) {
      // Lost the surface (e.g. past a sharp tip): drift the cycle toward the last contact.
      const Point2 toward = res.contacts.back() - state.center;
      const double d = norm(toward);
      if (d > 0.0) state.center = state.center + (params.r_h / d) * toward;
      since_contact = 0;
    }

    if (res.contacts.size() >= config.min_contacts &&
        res.arc_length > config.min_arc_factor * params.r_h &&
        distance(state.sensor, first) < config.closure_factor * params.r_h) {
      res.closed = true;
      break;
    }
  }
  res.final_sensor = state.sensor;
  return res;
}

}  // namespace tactile
