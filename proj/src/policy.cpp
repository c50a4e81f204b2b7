#include "tactile/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "tactile/fixtures.hpp"
#include "tactile/signal.hpp"

namespace tactile {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::ObjectSearching: return "OS";
    case Mode::ContourTracing: return "CT";
    case Mode::FeatureSampling: return "FS";
    case Mode::Done: return "DONE";
  }
  return "?";
}

double PolicyParams::effective_dilation() const {
  return dilation >= 0.0 ? dilation : contact_radius + hopf.r_h / 2.0;
}

Point2 PolicyParams::start_position(const TaskSpace& ts) const {
  return start ? *start : Point2{ts.x_min + 0.05, ts.y_min + 0.05};
}

Polygon extract_contour(const std::vector<Point2>& contacts) {
  if (contacts.size() < 3) throw GeometryError("extract_contour: fewer than 3 contacts");
  return Polygon(contacts);
}

std::vector<Point2> place_probes(const Polygon& contour, int k_fs, Rng& rng) {
  if (k_fs < 1) throw std::invalid_argument("place_probes: k_fs must be >= 1");
  std::vector<Point2> out;
  const Point2 c = polygon_centroid(contour);
  out.push_back(point_in_polygon(c, contour) ? c : pole_of_inaccessibility(contour));
  const auto bb = bounding_box(contour);
  std::uniform_real_distribution<double> ux(bb.x_min, bb.x_max), uy(bb.y_min, bb.y_max);
  while (static_cast<int>(out.size()) < k_fs) {
    const Point2 p{ux(rng), uy(rng)};
    if (point_in_polygon(p, contour) && closest_boundary_point(p, contour).distance > 0.0) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Point3> raycast_probes(const Scene& scene, const std::vector<Point2>& probes) {
  std::vector<Point3> out;
  for (const auto& p : probes) {
    double z = 0.0;
    for (const auto& obj : scene.objects) {
      if (!obj.volume) continue;
      if (auto hit = raycast_down(p.x, p.y, *obj.volume)) z = std::max(z, *hit);
    }
    out.push_back({p.x, p.y, z});
  }
  return out;
}

std::vector<Point3> feature_sample(const Scene& scene, const Polygon& contour, int k_fs,
                                   Rng& rng) {
  return raycast_probes(scene, place_probes(contour, k_fs, rng));
}

namespace {

std::vector<Point2> midpoint_grid(const TaskSpace& ts, int n) {
  std::vector<Point2> g;
  g.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g.push_back({ts.x_min + (i + 0.5) * ts.width() / n, ts.y_min + (j + 0.5) * ts.height() / n});
    }
  }
  return g;
}

}  // namespace

double scene_uncertainty(const GpOccupancyModel& gp, const TaskSpace& ts, int grid_n) {
  if (grid_n < 10) throw std::invalid_argument("scene_uncertainty: grid_n must be >= 10");
  const auto sigma = gp.posterior_std_batch(midpoint_grid(ts, grid_n));
  double sum = 0.0;
  for (double s : sigma) sum += s;
  return sum / static_cast<double>(sigma.size());
}

double contour_uncertainty(const GpOccupancyModel& gp, const std::vector<Polygon>& contours,
                           int samples_per_contour) {
  double weighted = 0.0, total = 0.0;
  for (const auto& c : contours) {
    const auto pts = resample_perimeter(c, static_cast<std::size_t>(samples_per_contour));
    const auto sigma = gp.posterior_std_batch(pts);
    double sum = 0.0;
    for (double s : sigma) sum += s;
    const double perim = polygon_perimeter(c);
    weighted += perim * sum / static_cast<double>(sigma.size());
    total += perim;
  }
  return total > 0.0 ? weighted / total : 1.0;
}

double known_area(const EpisodeLog& log, const TaskSpace& ts, int grid_n) {
  const double cw = ts.width() / grid_n, ch = ts.height() / grid_n;
  std::vector<char> seen(static_cast<std::size_t>(grid_n) * grid_n, 0);
  auto mark = [&](Point2 p) {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - ts.x_min) / cw)), 0, grid_n - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - ts.y_min) / ch)), 0, grid_n - 1);
    seen[static_cast<std::size_t>(j) * grid_n + i] = 1;
  };
  const double step = 0.25 * std::min(cw, ch);
  for (std::size_t k = 0; k < log.trajectory.size(); ++k) {
    const Point2 b = log.trajectory[k].position;
    const Point2 a = k ? log.trajectory[k - 1].position : b;
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / step)));
    for (int s = 0; s <= n; ++s) mark(a + (static_cast<double>(s) / n) * (b - a));
  }
  const auto grid = midpoint_grid(ts, grid_n);
  double area = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!seen[i]) continue;
    const bool inside = std::any_of(log.objects.begin(), log.objects.end(), [&](const auto& o) {
      return point_in_polygon(grid[i], o.polygon);
    });
    if (!inside) area += cw * ch;
  }
  for (const auto& o : log.objects) area += polygon_area(o.polygon);
  return area;
}

void write_heatmap_csv(const GpOccupancyModel& gp, const TaskSpace& ts, int grid_n,
                       std::ostream& out) {
  const auto grid = midpoint_grid(ts, grid_n);
  const auto mean = gp.posterior_mean_batch(grid);
  const auto sd = gp.posterior_std_batch(grid);
  char buf[128];
  out << "x,y,mean,std\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9f,%.9f\n", grid[i].x, grid[i].y, mean[i], sd[i]);
    out << buf;
  }
}

namespace {

enum class PolicyKind { Hybrid, PureOs, LineSweep };

class Explorer {
 public:
  Explorer(const Scene& scene, const PolicyParams& params, double budget, std::uint64_t seed,
           PolicyKind kind)
      : scene_(scene), p_(params), kind_(kind), rng_(seed) {
    if (!(budget > 0.0)) throw std::invalid_argument("exploration budget must be > 0");
    params.hopf.validate();
    log_.policy = kind == PolicyKind::Hybrid ? "hybrid"
                  : kind == PolicyKind::PureOs ? "pure_os" : "line_sweep";
    log_.seed = seed;
    log_.budget = budget;
    log_.gp = GpOccupancyModel(params.lengthscale, params.gp_noise);
    for (const auto& o : scene.objects) truth_.push_back(o.polygon);
    space_.task_space = scene.task_space;
    pos_ = scene.task_space.clamp(params.start_position(scene.task_space));
    if (occupied(scene, pos_) || query_contact(scene, pos_, p_.contact_radius).in_contact) {
      throw std::invalid_argument("exploration start position is not in free space");
    }
  }

  EpisodeLog run() {
    log_.trajectory.push_back({t_, pos_, false});
    observe(pos_, 0.0);
    if (kind_ == PolicyKind::LineSweep) {
      run_line_sweep();
    } else {
      run_search();
    }
    record_metrics();
    log_.transitions.push_back({t_, mode_, Mode::Done});
    return std::move(log_);
  }

 private:
  struct Leg {
    bool blocked = false;
    bool out_of_budget = false;
    ContactReport contact;
  };

  double remaining() const { return log_.budget - log_.travel_distance; }

  void observe(Point2 q, double occ) {
    log_.gp.add_observation({q, occ});
    log_.observations.push_back({q, occ});
    log_.observation_times.push_back(t_);
  }

  void transition(Mode to) {
    log_.transitions.push_back({t_, mode_, to});
    mode_ = to;
  }

  void record_metrics() {
    CycleMetrics m;
    m.cycle = static_cast<int>(log_.metrics.size());
    m.t = t_;
    m.travel = log_.travel_distance;
    m.scene_uncertainty = scene_uncertainty(log_.gp, scene_.task_space, p_.metric_grid);
    m.contour_uncertainty = contour_uncertainty(log_.gp, truth_, p_.contour_samples);
    log_.metrics.push_back(m);
  }

  void record_contact(const ContactReport& c) {
    log_.contacts.push_back({t_, c.contact_point, c.contact_normal, c.object_id, mode_});
  }

  // The filtered sensor model confirms a physical contact through the barometer chain.
  bool sensed(const ContactReport& c) {
    if (p_.sensor == SensorModel::GroundTruth) return c.in_contact;
    FilterChain chain;
    TraceOptions o;
    o.duration = 0.5;
    o.events = {{0.25, 0.01, 0.25}};
    o.noise_std = 1e-5;
    o.seed = rng_();
    const auto trace = synthesize_trace(o);
    bool hit = false;
    for (double s : trace.samples) hit = detect_contact(chain, s) || hit;
    return hit;
  }

  // Straight move with free-space observations every obs_spacing of travel.
  Leg travel_to(Point2 target) {
    Leg leg;
    target = scene_.task_space.clamp(target);
    while (distance(pos_, target) > 1e-12) {
      if (remaining() <= 1e-12) {
        leg.out_of_budget = true;
        return leg;
      }
      const double len = std::min({p_.obs_spacing - since_obs_, distance(pos_, target), remaining()});
      const Point2 next = distance(pos_, target) <= len
                              ? target
                              : pos_ + (len / distance(pos_, target)) * (target - pos_);
      const auto mv = move_until_contact(scene_, pos_, next, p_.contact_radius);
      const double moved = distance(pos_, mv.reached);
      advance(mv.reached, moved, mv.blocked);
      if (mv.blocked) {
        leg.blocked = sensed(mv.contact);
        leg.contact = mv.contact;
        return leg;
      }
    }
    return leg;
  }

  void advance(Point2 to, double moved, bool contact) {
    log_.travel_distance += moved;
    t_ += moved / p_.os_speed;
    pos_ = to;
    since_obs_ += moved;
    if (since_obs_ >= p_.obs_spacing - 1e-12) {
      observe(pos_, 0.0);
      since_obs_ = 0.0;
    }
    log_.trajectory.push_back({t_, pos_, contact});
  }

  void rebuild_space() {
    space_.occupied = predict_occupancy_polygons(contours_, p_.effective_dilation());
    // Contacts not covered by a traced contour are blocked off by a small disc.
    for (const auto& c : contact_marks_) {
      space_.occupied.push_back(regular_polygon(c, p_.effective_dilation(), 8));
    }
  }

  bool explored() const {
    const auto grid = midpoint_grid(scene_.task_space, p_.termination_grid);
    std::vector<Point2> free;
    for (const auto& g : grid) {
      if (space_.is_free(g)) free.push_back(g);
    }
    if (free.empty()) return true;
    const auto sigma = log_.gp.posterior_std_batch(free);
    return *std::max_element(sigma.begin(), sigma.end()) < p_.termination_sigma;
  }

  bool near_known(Point2 c) const {
    const double margin = p_.effective_dilation() + p_.contact_radius + p_.hopf.r_h;
    return std::any_of(contours_.begin(), contours_.end(), [&](const Polygon& poly) {
      return point_in_polygon(c, poly) || closest_boundary_point(c, poly).distance <= margin;
    });
  }

  void run_search() {
    int stalls = 0;
    double last_travel = -1.0;
    while (true) {
      record_metrics();
      if (log_.travel_distance <= last_travel) {
        if (++stalls >= 3) {
          log_.end_reason = "stalled";
          return;
        }
      } else {
        stalls = 0;
      }
      last_travel = log_.travel_distance;
      if (remaining() <= 1e-12) {
        log_.end_reason = "budget";
        return;
      }
      rebuild_space();
      if (explored()) {
        log_.end_reason = "explored";
        return;
      }
      const Point2 root = escape_point(space_, pos_);
      if (distance(root, pos_) > 0.0) {
        const Leg esc = travel_to(root);
        if (esc.out_of_budget) continue;
        if (esc.blocked) {
          handle_contact(esc.contact);
          continue;
        }
      }
      const auto tree = expand_tree(space_, log_.gp, p_.tos, pos_, rng_);
      const auto path = best_path(tree);
      if (path.size() < 2) continue;
      for (std::size_t i = 1; i < path.size(); ++i) {
        const Leg leg = travel_to(path[i]);
        if (leg.out_of_budget) break;
        if (leg.blocked) {
          handle_contact(leg.contact);
          break;
        }
      }
    }
  }

  void handle_contact(const ContactReport& c) {
    if (kind_ == PolicyKind::PureOs || near_known(c.contact_point)) {
      record_contact(c);
      observe(c.contact_point, 1.0);
      contact_marks_.push_back(c.contact_point);
      return;
    }
    trace(c);
  }

  void trace(const ContactReport& c) {
    transition(Mode::ContourTracing);
    TraceConfig cfg;
    cfg.mode = p_.bounce;
    cfg.contact_radius = p_.contact_radius;
    cfg.max_steps = p_.trace_max_steps;
    cfg.max_arc_length = remaining();
    const auto res = trace_contour(scene_, pos_, c, p_.hopf, cfg, t_);

    std::size_t next_contact = 1;
    record_contact(c);
    observe(c.contact_point, 1.0);
    for (std::size_t i = 1; i < res.trajectory.size(); ++i) {
      const auto& s = res.trajectory[i];
      const double moved = distance(pos_, s.position);
      log_.travel_distance += moved;
      t_ = s.t;
      pos_ = s.position;
      since_obs_ += moved;
      log_.trajectory.push_back(s);
      if (s.contact && next_contact < res.reports.size()) {
        const auto& rep = res.reports[next_contact++];
        record_contact(rep);
        observe(rep.contact_point, 1.0);
      } else if (since_obs_ >= p_.obs_spacing - 1e-12) {
        observe(pos_, 0.0);
        since_obs_ = 0.0;
      }
    }

    if (res.contacts.size() < 3) {
      log_.point_detections.push_back(res.contacts);
      transition(Mode::ObjectSearching);
      return;
    }
    ExtractedObject obj;
    obj.t = t_;
    obj.polygon = extract_contour(res.contacts);
    obj.contacts = res.contacts;
    obj.closed = res.closed;
    std::map<int, int> votes;
    for (const auto& r : res.reports) ++votes[r.object_id];
    obj.truth_id = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                     return a.second < b.second;
                   })->first;
    transition(Mode::FeatureSampling);
    obj.probes = feature_sample(scene_, obj.polygon, p_.k_fs, rng_);
    contours_.push_back(obj.polygon);
    log_.objects.push_back(std::move(obj));
    transition(Mode::ObjectSearching);
  }

  // --- line sweep -------------------------------------------------------------

  // Position along the task-space boundary, counter-clockwise from (x_min, y_min).
  double perimeter_coord(Point2 q) const {
    const auto& ts = scene_.task_space;
    const double w = ts.width(), h = ts.height();
    if (q.y <= ts.y_min + 1e-12) return q.x - ts.x_min;
    if (q.x >= ts.x_max - 1e-12) return w + (q.y - ts.y_min);
    if (q.y >= ts.y_max - 1e-12) return w + h + (ts.x_max - q.x);
    return 2.0 * w + h + (ts.y_max - q.y);
  }

  Point2 perimeter_point(double s) const {
    const auto& ts = scene_.task_space;
    const double w = ts.width(), h = ts.height(), per = 2.0 * (w + h);
    s = std::fmod(std::fmod(s, per) + per, per);
    if (s <= w) return {ts.x_min + s, ts.y_min};
    if (s <= w + h) return {ts.x_max, ts.y_min + (s - w)};
    if (s <= 2.0 * w + h) return {ts.x_max - (s - w - h), ts.y_max};
    return {ts.x_min, ts.y_max - (s - 2.0 * w - h)};
  }

  Point2 nearest_boundary(Point2 q) const {
    const auto& ts = scene_.task_space;
    const double dl = q.x - ts.x_min, dr = ts.x_max - q.x, db = q.y - ts.y_min, dt = ts.y_max - q.y;
    const double m = std::min({dl, dr, db, dt});
    if (m == db) return {q.x, ts.y_min};
    if (m == dl) return {ts.x_min, q.y};
    if (m == dr) return {ts.x_max, q.y};
    return {q.x, ts.y_max};
  }

  // Walks along the boundary (shorter way round) to `target`, which lies on it.
  bool transit_boundary(Point2 target) {
    const auto& ts = scene_.task_space;
    const double per = 2.0 * (ts.width() + ts.height());
    const double a = perimeter_coord(pos_), b = perimeter_coord(target);
    double fwd = std::fmod(b - a + per, per);
    const double dir = fwd <= per / 2.0 ? 1.0 : -1.0;
    const double len = dir > 0 ? fwd : per - fwd;
    const double corners[4] = {ts.width(), ts.width() + ts.height(), 2.0 * ts.width() + ts.height(), per};
    std::vector<double> stops;
    for (double c : corners) {
      for (double k : {c, c - per, c + per}) {
        const double off = dir * (k - a);
        if (off > 1e-12 && off < len - 1e-12) stops.push_back(off);
      }
    }
    std::sort(stops.begin(), stops.end());
    stops.push_back(len);
    for (double off : stops) {
      const Leg leg = travel_to(perimeter_point(a + dir * off));
      if (leg.out_of_budget || leg.blocked) return false;
    }
    return true;
  }

  void run_line_sweep() {
    const auto& ts = scene_.task_space;
    const int n = p_.termination_grid;
    std::vector<bool> used_rows(n, false), used_cols(n, false);
    bool horizontal = true;
    {
      const Leg leg = travel_to(nearest_boundary(pos_));
      if (leg.blocked) record_contact(leg.contact);
    }
    while (true) {
      record_metrics();
      if (remaining() <= 1e-12) {
        log_.end_reason = "budget";
        return;
      }
      if (explored()) {
        log_.end_reason = "explored";
        return;
      }
      auto& used = horizontal ? used_rows : used_cols;
      if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) used.assign(n, false);
      const auto grid = midpoint_grid(ts, n);
      const auto sigma = log_.gp.posterior_std_batch(grid);
      int best = -1;
      for (int k = 0; k < n * n; ++k) {
        const int line = horizontal ? k / n : k % n;
        if (used[line]) continue;
        if (best < 0 || sigma[k] > sigma[best]) best = k;
      }
      const int line = horizontal ? best / n : best % n;
      used[line] = true;
      const Point2 q = grid[best];
      Point2 s, e;
      if (horizontal) {
        const bool left = q.x - ts.x_min <= ts.x_max - q.x;
        s = {left ? ts.x_min : ts.x_max, q.y};
        e = {left ? ts.x_max : ts.x_min, q.y};
      } else {
        const bool bottom = q.y - ts.y_min <= ts.y_max - q.y;
        s = {q.x, bottom ? ts.y_min : ts.y_max};
        e = {q.x, bottom ? ts.y_max : ts.y_min};
      }
      horizontal = !horizontal;
      if (!transit_boundary(s)) continue;
      const Leg sweep = travel_to(e);
      if (sweep.blocked) {
        record_contact(sweep.contact);
        observe(sweep.contact.contact_point, 1.0);
        travel_to(s);
      }
    }
  }

  const Scene& scene_;
  const PolicyParams& p_;
  PolicyKind kind_;
  Rng rng_;
  EpisodeLog log_;
  std::vector<Polygon> truth_;
  std::vector<Polygon> contours_;
  std::vector<Point2> contact_marks_;
  SearchSpace space_;
  Point2 pos_;
  double t_ = 0.0;
  double since_obs_ = 0.0;
  Mode mode_ = Mode::ObjectSearching;
};

}  // namespace

EpisodeLog run_episode(const Scene& scene, const PolicyParams& params, double budget,
                       std::uint64_t seed) {
  return Explorer(scene, params, budget, seed, PolicyKind::Hybrid).run();
}

EpisodeLog run_baseline_pure_os(const Scene& scene, const PolicyParams& params, double budget,
                                std::uint64_t seed) {
  return Explorer(scene, params, budget, seed, PolicyKind::PureOs).run();
}

EpisodeLog run_baseline_line_sweep(const Scene& scene, const PolicyParams& params,
                                   double budget, std::uint64_t seed) {
  return Explorer(scene, params, budget, seed, PolicyKind::LineSweep).run();
}

}  // namespace tactile
