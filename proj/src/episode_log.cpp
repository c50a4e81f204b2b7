#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "tactile/policy.hpp"

namespace tactile {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return fmt("%.9g", v); }
std::string tstamp(double t) { return fmt("%.6f", t); }

}  // namespace

void EpisodeLog::write(std::ostream& out) const {
  out << "episode 0 policy=" << policy << " seed=" << seed << " budget=" << num(budget)
      << " l_rbf=" << num(gp.lengthscale()) << " sigma_n=" << num(gp.noise()) << '\n';
  // Records are merged in time order; ties keep the order of the sections below.
  std::size_t it = 0, ic = 0, im = 0, is = 0, io = 0;
  const auto next_t = [&](std::size_t i, auto& v) {
    return i < v.size() ? v[i].t : std::numeric_limits<double>::infinity();
  };
  const std::size_t n_obs = std::min(observations.size(), observation_times.size());
  while (it < trajectory.size() || ic < contacts.size() || im < metrics.size() ||
         is < transitions.size() || io < n_obs) {
    const double ts[5] = {next_t(it, trajectory), next_t(ic, contacts), next_t(im, metrics),
                          next_t(is, transitions),
                          io < n_obs ? observation_times[io] : std::numeric_limits<double>::infinity()};
    int k = 0;
    for (int j = 1; j < 5; ++j) {
      if (ts[j] < ts[k]) k = j;
    }
    switch (k) {
      case 0: {
        const auto& s = trajectory[it++];
        out << "pose " << tstamp(s.t) << ' ' << num(s.position.x) << ' ' << num(s.position.y)
            << ' ' << (s.contact ? 1 : 0) << '\n';
        break;
      }
      case 1: {
        const auto& c = contacts[ic++];
        out << "contact " << tstamp(c.t) << ' ' << num(c.point.x) << ' ' << num(c.point.y) << ' '
            << num(c.normal.x) << ' ' << num(c.normal.y) << " object=" << c.object_id
            << " mode=" << mode_name(c.mode) << '\n';
        break;
      }
      case 2: {
        const auto& m = metrics[im++];
        out << "metrics " << tstamp(m.t) << " cycle=" << m.cycle << " travel=" << num(m.travel)
            << " U_S=" << num(m.scene_uncertainty) << " U_C=" << num(m.contour_uncertainty)
            << '\n';
        break;
      }
      case 3: {
        const auto& s = transitions[is++];
        out << "transition " << tstamp(s.t) << ' ' << mode_name(s.from) << ' '
            << mode_name(s.to) << '\n';
        break;
      }
      default: {
        const auto& o = observations[io];
        out << "observe " << tstamp(observation_times[io]) << ' ' << num(o.position.x) << ' '
            << num(o.position.y) << ' ' << num(o.occupied) << '\n';
        ++io;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    out << "object " << i << " t=" << tstamp(o.t) << " closed=" << (o.closed ? 1 : 0) << " truth=" << o.truth_id
        << " vertices=" << o.polygon.size();
    for (const auto& p : o.polygon.vertices()) out << ' ' << num(p.x) << ' ' << num(p.y);
    out << '\n';
    for (const auto& p : o.probes) {
      out << "probe " << i << ' ' << num(p.x) << ' ' << num(p.y) << ' ' << num(p.z) << '\n';
    }
  }
  for (const auto& d : point_detections) {
    out << "point_detection " << d.size();
    for (const auto& p : d) out << ' ' << num(p.x) << ' ' << num(p.y);
    out << '\n';
  }
  out << "end " << tstamp(trajectory.empty() ? 0.0 : trajectory.back().t)
      << " reason=" << end_reason << " travel=" << num(travel_distance)
      << " observations=" << observations.size() << '\n';
}

void EpisodeLog::write_trajectory_csv(std::ostream& out) const {
  out << "t,x,y,contact\n";
  for (const auto& s : trajectory) {
    out << tstamp(s.t) << ',' << num(s.position.x) << ',' << num(s.position.y) << ','
        << (s.contact ? 1 : 0) << '\n';
  }
}

void EpisodeLog::write_contacts_csv(std::ostream& out) const {
  out << "t,x,y,nx,ny,object,mode\n";
  for (const auto& c : contacts) {
    out << tstamp(c.t) << ',' << num(c.point.x) << ',' << num(c.point.y) << ','
        << num(c.normal.x) << ',' << num(c.normal.y) << ',' << c.object_id << ','
        << mode_name(c.mode) << '\n';
  }
}

void EpisodeLog::write_metrics_csv(std::ostream& out) const {
  out << "cycle,t,travel,U_S,U_C\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    // Cycles that ended without moving collapse into the last one.
    if (i + 1 < metrics.size() && metrics[i + 1].travel <= metrics[i].travel) continue;
    const auto& m = metrics[i];
    out << m.cycle << ',' << tstamp(m.t) << ',' << num(m.travel) << ','
        << num(m.scene_uncertainty) << ',' << num(m.contour_uncertainty) << '\n';
  }
}

void EpisodeLog::write_contours(std::ostream& out) const {
  out << "object,closed,truth,x,y\n";
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (const auto& p : objects[i].polygon.vertices()) {
      out << i << ',' << (objects[i].closed ? 1 : 0) << ',' << objects[i].truth_id << ','
          << num(p.x) << ',' << num(p.y) << '\n';
    }
  }
}

namespace {

class LogLine {
 public:
  LogLine(const std::string& text, int line_no) : line_no_(line_no) {
    std::istringstream in(text);
    for (std::string tok; in >> tok;) toks_.push_back(tok);
  }

  [[nodiscard]] std::size_t size() const { return toks_.size(); }
  [[nodiscard]] const std::string& operator[](std::size_t i) const { return toks_.at(i); }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("episode log line " + std::to_string(line_no_) + ": " + what);
  }

  double number(std::size_t i) const {
    if (i >= toks_.size()) fail("missing field " + std::to_string(i));
    return parse(toks_[i]);
  }

  std::string value(const std::string& key) const {
    const std::string prefix = key + "=";
    for (const auto& t : toks_) {
      if (t.rfind(prefix, 0) == 0) return t.substr(prefix.size());
    }
    fail("missing '" + key + "'");
  }

  double keyed(const std::string& key) const { return parse(value(key)); }

 private:
  double parse(const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') fail("bad number '" + s + "'");
    return v;
  }

  std::vector<std::string> toks_;
  int line_no_;
};

Mode parse_mode(const LogLine& l, const std::string& s) {
  for (Mode m : {Mode::ObjectSearching, Mode::ContourTracing, Mode::FeatureSampling, Mode::Done}) {
    if (s == mode_name(m)) return m;
  }
  l.fail("unknown mode '" + s + "'");
}

}  // namespace

EpisodeLog EpisodeLog::read(std::istream& in) {
  EpisodeLog log;
  bool header = false, end = false;
  int line_no = 0;
  for (std::string text; std::getline(in, text);) {
    ++line_no;
    const LogLine l(text, line_no);
    if (l.size() == 0) continue;
    const std::string& kind = l[0];
    if (!header) {
      if (kind != "episode") l.fail("expected 'episode' header");
      log.policy = l.value("policy");
      log.seed = static_cast<std::uint64_t>(std::stoull(l.value("seed")));
      log.budget = l.keyed("budget");
      log.gp = GpOccupancyModel(l.keyed("l_rbf"), l.keyed("sigma_n"));
      header = true;
    } else if (kind == "pose") {
      log.trajectory.push_back({l.number(1), {l.number(2), l.number(3)}, l.number(4) != 0.0});
    } else if (kind == "contact") {
      if (l.size() < 8) l.fail("truncated contact record");
      log.contacts.push_back({l.number(1), {l.number(2), l.number(3)}, {l.number(4), l.number(5)},
                              static_cast<int>(l.keyed("object")), parse_mode(l, l.value("mode"))});
    } else if (kind == "metrics") {
      CycleMetrics m;
      m.t = l.number(1);
      m.cycle = static_cast<int>(l.keyed("cycle"));
      m.travel = l.keyed("travel");
      m.scene_uncertainty = l.keyed("U_S");
      m.contour_uncertainty = l.keyed("U_C");
      log.metrics.push_back(m);
    } else if (kind == "transition") {
      if (l.size() < 4) l.fail("truncated transition record");
      log.transitions.push_back({l.number(1), parse_mode(l, l[2]), parse_mode(l, l[3])});
    } else if (kind == "observe") {
      const Observation o{{l.number(2), l.number(3)}, l.number(4)};
      log.observations.push_back(o);
      log.observation_times.push_back(l.number(1));
      log.gp.add_observation(o);
    } else if (kind == "object") {
      ExtractedObject o;
      if (static_cast<std::size_t>(l.number(1)) != log.objects.size()) l.fail("objects out of order");
      o.t = l.keyed("t");
      o.closed = l.keyed("closed") != 0.0;
      o.truth_id = static_cast<int>(l.keyed("truth"));
      const auto n = static_cast<std::size_t>(l.keyed("vertices"));
      if (l.size() != 6 + 2 * n) l.fail("vertex count does not match");
      std::vector<Point2> v;
      for (std::size_t i = 0; i < n; ++i) v.push_back({l.number(6 + 2 * i), l.number(7 + 2 * i)});
      try {
        o.polygon = Polygon(std::move(v));
      } catch (const GeometryError& e) {
        l.fail(e.what());
      }
      log.objects.push_back(std::move(o));
    } else if (kind == "probe") {
      const auto i = static_cast<std::size_t>(l.number(1));
      if (i >= log.objects.size()) l.fail("probe for unknown object");
      log.objects[i].probes.push_back({l.number(2), l.number(3), l.number(4)});
    } else if (kind == "point_detection") {
      const auto n = static_cast<std::size_t>(l.number(1));
      if (l.size() != 2 + 2 * n) l.fail("point count does not match");
      std::vector<Point2> d;
      for (std::size_t i = 0; i < n; ++i) d.push_back({l.number(2 + 2 * i), l.number(3 + 2 * i)});
      log.point_detections.push_back(std::move(d));
    } else if (kind == "end") {
      log.end_reason = l.value("reason");
      log.travel_distance = l.keyed("travel");
      end = true;
    } else {
      l.fail("unknown record '" + kind + "'");
    }
  }
  if (!header) throw std::runtime_error("episode log: empty input");
  if (!end) throw std::runtime_error("episode log: missing 'end' record");
  return log;
}

double EpisodeLog::time_at_travel(double d) const {
  if (trajectory.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    acc += distance(trajectory[i - 1].position, trajectory[i].position);
    if (acc >= d) return trajectory[i].t;
  }
  return trajectory.back().t;
}

EpisodeLog EpisodeLog::snapshot(double t) const {
  EpisodeLog s;
  s.policy = policy;
  s.seed = seed;
  s.budget = budget;
  s.gp = GpOccupancyModel(gp.lengthscale(), gp.noise());
  auto upto = [t](const auto& v) {
    std::decay_t<decltype(v)> out;
    for (const auto& r : v) {
      if (r.t <= t) out.push_back(r);
    }
    return out;
  };
  s.trajectory = upto(trajectory);
  s.contacts = upto(contacts);
  s.transitions = upto(transitions);
  s.metrics = upto(metrics);
  s.objects = upto(objects);
  for (std::size_t i = 0; i < observations.size() && i < observation_times.size(); ++i) {
    if (observation_times[i] > t) break;
    s.observations.push_back(observations[i]);
    s.observation_times.push_back(observation_times[i]);
    s.gp.add_observation(observations[i]);
  }
  for (std::size_t i = 1; i < s.trajectory.size(); ++i) {
    s.travel_distance += distance(s.trajectory[i - 1].position, s.trajectory[i].position);
  }
  s.end_reason = "snapshot";
  return s;
}

}  // namespace tactile
