#include "tactile/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace tactile {

namespace {

class Canvas {
 public:
  Canvas(const TaskSpace& ts, int size) : ts_(ts) {
    scale_ = size / std::max(ts.width(), ts.height());
    w_ = ts.width() * scale_;
    h_ = ts.height() * scale_;
  }

  double x(double v) const { return (v - ts_.x_min) * scale_; }
  double y(double v) const { return h_ - (v - ts_.y_min) * scale_; }
  double len(double v) const { return v * scale_; }
  double width() const { return w_; }
  double height() const { return h_; }

  std::string pt(Point2 p) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", x(p.x), y(p.y));
    return buf;
  }

 private:
  TaskSpace ts_;
  double scale_, w_, h_;
};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void polygon(std::ostream& out, const Canvas& c, const Polygon& p, const char* style) {
  out << "<polygon points=\"";
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << c.pt(p[i]);
  out << "\" " << style << "/>\n";
}

}  // namespace

void render_svg(const Scene& scene, const EpisodeLog* log, const SvgOptions& options,
                std::ostream& out) {
  const auto& ts = scene.task_space;
  const Canvas c(ts, options.size_px);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(c.width()) << "\" height=\""
      << f2(c.height()) << "\" viewBox=\"0 0 " << f2(c.width()) << ' ' << f2(c.height())
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << f2(c.width()) << "\" height=\"" << f2(c.height())
      << "\" fill=\"white\" stroke=\"black\"/>\n";

  if (log && options.heatmap_grid > 0) {
    const int n = options.heatmap_grid;
    std::vector<Point2> grid;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        grid.push_back({ts.x_min + (i + 0.5) * ts.width() / n, ts.y_min + (j + 0.5) * ts.height() / n});
      }
    }
    const auto sigma = log->gp.posterior_std_batch(grid);
    const double cw = c.len(ts.width() / n), ch = c.len(ts.height() / n);
    out << "<g id=\"heatmap\">\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const int shade = static_cast<int>(std::clamp(sigma[k], 0.0, 1.0) * 255.0 + 0.5);
      out << "<rect x=\"" << f2(c.x(grid[k].x) - cw / 2) << "\" y=\"" << f2(c.y(grid[k].y) - ch / 2)
          << "\" width=\"" << f2(cw) << "\" height=\"" << f2(ch) << "\" fill=\"rgb(255,"
          << 255 - shade / 2 << ',' << 255 - shade << ")\"/>\n";
    }
    out << "</g>\n";
  }

  if (options.ground_truth) {
    out << "<g id=\"objects\">\n";
    for (const auto& o : scene.objects) {
      polygon(out, c, o.polygon, "fill=\"#999999\" fill-opacity=\"0.5\" stroke=\"#555555\"");
    }
    out << "</g>\n";
  }

  if (log && options.trajectory && !log->trajectory.empty()) {
    out << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < log->trajectory.size(); ++i) {
      out << (i ? " " : "") << c.pt(log->trajectory[i].position);
    }
    out << "\"/>\n";
  }

  if (log && options.contours) {
    out << "<g id=\"contours\">\n";
    for (const auto& o : log->objects) {
      polygon(out, c, o.polygon, "fill=\"none\" stroke=\"#0a8a2a\" stroke-width=\"2\"");
      for (const auto& p : o.probes) {
        out << "<circle cx=\"" << f2(c.x(p.x)) << "\" cy=\"" << f2(c.y(p.y))
            << "\" r=\"4\" fill=\"#0a8a2a\"/>\n";
      }
    }
    out << "</g>\n";
  }

  if (log && options.contacts) {
    out << "<g id=\"contacts\">\n";
    for (const auto& k : log->contacts) {
      out << "<circle cx=\"" << f2(c.x(k.point.x)) << "\" cy=\"" << f2(c.y(k.point.y))
          << "\" r=\"2\" fill=\"#d62020\"/>\n";
    }
    out << "</g>\n";
  }
  if (!options.caption.empty()) {
    std::string text;
    for (char ch : options.caption) {
      switch (ch) {
        case '<': text += "&lt;"; break;
        case '>': text += "&gt;"; break;
        case '&': text += "&amp;"; break;
        default: text += ch;
      }
    }
    out << "<text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"16\">" << text
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace tactile
