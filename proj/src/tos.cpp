#include "tactile/tos.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kCostTol = 1e-12;

// Uniform grid of vertex ids with cell size d_near over the task space.
class VertexGrid {
 public:
  VertexGrid(const TaskSpace& ts, double cell) : ts_(ts), cell_(cell) {
    nx_ = std::max(1, static_cast<int>(std::ceil(ts.width() / cell)));
    ny_ = std::max(1, static_cast<int>(std::ceil(ts.height() / cell)));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  }

  void insert(int id, Point2 p) { cells_[index(cx(p.x), cy(p.y))].push_back(id); }

  template <typename Fn>
  void for_ring(int ix, int iy, int r, Fn&& fn) const {
    for (int y = iy - r; y <= iy + r; ++y) {
      if (y < 0 || y >= ny_) continue;
      for (int x = ix - r; x <= ix + r; ++x) {
        if (x < 0 || x >= nx_) continue;
        if (std::max(std::abs(x - ix), std::abs(y - iy)) != r) continue;
        for (int id : cells_[index(x, y)]) fn(id);
      }
    }
  }

  int nearest(Point2 p, const std::vector<PlanTree::Vertex>& v) const {
    const int ix = cx(p.x), iy = cy(p.y);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const int max_r = std::max(nx_, ny_);
    for (int r = 0; r <= max_r; ++r) {
      // Everything outside ring r - 1 is at least (r - 1) cells away.
      if (best >= 0 && best_d <= (r - 1) * cell_) break;
      for_ring(ix, iy, r, [&](int id) {
        const double d = distance(p, v[id].position);
        if (d < best_d || (d == best_d && id < best)) {
          best_d = d;
          best = id;
        }
      });
    }
    return best;
  }

  std::vector<int> within(Point2 p, double radius, const std::vector<PlanTree::Vertex>& v) const {
    std::vector<int> out;
    const int ix = cx(p.x), iy = cy(p.y);
    const int reach = static_cast<int>(std::ceil(radius / cell_));
    for (int r = 0; r <= reach; ++r) {
      for_ring(ix, iy, r, [&](int id) {
        if (distance(p, v[id].position) <= radius) out.push_back(id);
      });
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  int cx(double x) const {
    return std::clamp(static_cast<int>(std::floor((x - ts_.x_min) / cell_)), 0, nx_ - 1);
  }
  int cy(double y) const {
    return std::clamp(static_cast<int>(std::floor((y - ts_.y_min) / cell_)), 0, ny_ - 1);
  }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }

  TaskSpace ts_;
  double cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

}  // namespace

bool SearchSpace::is_free(Point2 p) const {
  if (!task_space.contains(p)) return false;
  return std::none_of(occupied.begin(), occupied.end(),
                      [&](const Polygon& poly) { return point_in_polygon(p, poly); });
}

bool SearchSpace::segment_free(Point2 a, Point2 b) const {
  if (!task_space.contains(a) || !task_space.contains(b)) return false;
  return std::none_of(occupied.begin(), occupied.end(), [&](const Polygon& poly) {
    return segment_polygon_intersect(a, b, poly);
  });
}

std::vector<Polygon> predict_occupancy_polygons(const std::vector<Polygon>& contours,
                                                double dilation) {
  std::vector<Polygon> out;
  out.reserve(contours.size());
  for (const auto& c : contours) out.push_back(dilation == 0.0 ? c : offset_polygon(c, dilation));
  return out;
}

Point2 escape_point(const SearchSpace& space, Point2 p) {
  Point2 q = space.task_space.clamp(p);
  for (int round = 0; round < 8; ++round) {
    const auto it = std::find_if(space.occupied.begin(), space.occupied.end(),
                                 [&](const Polygon& poly) { return point_in_polygon(q, poly); });
    if (it == space.occupied.end()) return q;
    const auto proj = closest_boundary_point(q, *it);
    Point2 out = proj.point - q;
    const double d = norm(out);
    if (d > 1e-12) {
      out = (1.0 / d) * out;
    } else {
      const Point2 e = it->edge_end(proj.edge) - it->edge_start(proj.edge);
      out = (1.0 / norm(e)) * Point2{e.y, -e.x};
    }
    q = space.task_space.clamp(proj.point + 1e-6 * out);
  }
  return q;
}

std::vector<double> roulette_probabilities(std::span<const double> sigma, double k_r,
                                           double epsilon) {
  std::vector<double> w(sigma.size());
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    w[i] = std::pow(sigma[i], k_r) + epsilon;
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("roulette_select: no candidates");
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

Point2 sample_free(const SearchSpace& space, Rng& rng, int max_attempts) {
  const auto& ts = space.task_space;
  std::uniform_real_distribution<double> ux(ts.x_min, ts.x_max), uy(ts.y_min, ts.y_max);
  for (int k = 0; k < max_attempts; ++k) {
    const Point2 p{ux(rng), uy(rng)};
    if (space.is_free(p)) return p;
  }
  throw std::runtime_error("uncertainty sampling: search space saturated");
}

Candidate uncertainty_sampling(const SearchSpace& space, const GpOccupancyModel& gp, int n,
                               double k_r, double epsilon, Rng& rng) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sample_free(space, rng, 100 * n));
  const auto sigma = gp.posterior_std_batch(pts);
  const auto p = roulette_probabilities(sigma, k_r, epsilon);
  const std::size_t k = roulette_select(p, rng);
  return {pts[k], sigma[k]};
}

PlanTree expand_tree(const SearchSpace& space, const GpOccupancyModel& gp,
                     const TosParams& params, Point2 root, Rng& rng) {
  PlanTree tree;
  auto& v = tree.vertices;
  v.push_back({root, 0.0, 0.0, -1});
  std::vector<std::vector<int>> children(1);
  VertexGrid grid(space.task_space, params.d_near);
  grid.insert(0, root);

  // All candidates for the whole expansion are scored in one batch.
  const int n = params.n_candidates;
  std::vector<Point2> cand;
  cand.reserve(static_cast<std::size_t>(params.n_tree) * n);
  for (int i = 0; i < params.n_tree * n; ++i) cand.push_back(sample_free(space, rng, 100 * n));
  const auto cand_sigma = gp.posterior_std_batch(cand);

  auto shift_subtree = [&](int top, double delta, std::deque<int>& queue) {
    std::vector<int> stack{top};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (u != top) v[u].cost += delta;
      queue.push_back(u);
      for (int c : children[u]) stack.push_back(c);
    }
  };

  std::vector<double> weights(n);
  for (int it = 0; it < params.n_tree; ++it) {
    const std::size_t base = static_cast<std::size_t>(it) * n;
    for (int j = 0; j < n; ++j) {
      weights[j] = std::pow(cand_sigma[base + j], params.k_r) + params.epsilon;
    }
    const Point2 x_sn = cand[base + roulette_select(weights, rng)];

    const int near = grid.nearest(x_sn, v);
    const Point2 x_near = v[near].position;
    const double d = distance(x_near, x_sn);
    if (d <= 0.0) continue;
    const Point2 x_new = d <= params.d_near ? x_sn : x_near + (params.d_near / d) * (x_sn - x_near);
    if (!space.segment_free(x_near, x_new)) continue;

    const auto neighbours = grid.within(x_new, params.d_near, v);
    int parent = near;
    double best_cost = v[near].cost + distance(x_near, x_new);
    for (int u : neighbours) {
      const double c = v[u].cost + distance(v[u].position, x_new);
      if (c < best_cost - kCostTol && space.segment_free(v[u].position, x_new)) {
        best_cost = c;
        parent = u;
      }
    }
    const int id = static_cast<int>(v.size());
    v.push_back({x_new, 0.0, best_cost, parent});
    children.push_back({});
    children[parent].push_back(id);
    grid.insert(id, x_new);

    // Cascading rewire: any vertex whose cost dropped may improve its neighbours.
    std::deque<int> queue{id};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int w : grid.within(v[u].position, params.d_near, v)) {
        if (w == u || w == 0) continue;
        const double c = v[u].cost + distance(v[u].position, v[w].position);
        if (c >= v[w].cost - kCostTol) continue;
        if (!space.segment_free(v[u].position, v[w].position)) continue;
        auto& siblings = children[v[w].parent];
        siblings.erase(std::find(siblings.begin(), siblings.end(), w));
        v[w].parent = u;
        children[u].push_back(w);
        const double delta = c - v[w].cost;
        v[w].cost = c;
        shift_subtree(w, delta, queue);
      }
    }
  }

  std::vector<Point2> pos;
  pos.reserve(v.size());
  for (const auto& x : v) pos.push_back(x.position);
  const auto sigma = gp.posterior_std_batch(pos);
  for (std::size_t i = 0; i < v.size(); ++i) v[i].sigma = sigma[i];
  return tree;
}

std::vector<Point2> best_path(const PlanTree& tree) {
  if (tree.vertices.empty()) throw std::invalid_argument("best_path: empty tree");
  const auto& v = tree.vertices;
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].sigma > v[best].sigma || (v[i].sigma == v[best].sigma && v[i].cost < v[best].cost)) {
      best = i;
    }
  }
  std::vector<Point2> path;
  for (int u = static_cast<int>(best); u >= 0; u = v[u].parent) path.push_back(v[u].position);
  std::reverse(path.begin(), path.end());
  return path;
}

void write_tree_csv(const PlanTree& tree, std::ostream& out) {
  out << "id,parent,x,y,sigma,cost\n" << std::setprecision(10);
  for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
    const auto& x = tree.vertices[i];
    out << i << ',' << x.parent << ',' << x.position.x << ',' << x.position.y << ',' << x.sigma
        << ',' << x.cost << '\n';
  }
}

}  // namespace tactile
