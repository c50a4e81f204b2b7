#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/gpr.hpp"
#include "tactile/scene.hpp"

namespace tactile {

using Rng = std::mt19937_64;

/// Task space minus the (dilated) polygons of objects found so far.
struct SearchSpace {
  TaskSpace task_space;
  std::vector<Polygon> occupied;

  [[nodiscard]] bool is_free(Point2 p) const;
  /// Segment stays inside the task space and touches no occupied polygon.
  [[nodiscard]] bool segment_free(Point2 a, Point2 b) const;
};

/// Each contour grown outward by `dilation` (mitered vertex offset).
std::vector<Polygon> predict_occupancy_polygons(const std::vector<Polygon>& contours,
                                                double dilation);

/// Nearest free point when p lies inside an occupied polygon (p itself otherwise):
/// the closest boundary point of the enclosing polygon, nudged outward.
Point2 escape_point(const SearchSpace& space, Point2 p);

/// Selection probabilities (s^k_r + eps) / sum_j (s_j^k_r + eps).
std::vector<double> roulette_probabilities(std::span<const double> sigma, double k_r,
                                           double epsilon);
/// Index drawn with the given (not necessarily normalized) weights.
std::size_t roulette_select(std::span<const double> weights, Rng& rng);

struct Candidate {
  Point2 position;
  double sigma = 0.0;
};

/// Uniform free-space point; throws std::runtime_error after max_attempts rejections.
Point2 sample_free(const SearchSpace& space, Rng& rng, int max_attempts);

/// Draws n free candidates, scores them by posterior std, and picks one by roulette.
Candidate uncertainty_sampling(const SearchSpace& space, const GpOccupancyModel& gp,
                               int n, double k_r, double epsilon, Rng& rng);

struct TosParams {
  int n_tree = 1000;
  double d_near = 0.10;
  int n_candidates = 20;
  double k_r = 3.0;
  double epsilon = 1e-9;
};

struct PlanTree {
  struct Vertex {
    Point2 position;
    double sigma = 0.0;
    double cost = 0.0;  // path length from the root
    int parent = -1;
  };
  std::vector<Vertex> vertices;  // vertex 0 is the root
};

/// RRT*-style expansion from `root` driven by roulette-selected uncertain samples.
/// Rewiring relaxes costs transitively, so that afterwards no vertex can be reached
/// more cheaply through a collision-free neighbour within d_near.
PlanTree expand_tree(const SearchSpace& space, const GpOccupancyModel& gp,
                     const TosParams& params, Point2 root, Rng& rng);

/// Root-first path to the vertex of largest sigma (ties: lower cost, then earlier vertex).
std::vector<Point2> best_path(const PlanTree& tree);

/// CSV `id,parent,x,y,sigma,cost`.
void write_tree_csv(const PlanTree& tree, std::ostream& out);

}  // namespace tactile
