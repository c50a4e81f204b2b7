#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tactile/geometry.hpp"

namespace tactile {

constexpr double kDefaultLengthscale = 0.08;
constexpr double kDefaultGpNoise = 0.02;

struct Observation {
  Point2 position;
  double occupied = 0.0;  // 0 or 1
};

/// Unit-variance RBF kernel exp(-|a-b|^2 / (2 l^2)).
double kernel(Point2 a, Point2 b, double lengthscale);

/// GP regression on 0/1 occupancy labels with zero prior mean. The lower Cholesky
/// factor of (K + noise^2 I) is extended by one row per observation and rebuilt
/// from scratch every `rebuild_interval` additions.
class GpOccupancyModel {
 public:
  explicit GpOccupancyModel(double lengthscale = kDefaultLengthscale,
                            double noise = kDefaultGpNoise, int rebuild_interval = 256);

  /// Returns false when the position is within 1e-9 of an existing observation;
  /// the stored label then becomes the max of both labels.
  bool add_observation(const Observation& obs);

  [[nodiscard]] std::size_t size() const { return obs_.size(); }
  [[nodiscard]] const std::vector<Observation>& observations() const { return obs_; }
  [[nodiscard]] double lengthscale() const { return l_; }
  [[nodiscard]] double noise() const { return noise_; }

  [[nodiscard]] double posterior_std(Point2 query) const;
  [[nodiscard]] std::vector<double> posterior_std_batch(std::span<const Point2> queries) const;
  [[nodiscard]] double posterior_mean(Point2 query) const;
  [[nodiscard]] std::vector<double> posterior_mean_batch(std::span<const Point2> queries) const;

  /// Current lower-triangular factor (size x size).
  [[nodiscard]] Eigen::MatrixXd cholesky_factor() const;

  /// Refactorizes (K + noise^2 I) from scratch.
  void rebuild();

 private:
  [[nodiscard]] Eigen::MatrixXd cross_kernel(std::span<const Point2> queries) const;
  void ensure_capacity(std::size_t n);
  const Eigen::VectorXd& alpha() const;

  double l_;
  double noise_;
  int rebuild_interval_;
  int since_rebuild_ = 0;
  std::vector<Observation> obs_;
  Eigen::MatrixXd chol_;  // capacity x capacity; top-left size x size block is valid
  mutable Eigen::VectorXd alpha_;
  mutable bool alpha_valid_ = false;
};

}  // namespace tactile
