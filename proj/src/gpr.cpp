#include "tactile/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kJitter = 1e-10;
constexpr double kMergeDistance = 1e-9;
constexpr Eigen::Index kQueryChunk = 4096;

}  // namespace

double kernel(Point2 a, Point2 b, double lengthscale) {
  return std::exp(-squared_norm(a - b) / (2.0 * lengthscale * lengthscale));
}

GpOccupancyModel::GpOccupancyModel(double lengthscale, double noise, int rebuild_interval)
    : l_(lengthscale), noise_(noise), rebuild_interval_(rebuild_interval) {
  if (!(lengthscale > 0.0)) throw std::invalid_argument("GP lengthscale must be > 0");
  if (!(noise > 0.0)) throw std::invalid_argument("GP noise must be > 0");
  if (rebuild_interval < 1) throw std::invalid_argument("GP rebuild interval must be >= 1");
}

void GpOccupancyModel::ensure_capacity(std::size_t n) {
  const auto cap = static_cast<std::size_t>(chol_.rows());
  if (n <= cap) return;
  const std::size_t new_cap = std::max<std::size_t>(n, std::max<std::size_t>(16, 2 * cap));
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(new_cap, new_cap);
  const auto m = static_cast<Eigen::Index>(obs_.size());
  grown.topLeftCorner(m, m) = chol_.topLeftCorner(m, m);
  chol_.swap(grown);
}

bool GpOccupancyModel::add_observation(const Observation& obs) {
  if (!is_finite(obs.position)) throw std::invalid_argument("GP observation not finite");
  for (auto& o : obs_) {
    if (distance(o.position, obs.position) <= kMergeDistance) {
      if (obs.occupied > o.occupied) {
        o.occupied = obs.occupied;
        alpha_valid_ = false;
      }
      return false;
    }
  }
  const auto n = static_cast<Eigen::Index>(obs_.size());
  ensure_capacity(obs_.size() + 1);
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(obs_[i].position, obs.position, l_);
  if (n > 0) {
    chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(k);
    chol_.block(n, 0, 1, n) = k.transpose();
  }
  double pivot = 1.0 + noise_ * noise_ - k.squaredNorm();
  if (!(pivot > 0.0)) pivot = std::max(pivot, 0.0) + kJitter;
  chol_(n, n) = std::sqrt(pivot);
  obs_.push_back(obs);
  alpha_valid_ = false;
  if (++since_rebuild_ >= rebuild_interval_) rebuild();
  return true;
}

void GpOccupancyModel::rebuild() {
  since_rebuild_ = 0;
  alpha_valid_ = false;
  const auto n = static_cast<Eigen::Index>(obs_.size());
  if (n == 0) return;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      a(i, j) = kernel(obs_[i].position, obs_[j].position, l_);
    }
    a(i, i) += noise_ * noise_;
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  llt.compute(a);
  if (llt.info() != Eigen::Success) {
    a.diagonal().array() += kJitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success) throw std::runtime_error("GP factorization failed");
  }
  chol_.topLeftCorner(n, n) = llt.matrixL();
}

Eigen::MatrixXd GpOccupancyModel::cholesky_factor() const {
  const auto n = static_cast<Eigen::Index>(obs_.size());
  Eigen::MatrixXd out = chol_.topLeftCorner(n, n);
  return out.triangularView<Eigen::Lower>();
}

Eigen::MatrixXd GpOccupancyModel::cross_kernel(std::span<const Point2> queries) const {
  const auto n = static_cast<Eigen::Index>(obs_.size());
  const auto m = static_cast<Eigen::Index>(queries.size());
  Eigen::MatrixXd k(n, m);
  const double inv = -1.0 / (2.0 * l_ * l_);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, j) = std::exp(inv * squared_norm(obs_[i].position - queries[j]));
    }
  }
  return k;
}

const Eigen::VectorXd& GpOccupancyModel::alpha() const {
  if (!alpha_valid_) {
    const auto n = static_cast<Eigen::Index>(obs_.size());
    alpha_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) alpha_(i) = obs_[i].occupied;
    const auto l = chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
    l.solveInPlace(alpha_);
    l.transpose().solveInPlace(alpha_);
    alpha_valid_ = true;
  }
  return alpha_;
}

double GpOccupancyModel::posterior_std(Point2 query) const {
  return posterior_std_batch(std::span<const Point2>(&query, 1))[0];
}

std::vector<double> GpOccupancyModel::posterior_std_batch(std::span<const Point2> queries) const {
  std::vector<double> out(queries.size(), 1.0);
  const auto n = static_cast<Eigen::Index>(obs_.size());
  if (n == 0 || queries.empty()) return out;
  const auto l = chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  for (std::size_t start = 0; start < queries.size(); start += kQueryChunk) {
    const std::size_t count = std::min<std::size_t>(kQueryChunk, queries.size() - start);
    Eigen::MatrixXd v = cross_kernel(queries.subspan(start, count));
    l.solveInPlace(v);
    for (std::size_t j = 0; j < count; ++j) {
      const double var = 1.0 - v.col(static_cast<Eigen::Index>(j)).squaredNorm();
      out[start + j] = std::sqrt(std::clamp(var, 0.0, 1.0));
    }
  }
  return out;
}

double GpOccupancyModel::posterior_mean(Point2 query) const {
  return posterior_mean_batch(std::span<const Point2>(&query, 1))[0];
}

std::vector<double> GpOccupancyModel::posterior_mean_batch(
    std::span<const Point2> queries) const {
  std::vector<double> out(queries.size(), 0.0);
  if (obs_.empty() || queries.empty()) return out;
  const Eigen::VectorXd& a = alpha();
  for (std::size_t start = 0; start < queries.size(); start += kQueryChunk) {
    const std::size_t count = std::min<std::size_t>(kQueryChunk, queries.size() - start);
    const Eigen::VectorXd mean =
        cross_kernel(queries.subspan(start, count)).transpose() * a;
    for (std::size_t j = 0; j < count; ++j) out[start + j] = mean(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace tactile
