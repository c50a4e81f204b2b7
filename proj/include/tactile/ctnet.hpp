#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/geometry.hpp"

namespace tactile {

/// Contour points (z = 0) plus probe points, with a class label.
struct PointSetSample {
  std::vector<Point3> contour;
  std::vector<Point3> probes;
  int label = 0;

  [[nodiscard]] std::vector<Point3> points() const;
};

struct CtNetShape {
  int input_dim = 3;
  std::vector<int> widths{64, 128, 256};  // per-point lift stages; fusion width = widths.back()
  int head_hidden = 128;
  int n_classes = 8;

  void validate() const;
  [[nodiscard]] std::size_t parameter_count() const;
  bool operator==(const CtNetShape&) const = default;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point-set classifier: per-point lift stages with ReLU, a fused shortcut
/// (concat of all stages -> affine -> ReLU, added to the last stage), max pooling
/// over points, then affine -> ReLU -> affine -> softmax.
class CtNetModel {
 public:
  CtNetModel() : CtNetModel(CtNetShape{}, 0) {}
  /// He-uniform weights, zero biases.
  CtNetModel(CtNetShape shape, std::uint64_t seed);

  [[nodiscard]] const CtNetShape& shape() const { return shape_; }
  [[nodiscard]] std::vector<double>& parameters() { return params_; }
  [[nodiscard]] const std::vector<double>& parameters() const { return params_; }

  /// Class probabilities. Throws std::invalid_argument for an empty point list.
  [[nodiscard]] std::vector<double> forward(const PointSetSample& sample) const;
  [[nodiscard]] std::vector<double> forward(const std::vector<Point3>& points) const;
  [[nodiscard]] int predict(const PointSetSample& sample) const;
  /// Batched prediction; labels of the samples are ignored.
  [[nodiscard]] std::vector<int> predict(const std::vector<PointSetSample>& samples) const;

  /// Mean cross-entropy over the batch; `grad` (resized to parameter_count) receives
  /// its exact gradient. Max pooling routes each coordinate to its first argmax point.
  /// `predictions`, if given, receives the argmax class of each sample.
  double loss_and_gradient(const std::vector<const PointSetSample*>& batch,
                           std::vector<double>& grad,
                           std::vector<int>* predictions = nullptr) const;
  double loss(const std::vector<const PointSetSample*>& batch) const;

  /// Gradient of a single sample's loss with respect to its input points (P x 3).
  [[nodiscard]] Eigen::MatrixXd input_gradient(const PointSetSample& sample) const;

  void save(std::ostream& out) const;
  /// Reads a checkpoint, taking the shape from its header.
  static CtNetModel load(std::istream& in);
  /// Reads a checkpoint into this model; throws CheckpointError on a shape mismatch.
  void load_into(std::istream& in);

 private:
  struct Batch;
  void run(Batch& b) const;
  double backprop(Batch& b, std::vector<double>* grad, Eigen::MatrixXd* dinput) const;

  CtNetShape shape_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each weight/bias block
};

using TrainRng = std::mt19937_64;

/// Planar rotation of contour and probe x,y about the contour centroid; z unchanged.
PointSetSample rotate_sample(const PointSetSample& sample, double angle);
PointSetSample augment_rotation(const PointSetSample& sample, TrainRng& rng);

struct TrainConfig {
  double learning_rate = 1e-4;
  int episodes = 500;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool augment = true;
  /// Learning rate is multiplied by decay_factor every decay_every episodes (0: never).
  int decay_every = 0;
  double decay_factor = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Validation accuracy is evaluated every eval_every episodes and after the last one.
  int eval_every = 1;
};

struct EpisodeStats {
  int episode = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // over the episode's (augmented) batches, before each update
  double validation_accuracy = 0.0;  // NaN without a validation set
};

struct TrainHistory {
  std::vector<EpisodeStats> episodes;
};

TrainHistory train(CtNetModel& model, const std::vector<PointSetSample>& train_set,
                   const std::vector<PointSetSample>& validation_set, const TrainConfig& config);

double accuracy(const CtNetModel& model, const std::vector<PointSetSample>& samples);

}  // namespace tactile
