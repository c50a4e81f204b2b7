#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tactile/ctnet.hpp"

namespace tactile::check {

inline PointSetSample random_sample(std::mt19937_64& rng, int n_contour, int n_probes, int n_classes) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), h(0.0, 0.8);
  PointSetSample s;
  for (int i = 0; i < n_contour; ++i) s.contour.push_back({u(rng), u(rng), 0.0});
  for (int i = 0; i < n_probes; ++i) s.probes.push_back({0.5 * u(rng), 0.5 * u(rng), h(rng)});
  s.label = std::uniform_int_distribution<int>(0, n_classes - 1)(rng);
  return s;
}

struct Block {
  std::size_t begin, end;
};

// Weight and bias ranges in parameter order: lift stages, fusion, head hidden, output.
inline std::vector<Block> parameter_blocks(const CtNetShape& s) {
  std::vector<Block> out;
  std::size_t pos = 0;
  auto add = [&](int rows, int cols) {
    out.push_back({pos, pos + static_cast<std::size_t>(rows) * cols});
    pos += static_cast<std::size_t>(rows) * cols;
    out.push_back({pos, pos + static_cast<std::size_t>(cols)});
    pos += cols;
  };
  int in = s.input_dim, sum = 0;
  for (int w : s.widths) {
    add(in, w);
    sum += w;
    in = w;
  }
  add(sum, s.widths.back());
  add(s.widths.back(), s.head_hidden);
  add(s.head_hidden, s.n_classes);
  return out;
}

inline bool close_rel(double analytic, double numeric, double rel, double abs_floor = 1e-9) {
  return std::fabs(analytic - numeric) <=
         rel * std::max(std::fabs(analytic), std::fabs(numeric)) + abs_floor;
}

struct GradCheck {
  int checked = 0;
  int failed = 0;
  double worst = 0.0;
};

// Central differences (h = 1e-5) on `per_block` random entries of every block.
inline GradCheck gradient_check(CtNetModel& model, const std::vector<const PointSetSample*>& batch,
                                int per_block, std::mt19937_64& rng, double rel = 1e-4) {
  std::vector<double> grad;
  model.loss_and_gradient(batch, grad);
  GradCheck r;
  const double h = 1e-5;
  auto& w = model.parameters();
  for (const auto& b : parameter_blocks(model.shape())) {
    std::uniform_int_distribution<std::size_t> pick(b.begin, b.end - 1);
    for (int k = 0; k < per_block; ++k) {
      const std::size_t i = pick(rng);
      const double w0 = w[i];
      w[i] = w0 + h;
      const double lp = model.loss(batch);
      w[i] = w0 - h;
      const double lm = model.loss(batch);
      w[i] = w0;
      const double numeric = (lp - lm) / (2.0 * h);
      ++r.checked;
      if (!close_rel(grad[i], numeric, rel)) ++r.failed;
      const double scale = std::max({std::fabs(grad[i]), std::fabs(numeric), 1e-9});
      r.worst = std::max(r.worst, std::fabs(grad[i] - numeric) / scale);
    }
  }
  return r;
}

// Zero initial biases put points whose first-stage units are all off exactly on a
// ReLU kink; a small shift of every parameter moves the model to a generic point.
inline void jitter_parameters(CtNetModel& model, std::mt19937_64& rng, double scale = 0.05) {
  std::normal_distribution<double> g(0.0, scale);
  for (double& w : model.parameters()) w += g(rng);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace tactile::check
