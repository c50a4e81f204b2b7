#include "tactile/ctnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <immintrin.h>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace tactile {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;

namespace {

constexpr char kMagic[4] = {'C', 'T', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename M>
M relu(const M& z) { return z.cwiseMax(0.0); }

template <typename M>
M relu_mask(const M& z) { return (z.array() > 0.0).template cast<double>().matrix(); }

// out.row(p) += x.row(p) * w with one fma per term in a fixed order, so equal input
// rows give bitwise equal output rows wherever they sit in the batch.
// o[j] = fma(a, w[j], o[j]) for j in [j0, n)
inline void axpy_tail(double a, const double* w, double* o, Eigen::Index j0, Eigen::Index n) {
  for (Eigen::Index j = j0; j < n; ++j) o[j] = std::fma(a, w[j], o[j]);
}

template <typename W>
void rowwise_product(const RMat& x, const W& w, RMat& out) {
  const RMat wr = w;
  const Eigen::Index n = wr.cols(), m = x.cols(), rows = x.rows();
  Eigen::Index p = 0;
#ifdef __FMA__
  constexpr int R = 6;
  for (; p + R <= rows; p += R) {
    Eigen::Index j0 = 0;
    for (; j0 + 8 <= n; j0 += 8) {
      __m256d acc[R][2];
      for (int r = 0; r < R; ++r) {
        acc[r][0] = _mm256_loadu_pd(&out(p + r, j0));
        acc[r][1] = _mm256_loadu_pd(&out(p + r, j0 + 4));
      }
      for (Eigen::Index k = 0; k < m; ++k) {
        const __m256d w0 = _mm256_loadu_pd(&wr(k, j0));
        const __m256d w1 = _mm256_loadu_pd(&wr(k, j0 + 4));
        for (int r = 0; r < R; ++r) {
          const __m256d a = _mm256_set1_pd(x(p + r, k));
          acc[r][0] = _mm256_fmadd_pd(a, w0, acc[r][0]);
          acc[r][1] = _mm256_fmadd_pd(a, w1, acc[r][1]);
        }
      }
      for (int r = 0; r < R; ++r) {
        _mm256_storeu_pd(&out(p + r, j0), acc[r][0]);
        _mm256_storeu_pd(&out(p + r, j0 + 4), acc[r][1]);
      }
    }
    if (j0 < n) {
      for (int r = 0; r < R; ++r) {
        for (Eigen::Index k = 0; k < m; ++k) {
          axpy_tail(x(p + r, k), wr.row(k).data(), out.row(p + r).data(), j0, n);
        }
      }
    }
  }
#endif
  for (; p < rows; ++p) {
    for (Eigen::Index k = 0; k < m; ++k) axpy_tail(x(p, k), wr.row(k).data(), out.row(p).data(), 0, n);
  }
}

}  // namespace

std::vector<Point3> PointSetSample::points() const {
  std::vector<Point3> out(contour);
  out.insert(out.end(), probes.begin(), probes.end());
  return out;
}

void CtNetShape::validate() const {
  if (input_dim != 3 || widths.empty() || head_hidden < 1 || n_classes < 2) {
    throw std::invalid_argument("CtNetShape: invalid dimensions");
  }
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("CtNetShape: widths must be positive");
  }
}

std::size_t CtNetShape::parameter_count() const {
  std::size_t n = 0;
  int in = input_dim, sum = 0;
  for (int w : widths) {
    n += static_cast<std::size_t>(in) * w + w;
    sum += w;
    in = w;
  }
  const int f = widths.back();
  n += static_cast<std::size_t>(sum) * f + f;
  n += static_cast<std::size_t>(f) * head_hidden + head_hidden;
  n += static_cast<std::size_t>(head_hidden) * n_classes + n_classes;
  return n;
}

CtNetModel::CtNetModel(CtNetShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  shape_.validate();
  params_.assign(shape_.parameter_count(), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t pos = 0;
  auto block = [&](int rows, int cols, double bound) {
    offsets_.push_back(pos);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (int i = 0; i < rows * cols; ++i) params_[pos++] = u(rng);
    offsets_.push_back(pos);
    pos += cols;  // bias
  };
  int in = shape_.input_dim, sum = 0;
  for (int w : shape_.widths) {
    block(in, w, std::sqrt(6.0 / in));
    sum += w;
    in = w;
  }
  const int f = shape_.widths.back();
  block(sum, f, std::sqrt(6.0 / sum));
  block(f, shape_.head_hidden, std::sqrt(6.0 / f));
  // A small output layer keeps the initial predictions close to uniform.
  block(shape_.head_hidden, shape_.n_classes, 0.1 * std::sqrt(6.0 / (shape_.head_hidden + shape_.n_classes)));
}

struct CtNetModel::Batch {
  Mat x;                       // all points, one per row
  std::vector<int> start;      // first row of each sample (size B + 1)
  std::vector<int> labels;
  std::vector<RMat> z, h;      // per stage pre-activation / activation, one row per point
  RMat u, fused;
  Mat g, z1, h1, logits, prob;
  Eigen::MatrixXi arg;         // B x F argmax rows
};

void CtNetModel::run(Batch& b) const {
  const int k_stages = static_cast<int>(shape_.widths.size());
  const int f = shape_.widths.back();
  int in = shape_.input_dim, sum = 0;
  b.z.resize(k_stages);
  b.h.resize(k_stages);
  const Eigen::Index np = b.x.rows();
  const RMat x = b.x;
  for (int k = 0; k < k_stages; ++k) {
    const int w = shape_.widths[k];
    const CMap wk(&params_[offsets_[2 * k]], in, w);
    const Eigen::Map<const Eigen::RowVectorXd> bk(&params_[offsets_[2 * k + 1]], w);
    b.z[k] = bk.replicate(np, 1);
    rowwise_product(k ? b.h[k - 1] : x, wk, b.z[k]);
    b.h[k] = relu(b.z[k]);
    sum += w;
    in = w;
  }
  const CMap r(&params_[offsets_[2 * k_stages]], sum, f);
  const Eigen::Map<const Eigen::RowVectorXd> c(&params_[offsets_[2 * k_stages + 1]], f);
  b.u = c.replicate(np, 1);
  int row = 0;
  for (int k = 0; k < k_stages; ++k) {
    rowwise_product(b.h[k], r.middleRows(row, shape_.widths[k]), b.u);
    row += shape_.widths[k];
  }
  b.fused = b.h[k_stages - 1] + relu(b.u);

  const int nb = static_cast<int>(b.start.size()) - 1;
  b.g.resize(nb, f);
  b.arg.resize(nb, f);
  for (int s = 0; s < nb; ++s) {
    // First argmax per coordinate.
    std::vector<double> best(b.fused.row(b.start[s]).data(), b.fused.row(b.start[s]).data() + f);
    std::vector<int> arg(f, b.start[s]);
    for (int p = b.start[s] + 1; p < b.start[s + 1]; ++p) {
      const double* v = b.fused.row(p).data();
      for (int j = 0; j < f; ++j) {
        if (v[j] > best[j]) {
          best[j] = v[j];
          arg[j] = p;
        }
      }
    }
    for (int j = 0; j < f; ++j) {
      b.g(s, j) = best[j];
      b.arg(s, j) = arg[j];
    }
  }

  const int hh = shape_.head_hidden, n = shape_.n_classes;
  const CMap a1(&params_[offsets_[2 * k_stages + 2]], f, hh);
  const Eigen::Map<const Eigen::RowVectorXd> a1b(&params_[offsets_[2 * k_stages + 3]], hh);
  const CMap a2(&params_[offsets_[2 * k_stages + 4]], hh, n);
  const Eigen::Map<const Eigen::RowVectorXd> a2b(&params_[offsets_[2 * k_stages + 5]], n);
  b.z1 = (b.g * a1).rowwise() + a1b;
  b.h1 = relu(b.z1);
  b.logits = (b.h1 * a2).rowwise() + a2b;
  b.prob.resize(nb, n);
  for (int s = 0; s < nb; ++s) {
    const double m = b.logits.row(s).maxCoeff();
    const Eigen::RowVectorXd e = (b.logits.row(s).array() - m).exp().matrix();
    b.prob.row(s) = e / e.sum();
  }
}

double CtNetModel::backprop(Batch& b, std::vector<double>* grad, Eigen::MatrixXd* dinput) const {
  const int k_stages = static_cast<int>(shape_.widths.size());
  const int f = shape_.widths.back(), hh = shape_.head_hidden, n = shape_.n_classes;
  const int nb = static_cast<int>(b.labels.size());

  double loss = 0.0;
  Mat dl = b.prob;
  for (int s = 0; s < nb; ++s) {
    const double m = b.logits.row(s).maxCoeff();
    const double lse = m + std::log((b.logits.row(s).array() - m).exp().sum());
    loss += lse - b.logits(s, b.labels[s]);
    dl(s, b.labels[s]) -= 1.0;
  }
  loss /= nb;
  dl /= nb;
  if (!grad && !dinput) return loss;

  std::vector<double> dummy;
  std::vector<double>& gr = grad ? *grad : dummy;
  gr.assign(params_.size(), 0.0);
  auto gmat = [&](int block, int rows, int cols) { return MMap(&gr[offsets_[block]], rows, cols); };
  auto gvec = [&](int block, int cols) {
    return Eigen::Map<Eigen::RowVectorXd>(&gr[offsets_[block]], cols);
  };

  const CMap a1(&params_[offsets_[2 * k_stages + 2]], f, hh);
  const CMap a2(&params_[offsets_[2 * k_stages + 4]], hh, n);
  if (grad) {
    gmat(2 * k_stages + 4, hh, n).noalias() = b.h1.transpose() * dl;
    gvec(2 * k_stages + 5, n) = dl.colwise().sum();
  }
  const Mat dz1 = (dl * a2.transpose()).cwiseProduct(relu_mask(b.z1));
  if (grad) {
    gmat(2 * k_stages + 2, f, hh).noalias() = b.g.transpose() * dz1;
    gvec(2 * k_stages + 3, hh) = dz1.colwise().sum();
  }
  const Mat dg = dz1 * a1.transpose();

  RMat dfused = RMat::Zero(b.x.rows(), f);
  for (int s = 0; s < nb; ++s) {
    for (int j = 0; j < f; ++j) dfused(b.arg(s, j), j) += dg(s, j);
  }

  int sum = 0;
  for (int w : shape_.widths) sum += w;
  const CMap r(&params_[offsets_[2 * k_stages]], sum, f);
  const RMat du = dfused.cwiseProduct(relu_mask(b.u));
  std::vector<RMat> dh(k_stages);
  int row = 0;
  for (int k = 0; k < k_stages; ++k) {
    const int w = shape_.widths[k];
    if (grad) gmat(2 * k_stages, sum, f).middleRows(row, w).noalias() = b.h[k].transpose() * du;
    dh[k] = du * r.middleRows(row, w).transpose();
    row += w;
  }
  if (grad) gvec(2 * k_stages + 1, f) = du.colwise().sum();
  dh[k_stages - 1] += dfused;

  for (int k = k_stages - 1; k >= 0; --k) {
    const int w = shape_.widths[k];
    const int in = k ? shape_.widths[k - 1] : shape_.input_dim;
    const RMat dz = dh[k].cwiseProduct(relu_mask(b.z[k]));
    if (grad) {
      if (k) {
        gmat(2 * k, in, w).noalias() = b.h[k - 1].transpose() * dz;
      } else {
        gmat(2 * k, in, w).noalias() = b.x.transpose() * dz;
      }
      gvec(2 * k + 1, w) = dz.colwise().sum();
    }
    const CMap wk(&params_[offsets_[2 * k]], in, w);
    if (k) {
      dh[k - 1].noalias() += dz * wk.transpose();
    } else if (dinput) {
      *dinput = dz * wk.transpose();
    }
  }
  return loss;
}

namespace {

void fill_points(Mat& x, int row, const std::vector<Point3>& pts) {
  for (const auto& p : pts) {
    x(row, 0) = p.x;
    x(row, 1) = p.y;
    x(row, 2) = p.z;
    ++row;
  }
}

}  // namespace

std::vector<double> CtNetModel::forward(const std::vector<Point3>& points) const {
  if (points.empty()) throw std::invalid_argument("forward: empty point list");
  Batch b;
  b.x.resize(static_cast<Eigen::Index>(points.size()), 3);
  fill_points(b.x, 0, points);
  b.start = {0, static_cast<int>(points.size())};
  run(b);
  return {b.prob.data(), b.prob.data() + b.prob.size()};
}

std::vector<double> CtNetModel::forward(const PointSetSample& sample) const {
  return forward(sample.points());
}

int CtNetModel::predict(const PointSetSample& sample) const {
  const auto p = forward(sample);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

namespace {

std::vector<int> argmax_rows(const Mat& prob) {
  std::vector<int> out;
  for (Eigen::Index s = 0; s < prob.rows(); ++s) {
    int best = 0;
    for (int j = 1; j < prob.cols(); ++j) {
      if (prob(s, j) > prob(s, best)) best = j;
    }
    out.push_back(best);
  }
  return out;
}

template <typename Batch>
void build_batch(Batch& b, const std::vector<const PointSetSample*>& batch, int n_classes,
                 bool check_labels = true) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  int total = 0;
  b.start.push_back(0);
  for (const auto* s : batch) {
    const int np = static_cast<int>(s->contour.size() + s->probes.size());
    if (np == 0) throw std::invalid_argument("forward: empty point list");
    if (check_labels && (s->label < 0 || s->label >= n_classes)) throw std::invalid_argument("label out of range");
    total += np;
    b.start.push_back(total);
    b.labels.push_back(s->label);
  }
  b.x.resize(total, 3);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    fill_points(b.x, b.start[i], batch[i]->contour);
    fill_points(b.x, b.start[i] + static_cast<int>(batch[i]->contour.size()), batch[i]->probes);
  }
}

}  // namespace

double CtNetModel::loss_and_gradient(const std::vector<const PointSetSample*>& batch,
                                     std::vector<double>& grad,
                                     std::vector<int>* predictions) const {
  Batch b;
  build_batch(b, batch, shape_.n_classes);
  run(b);
  if (predictions) *predictions = argmax_rows(b.prob);
  return backprop(b, &grad, nullptr);
}

double CtNetModel::loss(const std::vector<const PointSetSample*>& batch) const {
  Batch b;
  build_batch(b, batch, shape_.n_classes);
  run(b);
  return backprop(b, nullptr, nullptr);
}

Eigen::MatrixXd CtNetModel::input_gradient(const PointSetSample& sample) const {
  Batch b;
  build_batch(b, {&sample}, shape_.n_classes);
  run(b);
  Mat dx;
  backprop(b, nullptr, &dx);
  return dx;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw CheckpointError("checkpoint truncated");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

CtNetShape read_header(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("not a CT-Net checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  CtNetShape s;
  s.input_dim = get<std::int32_t>(in);
  const auto stages = get<std::int32_t>(in);
  if (stages < 1 || stages > 64) throw CheckpointError("bad stage count in checkpoint");
  s.widths.resize(stages);
  for (auto& w : s.widths) w = get<std::int32_t>(in);
  s.head_hidden = get<std::int32_t>(in);
  s.n_classes = get<std::int32_t>(in);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("bad checkpoint shape: ") + e.what());
  }
  return s;
}

}  // namespace

void CtNetModel::save(std::ostream& out) const {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, shape_.input_dim);
  put<std::int32_t>(out, static_cast<std::int32_t>(shape_.widths.size()));
  for (int w : shape_.widths) put<std::int32_t>(out, w);
  put<std::int32_t>(out, shape_.head_hidden);
  put<std::int32_t>(out, shape_.n_classes);
  put<std::uint64_t>(out, params_.size());
  for (double p : params_) put<double>(out, p);
}

CtNetModel CtNetModel::load(std::istream& in) {
  CtNetModel m(read_header(in), 0);
  const auto count = get<std::uint64_t>(in);
  if (count != m.params_.size()) throw CheckpointError("parameter count does not match shape");
  for (auto& p : m.params_) p = get<double>(in);
  return m;
}

void CtNetModel::load_into(std::istream& in) {
  const CtNetShape s = read_header(in);
  if (!(s == shape_)) throw CheckpointError("checkpoint layer shapes do not match the model");
  const auto count = get<std::uint64_t>(in);
  if (count != params_.size()) throw CheckpointError("parameter count does not match shape");
  std::vector<double> p(params_.size());
  for (auto& x : p) x = get<double>(in);
  params_ = std::move(p);
}

PointSetSample rotate_sample(const PointSetSample& sample, double angle) {
  PointSetSample out = sample;
  if (sample.contour.empty()) return out;
  double cx = 0.0, cy = 0.0;
  for (const auto& p : sample.contour) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(sample.contour.size());
  cy /= static_cast<double>(sample.contour.size());
  const double c = std::cos(angle), s = std::sin(angle);
  auto rot = [&](Point3& p) {
    const double dx = p.x - cx, dy = p.y - cy;
    p.x = cx + c * dx - s * dy;
    p.y = cy + s * dx + c * dy;
  };
  for (auto& p : out.contour) rot(p);
  for (auto& p : out.probes) rot(p);
  return out;
}

PointSetSample augment_rotation(const PointSetSample& sample, TrainRng& rng) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  return rotate_sample(sample, std::uniform_real_distribution<double>(0.0, two_pi)(rng));
}

std::vector<int> CtNetModel::predict(const std::vector<PointSetSample>& samples) const {
  std::vector<int> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t first = 0; first < samples.size(); first += kChunk) {
    const std::size_t last = std::min(samples.size(), first + kChunk);
    std::vector<const PointSetSample*> chunk;
    for (std::size_t i = first; i < last; ++i) chunk.push_back(&samples[i]);
    Batch b;
    build_batch(b, chunk, shape_.n_classes, false);
    run(b);
    for (int c : argmax_rows(b.prob)) out.push_back(c);
  }
  return out;
}

double accuracy(const CtNetModel& model, const std::vector<PointSetSample>& samples) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = model.predict(samples);
  int correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) correct += pred[i] == samples[i].label;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainHistory train(CtNetModel& model, const std::vector<PointSetSample>& train_set,
                   const std::vector<PointSetSample>& validation_set, const TrainConfig& config) {
  if (config.episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  {
    std::vector<int> labels;
    for (const auto& s : train_set) labels.push_back(s.label);
    std::sort(labels.begin(), labels.end());
    if (labels.front() == labels.back()) throw std::invalid_argument("train: need at least 2 classes");
  }

  TrainRng rng(config.seed);
  auto& w = model.parameters();
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0), grad;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  double lr = config.learning_rate;
  long step = 0;
  TrainHistory history;

  for (int ep = 0; ep < config.episodes; ++ep) {
    if (config.decay_every > 0 && ep > 0 && ep % config.decay_every == 0) lr *= config.decay_factor;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int correct = 0;
    std::vector<int> pred;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t last = std::min(order.size(), first + config.batch_size);
      std::vector<PointSetSample> augmented;
      std::vector<const PointSetSample*> batch;
      if (config.augment) {
        augmented.reserve(last - first);
        for (std::size_t i = first; i < last; ++i) {
          augmented.push_back(augment_rotation(train_set[order[i]], rng));
        }
        for (const auto& s : augmented) batch.push_back(&s);
      } else {
        for (std::size_t i = first; i < last; ++i) batch.push_back(&train_set[order[i]]);
      }
      loss_sum += model.loss_and_gradient(batch, grad, &pred) * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) correct += pred[i] == batch[i]->label;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_epsilon);
      }
    }
    EpisodeStats st;
    st.episode = ep + 1;
    st.train_loss = loss_sum / static_cast<double>(train_set.size());
    const bool last_ep = ep + 1 == config.episodes;
    const bool eval = last_ep || config.eval_every <= 1 || (ep + 1) % config.eval_every == 0;
    st.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    st.validation_accuracy = eval ? accuracy(model, validation_set) : std::numeric_limits<double>::quiet_NaN();
    history.episodes.push_back(st);
  }
  return history;
}

}  // namespace tactile
