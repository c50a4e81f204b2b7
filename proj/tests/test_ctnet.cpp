#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "ctnet_check.hpp"
#include "tactile/ctnet.hpp"

using namespace tactile;

namespace {

CtNetShape small_shape(int n_classes = 4) {
  CtNetShape s;
  s.widths = {8, 12, 16};
  s.head_hidden = 10;
  s.n_classes = n_classes;
  return s;
}

std::vector<const PointSetSample*> ptrs(const std::vector<PointSetSample>& v) {
  std::vector<const PointSetSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

// Two blobs, separable by the sign of x.
std::vector<PointSetSample> toy_two_class(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.15);
  std::vector<PointSetSample> out;
  for (int label = 0; label < 2; ++label) {
    const double cx = label == 0 ? -0.6 : 0.6;
    for (int i = 0; i < per_class; ++i) {
      PointSetSample s;
      s.label = label;
      for (int k = 0; k < 16; ++k) s.contour.push_back({cx + g(rng), g(rng), 0.0});
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("shape validation and parameter count") {
  CtNetShape s;
  CHECK(s.widths == std::vector<int>{64, 128, 256});
  CHECK(s.head_hidden == 128);
  // 3*64+64 + 64*128+128 + 128*256+256 + 448*256+256 + 256*128+128 + 128*8+8
  CHECK(s.parameter_count() == 256 + 8320 + 33024 + 114944 + 32896 + 1032);
  CtNetShape bad = s;
  bad.input_dim = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.widths.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = s;
  bad.n_classes = 1;
  CHECK_THROWS_AS(CtNetModel(bad, 0), std::invalid_argument);
}

TEST_CASE("forward gives a probability vector") {
  CtNetModel model(CtNetShape{}, 1);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto s = check::random_sample(rng, 64, 1, 8);
    const auto p = model.forward(s);
    REQUIRE(p.size() == 8);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  for (double v : model.parameters()) REQUIRE(std::isfinite(v));
  CHECK_THROWS_AS((void)model.forward(PointSetSample{}), std::invalid_argument);
}

TEST_CASE("forward is invariant to point order and duplicates") {
  CtNetModel model(small_shape(8), 3);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto s = check::random_sample(rng, 64, 1 + t % 3, 8);
    auto pts = s.points();
    const auto ref = model.forward(pts);

    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(check::max_abs_diff(ref, model.forward(pts)) <= 1e-12);

    const auto k = std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng);
    pts.push_back(pts[k]);
    pts.push_back(pts[0]);
    CHECK(check::max_abs_diff(ref, model.forward(pts)) <= 1e-12);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(5);
  int checked = 0, failed = 0;
  double worst = 0.0;
  for (int config = 0; config < 10; ++config) {
    CtNetShape shape = small_shape(2 + config % 4);
    if (config % 3 == 1) shape.widths = {6, 10};
    if (config % 3 == 2) shape.widths = {5, 7, 9, 11};
    CtNetModel model(shape, 100 + config);
    std::vector<PointSetSample> batch;
    for (int i = 0; i < 1 + config % 3; ++i) {
      batch.push_back(check::random_sample(rng, 12 + config, config % 3, shape.n_classes));
    }
    const auto r = check::gradient_check(model, ptrs(batch), 5, rng);
    checked += r.checked;
    failed += r.failed;
    worst = std::max(worst, r.worst);
  }
  INFO("worst relative error " << worst);
  CHECK(checked >= 10 * 5 * 10);
  CHECK(failed == 0);
}

TEST_CASE("all-zero input has finite gradients") {
  CtNetModel model(small_shape(), 6);
  PointSetSample s;
  s.contour.assign(64, {0.0, 0.0, 0.0});
  s.probes.push_back({0.0, 0.0, 0.0});
  for (int label = 0; label < 4; ++label) {
    s.label = label;
    std::vector<double> grad;
    const double l = model.loss_and_gradient({&s}, grad);
    CHECK(std::isfinite(l));
    REQUIRE(grad.size() == model.parameters().size());
    for (double g : grad) REQUIRE(std::isfinite(g));
    const auto dx = model.input_gradient(s);
    CHECK(dx.allFinite());
  }
}

TEST_CASE("a point that wins no pooled coordinate gets zero input gradient") {
  CtNetModel model(small_shape(), 7);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto s = check::random_sample(rng, 20, 1, 4);
    // A trailing copy of the first point loses every tie to it.
    s.probes.push_back(s.contour[0]);
    const auto dx = model.input_gradient(s);
    REQUIRE(dx.rows() == 22);
    REQUIRE(dx.cols() == 3);
    CHECK(dx.row(21).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dx.allFinite());
  }
  // Input gradient agrees with finite differences on the input coordinates.
  auto s = check::random_sample(rng, 10, 1, 4);
  const auto dx = model.input_gradient(s);
  const double h = 1e-6;
  for (int i = 0; i < 10; ++i) {
    auto sp = s, sm = s;
    sp.contour[i].x += h;
    sm.contour[i].x -= h;
    const double num = (model.loss({&sp}) - model.loss({&sm})) / (2.0 * h);
    CHECK(check::close_rel(dx(i, 0), num, 1e-4, 1e-8));
  }
}

TEST_CASE("initial loss is close to ln(n_classes)") {
  for (int n : {2, 4, 8}) {
    CtNetShape shape;
    shape.n_classes = n;
    CtNetModel model(shape, 9);
    std::mt19937_64 rng(10);
    std::vector<PointSetSample> batch;
    for (int i = 0; i < 32; ++i) batch.push_back(check::random_sample(rng, 64, 1, n));
    const double l = model.loss(ptrs(batch));
    CHECK(l == doctest::Approx(std::log(static_cast<double>(n))).epsilon(0.05));
  }
}

TEST_CASE("separable toy problem is learned within 50 episodes") {
  const auto data = toy_two_class(20, 11);
  CtNetModel model(small_shape(2), 12);
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.episodes = 50;
  cfg.batch_size = 8;
  cfg.seed = 13;
  cfg.augment = false;
  const auto hist = train(model, data, {}, cfg);
  REQUIRE(hist.episodes.size() == 50);
  CHECK(hist.episodes.back().train_accuracy == 1.0);
  CHECK(std::isnan(hist.episodes.back().validation_accuracy));
  CHECK(hist.episodes.back().train_loss < hist.episodes.front().train_loss);
}

TEST_CASE("training is deterministic under a seed") {
  const auto data = toy_two_class(10, 14);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.episodes = 5;
  cfg.batch_size = 4;
  cfg.seed = 15;
  cfg.decay_every = 2;
  CtNetModel a(small_shape(2), 16), b(small_shape(2), 16);
  train(a, data, data, cfg);
  train(b, data, data, cfg);
  CHECK(a.parameters() == b.parameters());
  CtNetModel c(small_shape(2), 16);
  cfg.seed = 17;
  train(c, data, data, cfg);
  CHECK(a.parameters() != c.parameters());
}

TEST_CASE("train rejects bad inputs") {
  const auto data = toy_two_class(3, 18);
  CtNetModel model(small_shape(2), 19);
  TrainConfig cfg;
  cfg.episodes = 0;
  CHECK_THROWS_AS(train(model, data, {}, cfg), std::invalid_argument);
  cfg.episodes = 1;
  CHECK_THROWS_AS(train(model, {}, {}, cfg), std::invalid_argument);
  std::vector<PointSetSample> one_class(data.begin(), data.begin() + 3);
  CHECK_THROWS_AS(train(model, one_class, {}, cfg), std::invalid_argument);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(model, data, {}, cfg), std::invalid_argument);
}

TEST_CASE("checkpoint round trip and shape mismatch") {
  CtNetModel model(small_shape(), 20);
  std::stringstream buf;
  model.save(buf);
  const std::string bytes = buf.str();

  std::istringstream in1(bytes);
  const auto loaded = CtNetModel::load(in1);
  CHECK(loaded.shape() == model.shape());
  CHECK(loaded.parameters() == model.parameters());

  CtNetModel same(small_shape(), 99);
  std::istringstream in2(bytes);
  same.load_into(in2);
  CHECK(same.parameters() == model.parameters());

  CtNetShape other = small_shape();
  other.widths = {8, 12, 20};
  CtNetModel different(other, 0);
  const auto before = different.parameters();
  std::istringstream in3(bytes);
  CHECK_THROWS_AS(different.load_into(in3), CheckpointError);
  CHECK(different.parameters() == before);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(CtNetModel::load(truncated), CheckpointError);
  std::istringstream garbage("not a model");
  CHECK_THROWS_AS(CtNetModel::load(garbage), CheckpointError);
}

TEST_CASE("rotation augmentation is an isometry") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto s = check::random_sample(rng, 64, 2, 8);
    const auto same = rotate_sample(s, 0.0).points();
    const auto a = s.points();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::fabs(same[i].x - a[i].x) <= 1e-15);
      CHECK(std::fabs(same[i].y - a[i].y) <= 1e-15);
      CHECK(same[i].z == a[i].z);
    }

    const auto back = rotate_sample(rotate_sample(s, std::numbers::pi), std::numbers::pi);
    const auto b = back.points();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::fabs(a[i].x - b[i].x) <= 1e-12);
      CHECK(std::fabs(a[i].y - b[i].y) <= 1e-12);
      CHECK(a[i].z == b[i].z);
    }

    TrainRng trng(t);
    const auto r = augment_rotation(s, trng).points();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(r[i].z == a[i].z);
      for (std::size_t j = i + 1; j < a.size(); j += 7) {
        const double d0 = std::hypot(a[i].x - a[j].x, a[i].y - a[j].y);
        const double d1 = std::hypot(r[i].x - r[j].x, r[i].y - r[j].y);
        CHECK(std::fabs(d0 - d1) <= 1e-12);
      }
    }
  }
}
