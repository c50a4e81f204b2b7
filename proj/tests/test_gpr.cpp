#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "tactile/gpr.hpp"

using namespace tactile;

namespace {

using Mat = std::vector<std::vector<long double>>;

// Dense oracle: solve (K + s^2 I) x = b by Gaussian elimination in long double.
std::vector<long double> dense_solve(Mat a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

long double k_ld(Point2 a, Point2 b, long double l) {
  const long double dx = a.x - b.x, dy = a.y - b.y;
  return std::exp(-(dx * dx + dy * dy) / (2.0L * l * l));
}

struct Oracle {
  std::vector<Observation> obs;
  long double l = 0.08L, s = 0.02L;
  Mat gram() const {
    Mat a(obs.size(), std::vector<long double>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
      for (std::size_t j = 0; j < obs.size(); ++j) a[i][j] = k_ld(obs[i].position, obs[j].position, l);
      a[i][i] += s * s;
    }
    return a;
  }
  std::pair<long double, long double> predict(Point2 q) const {
    std::vector<long double> k(obs.size()), y(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      k[i] = k_ld(obs[i].position, q, l);
      y[i] = obs[i].occupied;
    }
    const auto a = gram();
    const auto kinv = dense_solve(a, k);
    const auto yinv = dense_solve(a, y);
    long double var = 1.0L, mean = 0.0L;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      var -= k[i] * kinv[i];
      mean += k[i] * yinv[i];
    }
    return {std::sqrt(std::max(var, 0.0L)), mean};
  }
};

bool rel_close(double got, long double want, double tol) {
  const long double scale = std::max(std::fabs(want), 1e-300L);
  return std::fabs(got - want) / scale <= tol || std::fabs(got - want) < 1e-15;
}

std::vector<Observation> random_observations(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> out;
  for (int i = 0; i < n; ++i) out.push_back({{u(rng), u(rng)}, u(rng) < 0.3 ? 1.0 : 0.0});
  return out;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel({0.3, 0.4}, {0.3, 0.4}, 0.08) == 1.0);
  CHECK(kernel({0, 0}, {0.08, 0}, 0.08) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(kernel({0, 0}, {0, 0.8}, 0.08) == doctest::Approx(1.9287498479639178e-22).epsilon(1e-12));
}

TEST_CASE("empty model gives the prior") {
  GpOccupancyModel m;
  CHECK(m.posterior_std({0.2, 0.7}) == 1.0);
  CHECK(m.posterior_mean({0.2, 0.7}) == 0.0);
  CHECK(m.posterior_std_batch({}).empty());
}

TEST_CASE("single observation closed forms") {
  GpOccupancyModel m;
  CHECK(m.add_observation({{0.5, 0.5}, 1.0}));
  CHECK(m.size() == 1);
  const double s2 = 0.02 * 0.02;
  CHECK(m.posterior_std({0.5, 0.5}) == doctest::Approx(std::sqrt(1.0 - 1.0 / (1.0 + s2))).epsilon(1e-12));
  CHECK(m.posterior_std({0.5, 0.5}) == doctest::Approx(0.019996).epsilon(1e-4));
  CHECK(m.posterior_mean({0.5, 0.5}) == doctest::Approx(1.0 / (1.0 + s2)).epsilon(1e-12));
  CHECK(std::abs(m.posterior_std({0.5, 0.5 + 0.8}) - 1.0) < 1e-9);
}

TEST_CASE("duplicates are merged") {
  GpOccupancyModel m;
  CHECK(m.add_observation({{0.1, 0.1}, 0.0}));
  CHECK_FALSE(m.add_observation({{0.1, 0.1 + 5e-10}, 1.0}));
  CHECK(m.size() == 1);
  CHECK(m.observations()[0].occupied == 1.0);
}

TEST_CASE("occupied corner and symmetric midpoint against the dense oracle") {
  GpOccupancyModel m;
  Oracle o;
  for (Observation ob : {Observation{{0.0, 0.0}, 1.0}, Observation{{0.3, 0.3}, 0.0},
                         Observation{{0.1, 0.0}, 0.0}}) {
    m.add_observation(ob);
    o.obs.push_back(ob);
  }
  CHECK(m.posterior_mean({0.0, 0.0}) > 0.5);
  CHECK(rel_close(m.posterior_mean({0.0, 0.0}), o.predict({0.0, 0.0}).second, 1e-9));

  GpOccupancyModel pair;
  Oracle po;
  for (Observation ob : {Observation{{0.4, 0.5}, 1.0}, Observation{{0.6, 0.5}, 0.0}}) {
    pair.add_observation(ob);
    po.obs.push_back(ob);
  }
  const auto [sd, mean] = po.predict({0.5, 0.5});
  CHECK(rel_close(pair.posterior_mean({0.5, 0.5}), mean, 1e-9));
  CHECK(rel_close(pair.posterior_std({0.5, 0.5}), sd, 1e-9));
}

TEST_CASE("random models match the dense oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(5, 300);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const auto obs = random_observations(rng, size(rng));
    GpOccupancyModel m;
    Oracle o;
    for (const auto& ob : obs) {
      if (m.add_observation(ob)) o.obs.push_back(ob);
    }
    for (int q = 0; q < 5; ++q) {
      const Point2 p = (q == 0) ? obs[0].position : Point2{u(rng), u(rng)};
      const auto [sd, mean] = o.predict(p);
      CHECK(rel_close(m.posterior_std(p), sd, 1e-9));
      CHECK(rel_close(m.posterior_mean(p), mean, 1e-9));
    }
  }
}

TEST_CASE("incremental factor matches a rebuilt factor after 500 additions") {
  std::mt19937_64 rng(7);
  GpOccupancyModel inc(kDefaultLengthscale, kDefaultGpNoise, 1 << 30);
  for (const auto& ob : random_observations(rng, 500)) inc.add_observation(ob);
  const Eigen::MatrixXd l_inc = inc.cholesky_factor();
  GpOccupancyModel reb = inc;
  reb.rebuild();
  const Eigen::MatrixXd l_reb = reb.cholesky_factor();
  CHECK((l_inc - l_reb).norm() / l_reb.norm() < 1e-9);

  std::vector<Point2> grid;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) grid.push_back({(i + 0.5) / 30.0, (j + 0.5) / 30.0});
  const auto a = inc.posterior_std_batch(grid), b = reb.posterior_std_batch(grid);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(rel_close(a[i], b[i], 1e-9));
}

TEST_CASE("batch queries equal scalar queries") {
  std::mt19937_64 rng(5);
  GpOccupancyModel m;
  for (const auto& ob : random_observations(rng, 200)) m.add_observation(ob);
  std::vector<Point2> grid;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) grid.push_back({(i + 0.5) / 100.0, (j + 0.5) / 100.0});
  const auto t0 = std::chrono::steady_clock::now();
  const auto batch = m.posterior_std_batch(grid);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 0.5);
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    CHECK(std::abs(batch[i] - m.posterior_std(grid[i])) <= 1e-12);
  }
  CHECK(m.posterior_std_batch(std::span<const Point2>(grid.data(), 1))[0] ==
        m.posterior_std(grid[0]));
}

TEST_CASE("information never hurts") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    GpOccupancyModel m;
    for (const auto& ob : random_observations(rng, 1 + trial % 40)) m.add_observation(ob);
    std::vector<Point2> qs;
    for (int q = 0; q < 20; ++q) qs.push_back({u(rng), u(rng)});
    const auto before = m.posterior_std_batch(qs);
    m.add_observation({{u(rng), u(rng)}, 1.0});
    const auto after = m.posterior_std_batch(qs);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      CHECK(after[i] <= before[i] + 1e-12);
      CHECK(after[i] >= 0.0);
      CHECK(after[i] <= 1.0);
    }
  }
}

TEST_CASE("insertion order does not matter") {
  std::mt19937_64 rng(31);
  auto obs = random_observations(rng, 120);
  GpOccupancyModel a, b;
  for (const auto& ob : obs) a.add_observation(ob);
  std::shuffle(obs.begin(), obs.end(), rng);
  for (const auto& ob : obs) b.add_observation(ob);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < 200; ++q) {
    const Point2 p{u(rng), u(rng)};
    CHECK(rel_close(a.posterior_std(p), b.posterior_std(p), 1e-9));
  }
}
