#include <doctest.h>

#include <chrono>
#include <sstream>

#include "tactile/fixtures.hpp"
#include "tactile/tos.hpp"

using namespace tactile;

namespace {

SearchSpace unit_space() { return SearchSpace{{0, 0, 1, 1}, {}}; }

GpOccupancyModel some_gp(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GpOccupancyModel gp;
  for (int i = 0; i < n; ++i) gp.add_observation({{u(rng), u(rng)}, 0.0});
  return gp;
}

void check_tree_invariants(const PlanTree& tree, const SearchSpace& space, double d_near) {
  const auto& v = tree.vertices;
  REQUIRE(!v.empty());
  CHECK(v[0].parent == -1);
  for (std::size_t i = 1; i < v.size(); ++i) {
    const int p = v[i].parent;
    REQUIRE(p >= 0);
    REQUIRE(p < static_cast<int>(v.size()));
    const double len = distance(v[i].position, v[p].position);
    CHECK(len <= d_near + 1e-12);
    CHECK(v[i].cost == doctest::Approx(v[p].cost + len).epsilon(1e-9));
    CHECK(space.segment_free(v[p].position, v[i].position));
    // Walking up must reach the root without revisiting.
    int hops = 0;
    for (int u = static_cast<int>(i); u != 0; u = v[u].parent) REQUIRE(++hops <= static_cast<int>(v.size()));
  }
}

}  // namespace

TEST_CASE("occupancy polygons are dilated contours") {
  CHECK(predict_occupancy_polygons({}, 0.01).empty());
  const Polygon sq = rectangle({0, 0}, {1, 1});
  const auto grown = predict_occupancy_polygons({sq}, 0.01);
  REQUIRE(grown.size() == 1);
  const auto bb = bounding_box(grown[0]);
  CHECK(bb.x_max - bb.x_min == doctest::Approx(1.02).epsilon(1e-12));
  CHECK(bb.y_max - bb.y_min == doctest::Approx(1.02).epsilon(1e-12));
  CHECK(predict_occupancy_polygons({sq}, 0.0)[0].vertices() == sq.vertices());
}

TEST_CASE("roulette probabilities follow the power rule") {
  const std::vector<double> s{0.1, 0.2};
  const auto p = roulette_probabilities(s, 3.0, 1e-9);
  CHECK(std::abs(p[0] - 1.0 / 9.0) < 1e-6);
  CHECK(std::abs(p[1] - 8.0 / 9.0) < 1e-6);
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  for (double x : roulette_probabilities(zeros, 3.0, 1e-9)) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("roulette draws converge to the probabilities") {
  Rng rng(42);
  const std::vector<double> s{0.1, 0.2};
  const auto p = roulette_probabilities(s, 3.0, 1e-9);
  const int draws = 100000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += roulette_select(p, rng) == 1;
  const double f1 = static_cast<double>(hits) / draws;
  CHECK(std::abs(f1 - 8.0 / 9.0) <= 0.01);
  // Chi-square with one degree of freedom: 6.63 is the 1% critical value.
  const double e0 = draws * p[0], e1 = draws * p[1];
  const double chi2 = std::pow(draws - hits - e0, 2) / e0 + std::pow(hits - e1, 2) / e1;
  CHECK(chi2 < 6.63);

  const std::vector<double> equal{0.5, 0.5, 0.5, 0.5};
  const auto q = roulette_probabilities(equal, 3.0, 1e-9);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[roulette_select(q, rng)];
  for (int c : counts) {
    CHECK(c >= 0.225 * draws);
    CHECK(c <= 0.275 * draws);
  }
}

TEST_CASE("uncertainty sampling returns free points and errors when saturated") {
  Rng rng(1);
  SearchSpace space{{0, 0, 1, 1}, {rectangle({0.2, 0.2}, {0.8, 0.8})}};
  const auto gp = some_gp(3, 40);
  for (int i = 0; i < 200; ++i) {
    const auto c = uncertainty_sampling(space, gp, 20, 3.0, 1e-9, rng);
    CHECK(space.is_free(c.position));
    CHECK(c.sigma == doctest::Approx(gp.posterior_std(c.position)).epsilon(1e-12));
  }
  SearchSpace full{{0, 0, 1, 1}, {rectangle({-0.1, -0.1}, {1.1, 1.1})}};
  CHECK_THROWS_AS(uncertainty_sampling(full, gp, 20, 3.0, 1e-9, rng), std::runtime_error);
}

TEST_CASE("empty space is covered by the tree") {
  const auto gp = some_gp(9, 30);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto tree = expand_tree(unit_space(), gp, TosParams{}, {0.05, 0.05}, rng);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 2.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const Point2 c{(i + 0.5) / 20.0, (j + 0.5) / 20.0};
        double best = 1e300;
        for (const auto& v : tree.vertices) best = std::min(best, distance(c, v.position));
        worst = std::max(worst, best);
      }
    }
    CHECK(worst < 2.0 * TosParams{}.d_near);
  }
}

TEST_CASE("tree invariants and exhaustive rewiring check with obstacles") {
  const Scene scene = fixture_scene("b");
  std::vector<Polygon> contours;
  for (const auto& o : scene.objects) contours.push_back(o.polygon);
  const SearchSpace space{scene.task_space, predict_occupancy_polygons(contours, 0.0175)};
  const auto gp = some_gp(5, 80);
  TosParams params;
  params.n_tree = 600;
  Rng rng(77);
  const auto tree = expand_tree(space, gp, params, {0.05, 0.05}, rng);
  CHECK(tree.vertices.size() > 100);
  check_tree_invariants(tree, space, params.d_near);
  const auto& v = tree.vertices;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = 0; b < v.size(); ++b) {
      if (a == b) continue;
      const double d = distance(v[a].position, v[b].position);
      if (d > params.d_near) continue;
      if (v[b].cost <= v[a].cost + d + 1e-9) continue;
      CHECK_FALSE(space.segment_free(v[a].position, v[b].position));
    }
  }
  for (const auto& x : v) CHECK(x.sigma == doctest::Approx(gp.posterior_std(x.position)).epsilon(1e-12));
}

TEST_CASE("enclosed root yields a root-only tree") {
  const Point2 root{0.5, 0.5};
  const double h = 1e-4, w = 0.05;
  SearchSpace space{{0, 0, 1, 1},
                    {rectangle({0.5 - w, 0.5 + h}, {0.5 + w, 0.5 + w}),
                     rectangle({0.5 - w, 0.5 - w}, {0.5 + w, 0.5 - h}),
                     rectangle({0.5 - w, 0.5 - w}, {0.5 - h, 0.5 + w}),
                     rectangle({0.5 + h, 0.5 - w}, {0.5 + w, 0.5 + w})}};
  Rng rng(4);
  const auto tree = expand_tree(space, some_gp(1, 10), TosParams{}, root, rng);
  CHECK(tree.vertices.size() == 1);
  CHECK(best_path(tree) == std::vector<Point2>{root});
}

TEST_CASE("expansion is deterministic under a seed") {
  const auto gp = some_gp(2, 50);
  Rng a(123), b(123);
  TosParams params;
  params.n_tree = 300;
  const auto ta = expand_tree(unit_space(), gp, params, {0.5, 0.5}, a);
  const auto tb = expand_tree(unit_space(), gp, params, {0.5, 0.5}, b);
  std::ostringstream sa, sb;
  write_tree_csv(ta, sa);
  write_tree_csv(tb, sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("id,parent,x,y,sigma,cost\n", 0) == 0);
}

TEST_CASE("best path backtracks to the most uncertain vertex") {
  PlanTree single;
  single.vertices.push_back({{0.1, 0.1}, 0.3, 0.0, -1});
  CHECK(best_path(single) == std::vector<Point2>{{0.1, 0.1}});

  PlanTree chain;
  chain.vertices = {{{0, 0}, 0.1, 0.0, -1}, {{0.1, 0}, 0.2, 0.1, 0}, {{0.2, 0}, 0.9, 0.2, 1}};
  CHECK(best_path(chain) == std::vector<Point2>{{0, 0}, {0.1, 0}, {0.2, 0}});

  PlanTree tie;
  tie.vertices = {{{0, 0}, 0.1, 0.0, -1}, {{0.1, 0}, 0.5, 0.3, 0}, {{0, 0.1}, 0.5, 0.1, 0},
                  {{0, 0.2}, 0.5, 0.1, 0}};
  CHECK(best_path(tie).back() == Point2{0, 0.1});

  Rng rng(8);
  const auto gp = some_gp(11, 60);
  const auto tree = expand_tree(unit_space(), gp, TosParams{}, {0.3, 0.3}, rng);
  const auto path = best_path(tree);
  double max_sigma = 0.0;
  for (const auto& v : tree.vertices) max_sigma = std::max(max_sigma, v.sigma);
  CHECK(path.front() == Point2{0.3, 0.3});
  CHECK(gp.posterior_std(path.back()) == doctest::Approx(max_sigma).epsilon(1e-12));
  for (std::size_t i = 1; i < path.size(); ++i) {
    bool is_edge = false;
    for (const auto& v : tree.vertices) {
      if (v.position == path[i] && v.parent >= 0 && tree.vertices[v.parent].position == path[i - 1]) is_edge = true;
    }
    CHECK(is_edge);
  }
}

TEST_CASE("escape point leaves the enclosing polygon") {
  SearchSpace space{{0, 0, 1, 1}, {rectangle({0.4, 0.4}, {0.6, 0.6})}};
  const Point2 e = escape_point(space, {0.41, 0.5});
  CHECK(space.is_free(e));
  CHECK(e.x == doctest::Approx(0.4).epsilon(1e-5));
  const Point2 same = escape_point(space, {0.1, 0.1});
  CHECK(same == Point2{0.1, 0.1});
}
