#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "adcprune/nsga2.hpp"
#include "doctest.h"

using namespace adcprune;

namespace {

using Fronts = std::vector<std::vector<std::size_t>>;

// Peels non-dominated layers by direct pairwise comparison.
Fronts brute_partition(const std::vector<Objectives>& pts) {
  auto weakly_better = [](const Objectives& a, const Objectives& b) {
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] > b[k]) return false;
      if (a[k] < b[k]) strict = true;
    }
    return strict;
  };
  std::vector<bool> taken(pts.size(), false);
  Fronts fronts;
  std::size_t left = pts.size();
  while (left > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (taken[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
        dominated = !taken[j] && weakly_better(pts[j], pts[i]);
      }
      if (!dominated) front.push_back(i);
    }
    for (std::size_t i : front) taken[i] = true;
    left -= front.size();
    fronts.push_back(front);
  }
  return fronts;
}

Fronts sorted(Fronts f) {
  for (auto& front : f) std::sort(front.begin(), front.end());
  return f;
}

// Grid estimate of the dominated area inside the reference box.
double grid_hypervolume(const std::vector<Objectives>& pts, std::array<double, 2> ref, int cells) {
  const double dx = ref[0] / cells;
  const double dy = ref[1] / cells;
  long covered = 0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const double x = (i + 0.5) * dx;
      const double y = (j + 0.5) * dy;
      for (const auto& p : pts) {
        if (p[0] <= x && p[1] <= y) {
          ++covered;
          break;
        }
      }
    }
  }
  return static_cast<double>(covered) * dx * dy;
}

Problem<double> schaffer() {
  Problem<double> p;
  p.evaluate = [](const double& x, std::uint64_t) { return Objectives{x * x, (x - 2.0) * (x - 2.0)}; };
  p.crossover = [](const double& a, const double& b, Rng& rng) {
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return std::pair<double, double>{t * a + (1 - t) * b, (1 - t) * a + t * b};
  };
  p.mutate = [](const double& x, Rng& rng) {
    return std::clamp(x + std::normal_distribution<double>(0.0, 0.3)(rng), -2.0, 4.0);
  };
  return p;
}

std::vector<double> initial_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 4.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(rng);
  return xs;
}

// Area dominated by the analytic front f2 = (sqrt(f1) - 2)^2, f1 in [0, 4],
// by midpoint quadrature.
double analytic_front_hypervolume(double ref) {
  const int steps = 200000;
  double area = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double f1 = (i + 0.5) * ref / steps;
    const double f2 = f1 <= 4.0 ? (std::sqrt(f1) - 2.0) * (std::sqrt(f1) - 2.0) : 0.0;
    area += std::max(0.0, ref - f2) * ref / steps;
  }
  return area;
}

}  // namespace

TEST_CASE("dominance") {
  CHECK(dominates({1, 2}, {2, 2}));
  CHECK_FALSE(dominates({1, 2}, {1, 2}));
  CHECK_FALSE(dominates({1, 2}, {2, 1}));
  CHECK_THROWS(dominates({1, 2}, {1}));
}

TEST_CASE("sorting examples") {
  const std::vector<Objectives> pts{{1, 2}, {2, 1}, {2, 2}, {3, 3}};
  CHECK(sorted(fast_non_dominated_sort(pts)) == Fronts{{0, 1}, {2}, {3}});
  CHECK(fast_non_dominated_sort(std::vector<Objectives>{{5, 5}}) == Fronts{{0}});
  const std::vector<Objectives> same(6, Objectives{1, 1});
  CHECK(sorted(fast_non_dominated_sort(same)) == Fronts{{0, 1, 2, 3, 4, 5}});
  CHECK(fast_non_dominated_sort(std::vector<Objectives>{}).empty());
}

TEST_CASE("sorting matches a brute-force partition") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 150;
    std::vector<Objectives> pts(n);
    // Small integer grid so ties and duplicates are common.
    for (auto& p : pts) p = {static_cast<double>(rng() % 12), static_cast<double>(rng() % 12)};
    const Fronts fast = sorted(fast_non_dominated_sort(pts));
    REQUIRE(fast == brute_partition(pts));
    std::set<std::size_t> seen;
    for (const auto& f : fast) seen.insert(f.begin(), f.end());
    REQUIRE(seen.size() == n);
    for (std::size_t f = 1; f < fast.size(); ++f) {
      for (std::size_t later : fast[f]) {
        for (std::size_t g = 0; g < f; ++g) {
          for (std::size_t earlier : fast[g]) REQUIRE_FALSE(dominates(pts[later], pts[earlier]));
        }
      }
    }
  }
}

TEST_CASE("crowding distance") {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::vector<Objectives> three{{0, 10}, {5, 5}, {10, 0}};
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK(crowding_distance(three, all) == std::vector<double>{inf, 2.0, inf});
  const std::vector<Objectives> two{{0, 1}, {1, 0}};
  CHECK(crowding_distance(two, std::vector<std::size_t>{0, 1}) == std::vector<double>{inf, inf});
  const std::vector<Objectives> flat{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
  const auto d = crowding_distance(flat, std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(std::count(d.begin(), d.end(), inf) == 2);
  CHECK(std::count(d.begin(), d.end(), 0.0) == 2);
  CHECK_THROWS(crowding_distance(three, std::vector<std::size_t>{}));
}

TEST_CASE("hypervolume") {
  CHECK(hypervolume_2d(std::vector<Objectives>{{0.5, 0.5}}, {1, 1}) == doctest::Approx(0.25));
  CHECK(hypervolume_2d(std::vector<Objectives>{{0, 0.5}, {0.5, 0}}, {1, 1}) == doctest::Approx(0.75));
  CHECK(hypervolume_2d(std::vector<Objectives>{{1.5, 0.1}}, {1, 1}) == 0.0);
  CHECK(hypervolume_2d(std::vector<Objectives>{}, {1, 1}) == 0.0);

  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Objectives> pts(1 + rng() % 12);
    for (auto& p : pts) p = {u(rng), u(rng)};
    CHECK(hypervolume_2d(pts, {1, 1}) == doctest::Approx(grid_hypervolume(pts, {1, 1}, 400)).epsilon(0.02));
  }
}

TEST_CASE("parameter validation") {
  GaParams p;
  CHECK_NOTHROW(p.validate());
  p.population = 5;
  CHECK_THROWS(p.validate());
  p.population = 2;
  CHECK_THROWS(p.validate());
  p = GaParams{};
  p.crossover_prob = 1.2;
  CHECK_THROWS(p.validate());
}

TEST_CASE("evolution approaches the analytic front") {
  GaParams params;
  params.population = 20;
  params.generations = 50;
  params.seed = 3;
  EvolveOptions options;
  options.hv_reference = {4.0, 4.0};
  const auto result = evolve(schaffer(), initial_points(20, 1), params, options);
  std::vector<Objectives> pts;
  double lo = 10;
  double hi = -10;
  for (const auto& ind : result.archive) {
    pts.push_back(ind.objectives);
    lo = std::min(lo, ind.genome);
    hi = std::max(hi, ind.genome);
  }
  const double hv = hypervolume_2d(pts, {4.0, 4.0});
  const double exact = analytic_front_hypervolume(4.0);
  CHECK(exact == doctest::Approx(40.0 / 3.0).epsilon(1e-6));
  CHECK(hv >= 0.95 * exact);
  CHECK(hv <= exact + 1e-9);
  CHECK(lo >= -1e-2);
  CHECK(hi <= 2.0 + 1e-2);
  CHECK(result.log.size() == 51);
  for (std::size_t g = 1; g < result.log.size(); ++g) {
    CHECK(result.log[g].hypervolume >= result.log[g - 1].hypervolume - 1e-12);
  }
  for (const auto& a : result.archive) {
    for (const auto& b : result.archive) CHECK_FALSE(dominates(a.objectives, b.objectives));
  }
}

TEST_CASE("zero generations archive the non-dominated initial points") {
  GaParams params;
  params.population = 12;
  params.generations = 0;
  const auto xs = initial_points(12, 9);
  const auto result = evolve(schaffer(), xs, params);
  std::vector<Objectives> pts;
  for (double x : xs) pts.push_back({x * x, (x - 2) * (x - 2)});
  const auto front = brute_partition(pts).front();
  REQUIRE(result.archive.size() == front.size());
  std::set<double> expected;
  for (std::size_t i : front) expected.insert(xs[i]);
  for (const auto& a : result.archive) CHECK(expected.count(a.genome) == 1);
}

TEST_CASE("runs are reproducible and independent of worker count") {
  GaParams params;
  params.population = 16;
  params.generations = 15;
  params.seed = 42;
  const auto a = evolve(schaffer(), initial_points(16, 5), params);
  const auto b = evolve(schaffer(), initial_points(16, 5), params);
  params.workers = 4;
  const auto c = evolve(schaffer(), initial_points(16, 5), params);
  REQUIRE(a.archive.size() == b.archive.size());
  REQUIRE(a.archive.size() == c.archive.size());
  for (std::size_t i = 0; i < a.archive.size(); ++i) {
    CHECK(a.archive[i].genome == b.archive[i].genome);
    CHECK(a.archive[i].genome == c.archive[i].genome);
    CHECK(a.archive[i].eval_index == c.archive[i].eval_index);
  }
}

TEST_CASE("failing evaluations get worst-case objectives and are never archived") {
  Problem<double> p = schaffer();
  p.evaluate = [](const double& x, std::uint64_t index) -> Objectives {
    if (index % 3 == 0) throw std::runtime_error("diverged");
    return {x * x, (x - 2) * (x - 2)};
  };
  GaParams params;
  params.population = 12;
  params.generations = 5;
  const auto result = evolve(p, initial_points(12, 4), params);
  for (const auto& a : result.archive) {
    CHECK_FALSE(a.failed);
    CHECK(a.eval_index % 3 != 0);
  }
  for (const auto& ind : result.population) {
    if (ind.failed) {
      CHECK(ind.objectives == Objectives{1.0, std::numeric_limits<double>::max()});
    }
  }
  CHECK_THROWS(evolve(schaffer(), initial_points(10, 1), params));
}
