#include <doctest.h>

#include <cmath>
#include <random>

#include "isopref/error.hpp"
#include "isopref/inference.hpp"
#include "isopref/simulate.hpp"
#include "oracles.hpp"

using namespace isopref;
using doctest::Approx;

namespace {

PooledSample two_knots(double u1, double u2) { return {{0.25, 0.75}, {1, 1}, {u1, u2}}; }

DQuantileTable test_table() {
  DQuantileTable t;
  t.quantiles = {{0.8, 1.0}, {0.9, 1.6}, {0.95, 2.2}, {0.99, 3.7}};
  t.replications = 1;
  return t;
}

PooledSample random_small_sample(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> knots(1, 7);
  std::uniform_int_distribution<int> count(1, 6);
  PooledSample s;
  const int n = knots(rng);
  std::vector<double> r;
  while (static_cast<int>(r.size()) < n) {
    const double x = std::uniform_int_distribution<int>(1, 39)(rng) / 40.0;
    if (std::find(r.begin(), r.end(), x) == r.end()) r.push_back(x);
  }
  std::sort(r.begin(), r.end());
  for (double x : r) {
    const int c = count(rng);
    s.knots.push_back(x);
    s.counts.push_back(c);
    s.means.push_back(std::uniform_int_distribution<int>(0, c)(rng) / static_cast<double>(c));
  }
  return s;
}

}  // namespace

TEST_CASE("npmle examples") {
  const PooledSample a{{0.3, 0.7}, {1, 1}, {0.8, 0.2}};
  CHECK(fit_npmle(a).values[0] == Approx(0.5));
  CHECK(fit_npmle(a).values[1] == Approx(0.5));
  const PooledSample b{{0.3, 0.7}, {1, 1}, {0.2, 0.8}};
  CHECK(fit_npmle(b).values == std::vector<double>{0.2, 0.8});
  CHECK(fit_npmle(b).knots == b.knots);
}

TEST_CASE("npmle beats random feasible candidates") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const PooledSample s = random_small_sample(rng);
    const auto fit = fit_npmle(s);
    const double best = loglik(s, fit.values).value;
    for (int k = 0; k < 100; ++k) {
      const auto v = oracle::random_feasible(s.size(), rng);
      CHECK(best >= loglik(s, v).value - 1e-12);
    }
  }
}

TEST_CASE("split index puts a knot equal to r0 on the left") {
  const std::vector<double> knots{0.2, 0.5, 0.8};
  CHECK(split_index(knots, 0.1) == 0);
  CHECK(split_index(knots, 0.5) == 2);
  CHECK(split_index(knots, 0.6) == 2);
  CHECK(split_index(knots, 0.9) == 3);
}

TEST_CASE("constrained fit examples") {
  const auto s = two_knots(0.8, 0.2);
  CHECK(fit_constrained(s, 0.5, 0.2).values == std::vector<double>{0.2, 0.2});
  CHECK(fit_constrained(s, 0.5, 0.5).values == fit_npmle(s).values);
  const auto c = fit_constrained(s, 0.1, 0.1);
  CHECK(c.values[0] == Approx(0.5));
  CHECK(c.values[1] == Approx(0.5));
  const auto d = fit_constrained(s, 0.1, 0.7);
  CHECK(d.values == std::vector<double>{0.7, 0.7});
  CHECK_THROWS_AS(fit_constrained(s, 0.5, 0.0), InvalidInput);
  CHECK_THROWS_AS(fit_constrained(s, 0.5, 1.0), InvalidInput);
  CHECK_THROWS_AS(fit_constrained(s, 0.0, 0.5), InvalidInput);
}

TEST_CASE("worked likelihood-ratio value") {
  const auto s = two_knots(0.8, 0.2);
  const double expected = 2.0 * (-2.0 * std::log(2.0) - std::log(0.16));
  CHECK(lr_statistic(s, 0.5, 0.2) == Approx(0.892574).epsilon(1e-6));
  CHECK(std::abs(lr_statistic(s, 0.5, 0.2) - expected) < 1e-12);
  CHECK(std::abs(LrProfiler(s, 0.5).statistic(0.2) - expected) < 1e-12);
  const std::vector<oracle::Observation> obs{{0.25, 0.8}, {0.75, 0.2}};
  const double by_observation = 2.0 * (oracle::observation_loglik(obs, s.knots, {0.5, 0.5}) -
                                       oracle::observation_loglik(obs, s.knots, {0.2, 0.2}));
  CHECK(std::abs(lr_statistic(s, 0.5, 0.2) - by_observation) < 1e-12);
  CHECK(lr_statistic(s, 0.5, 0.5) == 0.0);
}

TEST_CASE("likelihood-ratio statistic against the partition oracle") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  for (int trial = 0; trial < 300; ++trial) {
    const PooledSample s = random_small_sample(rng);
    const double r0 = unit(rng);
    const double h0 = unit(rng);
    const auto series = s.series();
    const auto free_fit = oracle::isotonic(series.weights, series.values);
    const auto pinned =
        oracle::constrained_isotonic(series.weights, series.values, split_index(s.knots, r0), h0);
    const auto ll_free = loglik(s, free_fit);
    const auto ll_pinned = loglik(s, pinned);
    const double lr = lr_statistic(s, r0, h0);
    const double profiled = LrProfiler(s, r0).statistic(h0);
    if (ll_pinned.finite) {
      CHECK(lr == Approx(2.0 * (ll_free.value - ll_pinned.value)).epsilon(1e-9).scale(1.0));
    }
    CHECK(profiled == Approx(lr).epsilon(1e-9).scale(1.0));
    CHECK(lr >= -1e-9);
  }
}

TEST_CASE("profile is zero at the estimate and the estimate matches eval_step") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  for (int trial = 0; trial < 200; ++trial) {
    const PooledSample s = random_small_sample(rng);
    const double r0 = unit(rng);
    const LrProfiler profiler(s, r0);
    CHECK(profiler.estimate() == eval_step(fit_npmle(s), r0));
    const double est = profiler.estimate();
    if (est > 0.0 && est < 1.0) {
      CHECK(std::abs(profiler.statistic(est)) <= 1e-9);
      CHECK(std::abs(lr_statistic(s, r0, est)) <= 1e-9);
    }
  }
}

TEST_CASE("lr_profile evaluates the grid") {
  const auto s = two_knots(0.8, 0.2);
  const std::vector<double> grid{0.2, 0.5, 0.8};
  const auto p = lr_profile(s, 0.5, grid);
  REQUIRE(p.statistics.size() == 3);
  CHECK(p.statistics[0] == Approx(0.892574).epsilon(1e-6));
  CHECK(std::abs(p.statistics[1]) <= 1e-12);
  CHECK(p.statistics[2] == Approx(p.statistics[0]));
}

TEST_CASE("confidence sets") {
  SimConfig config;
  config.users = 300;
  config.seed = 4;
  const auto data = generate_dataset(config);
  const PooledSample s = pool(data, first_half());
  const auto table = test_table();
  const auto ci95 = confidence_set(s, 1.0 / 3.0, 0.95, table);
  const auto ci99 = confidence_set(s, 1.0 / 3.0, 0.99, table);
  CHECK(ci95.contains(ci95.estimate));
  CHECK(ci95.estimate == eval_step(fit_npmle(s), 1.0 / 3.0));
  CHECK(ci95.lower < ci95.upper);
  CHECK(ci95.contiguous);
  CHECK(ci99.lower <= ci95.lower);
  CHECK(ci99.upper >= ci95.upper);
  CHECK(ci95.length() < 0.3);

  CHECK_THROWS_AS(confidence_set(s, 1.0 / 3.0, 0.5, table), InvalidInput);
  CHECK_THROWS_AS(confidence_set(s, 1.0 / 3.0, 0.95, table, 0.02), InvalidInput);
  CHECK_THROWS_AS(confidence_set(s, 1.5, 0.95, table), InvalidInput);
}

TEST_CASE("confidence sets contain the estimate on random samples") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  const auto table = test_table();
  for (int trial = 0; trial < 200; ++trial) {
    const PooledSample s = random_small_sample(rng);
    const double r0 = unit(rng);
    const auto ci = confidence_set(s, r0, 0.95, table, 0.01);
    CHECK(ci.contains(ci.estimate));
    CHECK(ci.lower >= 0.0);
    CHECK(ci.upper <= 1.0);
  }
}
