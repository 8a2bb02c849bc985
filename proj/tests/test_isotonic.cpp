#include <doctest.h>

#include <cmath>
#include <random>

#include "isopref/error.hpp"
#include "isopref/isotonic.hpp"
#include "oracles.hpp"

using namespace isopref;
using doctest::Approx;

namespace {

WeightedSeries series(std::vector<double> w, std::vector<double> v) { return {std::move(w), std::move(v)}; }

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("isotonic fit examples") {
  check_close(isotonic_fit(series({1, 1, 1}, {0.2, 0.5, 0.9})).fitted, {0.2, 0.5, 0.9}, 1e-12);
  check_close(isotonic_fit(series({1, 1}, {0.8, 0.2})).fitted, {0.5, 0.5}, 1e-12);
  check_close(isotonic_fit(series({1, 3}, {0.8, 0.2})).fitted, {0.35, 0.35}, 1e-12);
  check_close(isotonic_fit(series({2, 1, 1}, {0.1, 0.9, 0.3})).fitted, {0.1, 0.6, 0.6}, 1e-12);
}

TEST_CASE("isotonic fit examples agree with the partition oracle") {
  check_close(oracle::isotonic({1, 3}, {0.8, 0.2}), {0.35, 0.35}, 1e-12);
  check_close(oracle::isotonic({2, 1, 1}, {0.1, 0.9, 0.3}), {0.1, 0.6, 0.6}, 1e-12);
}

TEST_CASE("isotonic fit rejects bad input") {
  CHECK_THROWS_AS(isotonic_fit(series({}, {})), InvalidInput);
  CHECK_THROWS_AS(isotonic_fit(series({1, 0}, {0.1, 0.2})), InvalidInput);
  CHECK_THROWS_AS(isotonic_fit(series({1, -1}, {0.1, 0.2})), InvalidInput);
  CHECK_THROWS_AS(isotonic_fit(series({1}, {0.1, 0.2})), InvalidInput);
  CHECK_THROWS_AS(isotonic_fit(series({1}, {1.5})), InvalidInput);
}

TEST_CASE("blocks describe the fit") {
  const auto fit = isotonic_fit(series({2, 1, 1, 1}, {0.1, 0.9, 0.3, 0.95}));
  REQUIRE(fit.blocks.size() == 3);
  CHECK(fit.blocks[0].begin == 0);
  CHECK(fit.blocks[0].end == 1);
  CHECK(fit.blocks[1].begin == 1);
  CHECK(fit.blocks[1].end == 3);
  CHECK(fit.blocks[1].weight == 2.0);
  CHECK(fit.blocks[1].mean == Approx(0.6));
  CHECK(fit.blocks[2].end == 4);
}

TEST_CASE("gcm slope examples") {
  std::vector<DiagramPoint> a{{0, 0}, {1, 0.8}, {2, 1.0}};
  check_close(gcm_slopes(a), {0.5, 0.5}, 1e-12);
  std::vector<DiagramPoint> b{{0, 0}, {1, 0.2}, {2, 0.7}};
  check_close(gcm_slopes(b), {0.2, 0.5}, 1e-12);
  std::vector<DiagramPoint> c{{0, 0}, {3, 1.5}};
  check_close(gcm_slopes(c), {0.5}, 1e-12);
}

TEST_CASE("gcm slopes reject non-increasing abscissae") {
  std::vector<DiagramPoint> bad{{0, 0}, {1, 0.5}, {1, 0.7}};
  CHECK_THROWS_AS(gcm_slopes(bad), InvalidInput);
  std::vector<DiagramPoint> shifted{{1, 0}, {2, 0.5}};
  CHECK_THROWS_AS(gcm_slopes(shifted), InvalidInput);
}

TEST_CASE("cumulative diagram") {
  const auto d = cumulative_diagram(series({1, 3}, {0.8, 0.2}));
  REQUIRE(d.size() == 3);
  CHECK(d[0].x == 0.0);
  CHECK(d[1].x == 1.0);
  CHECK(d[1].y == Approx(0.8));
  CHECK(d[2].x == 4.0);
  CHECK(d[2].y == Approx(1.4));
}

TEST_CASE("constrained fit examples") {
  check_close(constrained_fit(series({1, 1}, {0.8, 0.2}), 1, 0.5).fitted, {0.5, 0.5}, 1e-12);
  check_close(constrained_fit(series({1, 1}, {0.2, 0.8}), 1, 0.5).fitted, {0.2, 0.8}, 1e-12);
  check_close(constrained_fit(series({1, 1}, {0.8, 0.2}), 1, 0.2).fitted, {0.2, 0.2}, 1e-12);
  CHECK_THROWS_AS(constrained_fit(series({1, 1}, {0.8, 0.2}), 1, 0.0), InvalidInput);
  CHECK_THROWS_AS(constrained_fit(series({1, 1}, {0.8, 0.2}), 1, 1.0), InvalidInput);
  CHECK_THROWS_AS(constrained_fit(series({1, 1}, {0.8, 0.2}), 3, 0.5), InvalidInput);
}

TEST_CASE("constrained fit at the ends of the split range") {
  check_close(constrained_fit(series({1, 1}, {0.3, 0.6}), 0, 0.5).fitted, {0.5, 0.6}, 1e-12);
  check_close(constrained_fit(series({1, 1}, {0.3, 0.6}), 2, 0.5).fitted, {0.3, 0.5}, 1e-12);
}

TEST_CASE("random series: PAVA, gcm slopes and oracles agree") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> len(1, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    WeightedSeries s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      s.weights.push_back(count(rng));
      s.values.push_back(unit(rng) < 0.2 ? 0.5 : unit(rng));
    }
    const auto fit = isotonic_fit(s);
    check_close(fit.fitted, oracle::isotonic(s.weights, s.values), 1e-10);
    check_close(fit.fitted, gcm_slopes(cumulative_diagram(s)), 1e-12);

    std::uniform_int_distribution<int> split(0, n);
    const std::size_t s0 = split(rng);
    const double h0 = 0.05 + 0.9 * unit(rng);
    check_close(constrained_fit(s, s0, h0).fitted,
                oracle::constrained_isotonic(s.weights, s.values, s0, h0), 1e-10);
  }
}
