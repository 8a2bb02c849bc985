#include "isopref/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isopref/error.hpp"

namespace isopref {

void WeightedSeries::validate() const {
  if (weights.empty()) throw InvalidInput("weighted series is empty");
  if (weights.size() != values.size()) {
    throw InvalidInput("weighted series: weights and values differ in length");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InvalidInput("weighted series: weight " + std::to_string(i) + " is not positive");
    }
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw InvalidInput("weighted series: value " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

IsotonicFit pool_adjacent_violators(std::span<const double> weights,
                                    std::span<const double> values) {
  if (weights.empty()) throw InvalidInput("isotonic regression of an empty series");
  if (weights.size() != values.size()) {
    throw InvalidInput("isotonic regression: weights and values differ in length");
  }

  std::vector<Block> stack;
  stack.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InvalidInput("isotonic regression: non-positive weight at " + std::to_string(i));
    }
    if (!std::isfinite(values[i])) {
      throw InvalidInput("isotonic regression: non-finite value at " + std::to_string(i));
    }
    Block current{i, i + 1, weights[i], values[i]};
    while (!stack.empty() && stack.back().mean > current.mean) {
      const Block& previous = stack.back();
      const double total = previous.weight + current.weight;
      const double pooled =
          previous.mean + (current.mean - previous.mean) * (current.weight / total);
      current.mean = std::clamp(pooled, current.mean, previous.mean);
      current.weight = total;
      current.begin = previous.begin;
      stack.pop_back();
    }
    stack.push_back(current);
  }

  IsotonicFit fit;
  fit.fitted.resize(weights.size());
  for (const Block& block : stack) {
    std::fill(fit.fitted.begin() + static_cast<std::ptrdiff_t>(block.begin),
              fit.fitted.begin() + static_cast<std::ptrdiff_t>(block.end), block.mean);
  }
  fit.blocks = std::move(stack);
  return fit;
}

IsotonicFit isotonic_fit(const WeightedSeries& series) {
  series.validate();
  return pool_adjacent_violators(series.weights, series.values);
}

std::vector<DiagramPoint> cumulative_diagram(const WeightedSeries& series) {
  series.validate();
  std::vector<DiagramPoint> points;
  points.reserve(series.weights.size() + 1);
  points.push_back({0.0, 0.0});
  double x = 0.0;
  double y = 0.0;
  for (std::size_t i = 0; i < series.weights.size(); ++i) {
    x += series.weights[i];
    y += series.weights[i] * series.values[i];
    points.push_back({x, y});
  }
  return points;
}

std::vector<double> gcm_slopes(std::span<const DiagramPoint> points) {
  if (points.size() < 2) throw InvalidInput("convex minorant needs at least two points");
  if (points.front().x != 0.0 || points.front().y != 0.0) {
    throw InvalidInput("convex minorant diagram must start at the origin");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].x > points[i - 1].x)) {
      throw InvalidInput("convex minorant diagram: x must be strictly increasing");
    }
  }

  // Lower hull by monotone chain; a middle vertex on or above the chord is dropped.
  std::vector<std::size_t> hull;
  hull.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    while (hull.size() >= 2) {
      const DiagramPoint& a = points[hull[hull.size() - 2]];
      const DiagramPoint& b = points[hull.back()];
      const DiagramPoint& c = points[i];
      const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }

  std::vector<double> slopes(points.size() - 1);
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const DiagramPoint& a = points[hull[k]];
    const DiagramPoint& b = points[hull[k + 1]];
    const double slope = (b.y - a.y) / (b.x - a.x);
    for (std::size_t i = hull[k]; i < hull[k + 1]; ++i) slopes[i] = slope;
  }
  return slopes;
}

IsotonicFit constrained_fit(const WeightedSeries& series, std::size_t split, double bound) {
  series.validate();
  const std::size_t n = series.weights.size();
  if (split > n) throw InvalidInput("constrained fit: split index beyond series length");
  if (!(bound > 0.0 && bound < 1.0)) {
    throw InvalidInput("constrained fit: bound must lie in (0, 1)");
  }

  const std::span<const double> w(series.weights);
  const std::span<const double> v(series.values);

  IsotonicFit fit;
  fit.fitted.resize(n);
  if (split > 0) {
    IsotonicFit left = pool_adjacent_violators(w.first(split), v.first(split));
    for (std::size_t i = 0; i < split; ++i) fit.fitted[i] = std::min(bound, left.fitted[i]);
    fit.blocks = std::move(left.blocks);
  }
  if (split < n) {
    IsotonicFit right = pool_adjacent_violators(w.subspan(split), v.subspan(split));
    for (std::size_t i = split; i < n; ++i) {
      fit.fitted[i] = std::max(bound, right.fitted[i - split]);
    }
    for (Block block : right.blocks) {
      block.begin += split;
      block.end += split;
      fit.blocks.push_back(block);
    }
  }
  return fit;
}

}  // namespace isopref
