#include "isopref/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isopref/error.hpp"

namespace isopref {

namespace {

void check_event(const ChoiceEvent& event, std::size_t index) {
  if (event.choice > 1) {
    throw InvalidInput("event " + std::to_string(index + 1) + ": choice must be 0 or 1");
  }
  if (!(event.intensity > 0.0) || !std::isfinite(event.intensity)) {
    throw InvalidInput("event " + std::to_string(index + 1) + ": intensity must be positive");
  }
}

}  // namespace

std::vector<double> relative_intensities(std::span<const ChoiceEvent> events) {
  if (events.size() < 2) {
    throw InvalidInput("a trajectory needs at least two events");
  }
  std::vector<double> relative;
  relative.reserve(events.size() - 1);
  double chosen = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    check_event(events[i], i);
    chosen += events[i].choice * events[i].intensity;
    total += events[i].intensity;
    relative.push_back(chosen / total);
  }
  check_event(events.back(), events.size() - 1);
  return relative;
}

ChoiceTrajectory::ChoiceTrajectory(std::string user_id, std::vector<ChoiceEvent> events)
    : user_id_(std::move(user_id)), events_(std::move(events)) {
  relative_ = isopref::relative_intensities(events_);
}

WindowRule all_steps() {
  return [](std::size_t horizon) -> std::optional<TimeWindow> {
    if (horizon == 0) return std::nullopt;
    return TimeWindow{1, horizon};
  };
}

WindowRule first_half() {
  return [](std::size_t horizon) -> std::optional<TimeWindow> {
    if (horizon / 2 == 0) return std::nullopt;
    return TimeWindow{1, horizon / 2};
  };
}

WindowRule second_half() {
  return [](std::size_t horizon) -> std::optional<TimeWindow> {
    if (horizon == 0) return std::nullopt;
    return TimeWindow{horizon / 2 + 1, horizon};
  };
}

WindowRule fixed_steps(std::size_t first, std::size_t last) {
  if (first == 0 || first > last) throw InvalidInput("window must satisfy 1 <= first <= last");
  return [first, last](std::size_t horizon) -> std::optional<TimeWindow> {
    const std::size_t end = std::min(last, horizon);
    if (first > end) return std::nullopt;
    return TimeWindow{first, end};
  };
}

std::vector<ChoicePair> collect_pairs(std::span<const ChoiceTrajectory> trajectories,
                                      const WindowRule& window) {
  std::vector<ChoicePair> pairs;
  for (const ChoiceTrajectory& trajectory : trajectories) {
    const auto range = window(trajectory.horizon());
    if (!range) continue;
    const std::size_t last = std::min(range->last, trajectory.horizon());
    for (std::size_t t = range->first; t <= last; ++t) {
      pairs.push_back({trajectory.relative(t), trajectory.successor(t)});
    }
  }
  return pairs;
}

std::size_t PooledSample::total() const {
  std::size_t sum = 0;
  for (std::size_t c : counts) sum += c;
  return sum;
}

WeightedSeries PooledSample::series() const {
  WeightedSeries series;
  series.weights.assign(counts.begin(), counts.end());
  series.values = means;
  return series;
}

PooledSample pool(std::span<const ChoicePair> pairs) {
  if (pairs.empty()) throw InvalidInput("no (R, U) pairs to pool");
  std::vector<ChoicePair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ChoicePair& a, const ChoicePair& b) { return a.relative < b.relative; });

  PooledSample sample;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double knot = sorted[i].relative;
    if (!(knot >= 0.0 && knot <= 1.0)) throw InvalidInput("relative intensity outside [0, 1]");
    std::size_t count = 0;
    std::size_t successes = 0;
    for (; i < sorted.size() && sorted[i].relative == knot; ++i) {
      ++count;
      successes += sorted[i].successor;
    }
    sample.knots.push_back(knot);
    sample.counts.push_back(count);
    sample.means.push_back(static_cast<double>(successes) / static_cast<double>(count));
  }
  return sample;
}

PooledSample pool(std::span<const ChoiceTrajectory> trajectories, const WindowRule& window) {
  const auto pairs = collect_pairs(trajectories, window);
  return pool(pairs);
}

double bernoulli_term(double mean, double h) {
  double term = 0.0;
  if (mean > 0.0) term += mean * std::log(h);
  if (mean < 1.0) term += (1.0 - mean) * std::log1p(-h);
  return term;
}

LogLikelihood loglik(const PooledSample& sample, std::span<const double> values) {
  if (values.size() != sample.size()) {
    throw InvalidInput("log-likelihood: one value per knot is required");
  }
  LogLikelihood result;
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double h = values[s];
    const double u = sample.means[s];
    if (!(h >= 0.0 && h <= 1.0)) throw InvalidInput("log-likelihood: value outside [0, 1]");
    if ((h == 0.0 && u > 0.0) || (h == 1.0 && u < 1.0)) {
      return {-std::numeric_limits<double>::infinity(), false};
    }
    result.value += static_cast<double>(sample.counts[s]) * bernoulli_term(u, h);
  }
  return result;
}

void MonotoneStepFn::validate() const {
  if (knots.empty()) throw InvalidInput("step function has no knots");
  if (knots.size() != values.size()) {
    throw InvalidInput("step function: knots and values differ in length");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i] >= 0.0 && knots[i] <= 1.0) || !(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw InvalidInput("step function: knot or value outside [0, 1]");
    }
    if (i > 0 && (!(knots[i] > knots[i - 1]) || values[i] < values[i - 1])) {
      throw InvalidInput("step function: knots must increase and values must not decrease");
    }
  }
}

double eval_step(const MonotoneStepFn& fn, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("step function evaluated outside [0, 1]");
  if (fn.knots.empty()) throw InvalidInput("step function has no knots");
  const auto it = std::upper_bound(fn.knots.begin(), fn.knots.end(), r);
  if (it == fn.knots.begin()) return fn.values.front();
  return fn.values[static_cast<std::size_t>(it - fn.knots.begin()) - 1];
}

}  // namespace isopref
