#include "isopref/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isopref/error.hpp"

namespace isopref {

namespace {

void check_r0(double r0) {
  if (!(r0 > 0.0 && r0 < 1.0)) throw InvalidInput("r0 must lie in (0, 1)");
}

void check_h0(double h0) {
  if (!(h0 > 0.0 && h0 < 1.0)) throw InvalidInput("h0 must lie in (0, 1)");
}

// Log-likelihood of a block whose observations have mean `mean`, fitted at h.
double block_loglik(const Block& block, double h) {
  return block.weight * bernoulli_term(block.mean, h);
}

}  // namespace

MonotoneStepFn fit_npmle(const PooledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("cannot fit an empty sample");
  const IsotonicFit fit = isotonic_fit(sample.series());
  return {sample.knots, fit.fitted};
}

std::size_t split_index(std::span<const double> knots, double r0) {
  return static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), r0) -
                                  knots.begin());
}

MonotoneStepFn fit_constrained(const PooledSample& sample, double r0, double h0) {
  if (sample.size() == 0) throw InvalidInput("cannot fit an empty sample");
  check_r0(r0);
  check_h0(h0);
  const IsotonicFit fit = constrained_fit(sample.series(), split_index(sample.knots, r0), h0);
  return {sample.knots, fit.fitted};
}

double lr_statistic(const PooledSample& sample, double r0, double h0) {
  const MonotoneStepFn free_fit = fit_npmle(sample);
  const MonotoneStepFn pinned = fit_constrained(sample, r0, h0);
  double gap = 0.0;
  for (std::size_t s = 0; s < sample.size(); ++s) {
    if (free_fit.values[s] == pinned.values[s]) continue;
    gap += static_cast<double>(sample.counts[s]) *
           (bernoulli_term(sample.means[s], free_fit.values[s]) -
            bernoulli_term(sample.means[s], pinned.values[s]));
  }
  return 2.0 * gap;
}

LrProfiler::LrProfiler(const PooledSample& sample, double r0) : r0_(r0) {
  if (sample.size() == 0) throw InvalidInput("cannot profile an empty sample");
  check_r0(r0);
  const WeightedSeries series = sample.series();
  series.validate();
  const IsotonicFit full = pool_adjacent_violators(series.weights, series.values);
  const std::size_t split = split_index(sample.knots, r0);
  estimate_ = full.fitted[split == 0 ? 0 : split - 1];

  const std::span<const double> w(series.weights);
  const std::span<const double> v(series.values);
  if (split > 0) left_ = pool_adjacent_violators(w.first(split), v.first(split)).blocks;
  if (split < w.size()) right_ = pool_adjacent_violators(w.subspan(split), v.subspan(split)).blocks;

  // Gap between the monotone fit and the two unclipped sub-fits; it is <= 0
  // because the sub-fits drop the ordering across the split.
  double sub_fits = 0.0;
  for (const Block& b : left_) sub_fits += block_loglik(b, b.mean);
  for (const Block& b : right_) sub_fits += block_loglik(b, b.mean);
  double free_fit = 0.0;
  for (const Block& b : full.blocks) free_fit += block_loglik(b, b.mean);
  unconstrained_loglik_ = free_fit - sub_fits;
}

double LrProfiler::statistic(double h0) const {
  check_h0(h0);
  double clipped = 0.0;
  for (const Block& b : left_) {
    if (b.mean > h0) clipped += block_loglik(b, b.mean) - block_loglik(b, h0);
  }
  for (const Block& b : right_) {
    if (b.mean < h0) clipped += block_loglik(b, b.mean) - block_loglik(b, h0);
  }
  return 2.0 * (unconstrained_loglik_ + clipped);
}

LrProfile lr_profile(const PooledSample& sample, double r0, std::span<const double> grid) {
  const LrProfiler profiler(sample, r0);
  LrProfile profile{r0, {grid.begin(), grid.end()}, {}};
  profile.statistics.reserve(grid.size());
  for (double h0 : grid) profile.statistics.push_back(profiler.statistic(h0));
  return profile;
}

ConfidenceInterval confidence_set(const PooledSample& sample, double r0, double level,
                                  const DQuantileTable& quantiles, double grid_step) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must lie in (0, 1)");
  if (!(grid_step > 0.0 && grid_step <= 0.01)) {
    throw InvalidInput("grid step must lie in (0, 0.01]");
  }
  const double critical = quantiles.quantile(level);
  const LrProfiler profiler(sample, r0);

  ConfidenceInterval interval;
  interval.level = level;
  interval.estimate = profiler.estimate();

  bool any_accepted = false;
  bool rejected_since_accept = false;
  for (std::size_t k = 1;; ++k) {
    const double h0 = static_cast<double>(k) * grid_step;
    if (h0 >= 1.0 - 1e-12) break;
    if (profiler.statistic(h0) <= critical) {
      if (!any_accepted) {
        interval.lower = h0;
        any_accepted = true;
      } else if (rejected_since_accept) {
        interval.contiguous = false;
      }
      interval.upper = h0;
      rejected_since_accept = false;
    } else if (any_accepted) {
      rejected_since_accept = true;
    }
  }
  if (!any_accepted) {
    throw InvalidState("no grid value of h0 is accepted at level " + std::to_string(level));
  }
  // The estimate itself has statistic zero.
  interval.lower = std::min(interval.lower, interval.estimate);
  interval.upper = std::max(interval.upper, interval.estimate);
  return interval;
}

}  // namespace isopref
