#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isopref/dquantile.hpp"
#include "isopref/isotonic.hpp"
#include "isopref/model.hpp"

namespace isopref {

// Monotone maximum-likelihood fit with jumps at the pooled knots.
MonotoneStepFn fit_npmle(const PooledSample& sample);

// Number of knots <= r0, i.e. the count of knots on the left of the pin.
std::size_t split_index(std::span<const double> knots, double r0);

// Maximum-likelihood fit under h(r0) = h0. Knots <= r0 are capped at h0,
// knots > r0 are floored at h0.
MonotoneStepFn fit_constrained(const PooledSample& sample, double r0, double h0);

// 2 (l(unconstrained) - l(constrained)), evaluated knot by knot.
double lr_statistic(const PooledSample& sample, double r0, double h0);

// Evaluates the LR statistic for many h0 at one r0. The left and right
// sub-fits do not depend on h0, so each evaluation only clips their blocks.
class LrProfiler {
 public:
  LrProfiler(const PooledSample& sample, double r0);

  double r0() const { return r0_; }
  // Unconstrained estimate at r0.
  double estimate() const { return estimate_; }
  double statistic(double h0) const;

 private:
  double r0_ = 0.0;
  double estimate_ = 0.0;
  double unconstrained_loglik_ = 0.0;
  std::vector<Block> left_;
  std::vector<Block> right_;
};

struct LrProfile {
  double r0 = 0.0;
  std::vector<double> grid;
  std::vector<double> statistics;
};

LrProfile lr_profile(const PooledSample& sample, double r0, std::span<const double> grid);

struct ConfidenceInterval {
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  // False when a rejected grid point lies strictly between accepted ones.
  bool contiguous = true;
  double estimate = 0.0;

  double length() const { return upper - lower; }
  bool contains(double h) const { return lower <= h && h <= upper; }
};

inline constexpr double kDefaultGridStep = 0.001;

// Inverts the LR test over h0 in {step, 2 step, ..., 1 - step}: h0 is accepted
// when its statistic does not exceed the tabulated quantile. Reports the hull
// of the accepted points together with the estimate at r0.
ConfidenceInterval confidence_set(const PooledSample& sample, double r0, double level,
                                  const DQuantileTable& quantiles,
                                  double grid_step = kDefaultGridStep);

}  // namespace isopref
