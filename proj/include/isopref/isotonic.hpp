#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace isopref {

// Input to weighted isotonic regression: strictly positive weights F_s and
// values in [0, 1] (the per-knot successor means).
struct WeightedSeries {
  std::vector<double> weights;
  std::vector<double> values;

  // Throws InvalidInput when empty, mismatched, or out of range.
  void validate() const;
};

// Half-open index range [begin, end) on which a fit is constant. `mean` is
// the weight-weighted mean of the inputs in the range; for unconstrained fits
// it is also the fitted value.
struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
  double weight = 0.0;
  double mean = 0.0;
};

struct IsotonicFit {
  std::vector<double> fitted;
  std::vector<Block> blocks;
};

// Pool-adjacent-violators on arbitrary finite values with positive weights.
// Minimizes sum w_i (y_i - f_i)^2 over non-decreasing f. Linear time.
IsotonicFit pool_adjacent_violators(std::span<const double> weights,
                                    std::span<const double> values);

// Validated entry point for WeightedSeries.
IsotonicFit isotonic_fit(const WeightedSeries& series);

struct DiagramPoint {
  double x = 0.0;
  double y = 0.0;
};

// Cumulative-sum diagram {(sum F, sum F*U)} starting at the origin.
std::vector<DiagramPoint> cumulative_diagram(const WeightedSeries& series);

// Left-derivatives of the greatest convex minorant of a diagram anchored at
// the origin, evaluated at x_1..x_l. Computed from the lower convex hull, an
// algorithm independent of pool_adjacent_violators.
std::vector<double> gcm_slopes(std::span<const DiagramPoint> points);

// Isotonic fit under the pin h(split) <= bound <= h(split + 1): indices
// [0, split) take min(bound, fit of the left part); indices [split, S) take
// max(bound, fit of the right part). split ranges over 0..S. The returned
// blocks are those of the two independent sub-fits, with means before clipping.
IsotonicFit constrained_fit(const WeightedSeries& series, std::size_t split, double bound);

}  // namespace isopref
