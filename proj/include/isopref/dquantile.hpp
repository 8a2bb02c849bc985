#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace isopref {

// Quantiles of the limiting null law of the likelihood-ratio statistic,
// keyed by confidence level (0.95 maps to the 0.95-quantile).
struct DQuantileTable {
  std::map<double, double> quantiles;
  std::size_t replications = 0;
  double grid_step = 0.0;
  double range = 0.0;
  std::uint64_t seed = 0;

  // Throws InvalidInput when the level is not tabulated (matched to 1e-9).
  double quantile(double level) const;
};

std::vector<double> default_quantile_levels();

// One discretized draw. `unconstrained` holds the greatest-convex-minorant
// slopes of B(x) + x^2 on each grid interval of [-range, range]; `constrained`
// holds the slopes of the minorants restricted to x <= 0 (clipped above at 0)
// and x >= 0 (clipped below at 0). `integrand` is step * (g^2 - g0^2).
struct DSlopePaths {
  std::vector<double> interval_right;  // right endpoint of each interval
  std::vector<double> unconstrained;
  std::vector<double> constrained;
  double integral = 0.0;
};

DSlopePaths simulate_d_paths(std::uint64_t stream_seed, double grid_step, double range);
double simulate_d_draw(std::uint64_t stream_seed, double grid_step, double range);

// Replication i uses a stream seeded from seed + i, so the table does not
// depend on the thread count.
DQuantileTable simulate_d_quantiles(std::size_t replications, double grid_step, double range,
                                    std::uint64_t seed, unsigned threads = 1,
                                    std::span<const double> levels = {});

// Linear interpolation between order statistics (sample must be sorted).
double empirical_quantile(std::span<const double> sorted, double probability);

// CSV with header `level,quantile,replications,grid_step,range,seed`.
void write_quantile_table(std::ostream& out, const DQuantileTable& table);
void write_quantile_table(const std::filesystem::path& path, const DQuantileTable& table);
DQuantileTable read_quantile_table(std::istream& in);
DQuantileTable read_quantile_table(const std::filesystem::path& path);

}  // namespace isopref
