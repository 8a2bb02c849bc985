#include "isopref/dquantile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"
#include "isopref/isotonic.hpp"
#include "isopref/parallel.hpp"
#include "isopref/seed.hpp"

namespace isopref {

namespace {

constexpr double kLevelMatch = 1e-9;

void check_grid(double grid_step, double range) {
  if (!(grid_step > 0.0 && grid_step <= 0.01)) {
    throw InvalidInput("D simulation: grid step must lie in (0, 0.01]");
  }
  if (!(range >= 5.0) || !std::isfinite(range)) {
    throw InvalidInput("D simulation: range must be at least 5");
  }
}

}  // namespace

double DQuantileTable::quantile(double level) const {
  for (const auto& [tabulated, value] : quantiles) {
    if (std::abs(tabulated - level) <= kLevelMatch) return value;
  }
  throw InvalidInput("quantile table has no entry for level " + csv::format_double(level));
}

std::vector<double> default_quantile_levels() { return {0.80, 0.90, 0.95, 0.99}; }

DSlopePaths simulate_d_paths(std::uint64_t stream_seed, double grid_step, double range) {
  check_grid(grid_step, range);
  const auto half = static_cast<std::size_t>(std::llround(range / grid_step));
  const std::size_t intervals = 2 * half;

  std::mt19937_64 rng(mix64(stream_seed));
  std::normal_distribution<double> increment(0.0, std::sqrt(grid_step));

  // Two-sided Brownian motion with B(0) = 0 on grid points x_j = (j - half) * step.
  std::vector<double> brownian(intervals + 1, 0.0);
  for (std::size_t k = 1; k <= half; ++k) brownian[half + k] = brownian[half + k - 1] + increment(rng);
  for (std::size_t k = 1; k <= half; ++k) brownian[half - k] = brownian[half - k + 1] + increment(rng);

  DSlopePaths paths;
  paths.interval_right.resize(intervals);
  std::vector<double> slopes(intervals);
  const double leftmost = -static_cast<double>(half) * grid_step;
  double previous = brownian[0] + leftmost * leftmost;
  for (std::size_t j = 1; j <= intervals; ++j) {
    const double x = (static_cast<double>(j) - static_cast<double>(half)) * grid_step;
    const double y = brownian[j] + x * x;
    slopes[j - 1] = (y - previous) / grid_step;
    paths.interval_right[j - 1] = x;
    previous = y;
  }

  const std::vector<double> weights(intervals, 1.0);
  const std::span<const double> w(weights);
  const std::span<const double> d(slopes);
  paths.unconstrained = pool_adjacent_violators(w, d).fitted;
  const auto left = pool_adjacent_violators(w.first(half), d.first(half)).fitted;
  const auto right = pool_adjacent_violators(w.subspan(half), d.subspan(half)).fitted;
  paths.constrained.resize(intervals);
  for (std::size_t j = 0; j < half; ++j) paths.constrained[j] = std::min(left[j], 0.0);
  for (std::size_t j = 0; j < half; ++j) paths.constrained[half + j] = std::max(right[j], 0.0);

  double integral = 0.0;
  for (std::size_t j = 0; j < intervals; ++j) {
    const double g = paths.unconstrained[j];
    const double g0 = paths.constrained[j];
    integral += g * g - g0 * g0;
  }
  paths.integral = integral * grid_step;
  return paths;
}

double simulate_d_draw(std::uint64_t stream_seed, double grid_step, double range) {
  return simulate_d_paths(stream_seed, grid_step, range).integral;
}

double empirical_quantile(std::span<const double> sorted, double probability) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw InvalidInput("quantile probability must lie in [0, 1]");
  }
  const double position = probability * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(position));
  if (below + 1 >= sorted.size()) return sorted.back();
  const double fraction = position - static_cast<double>(below);
  return sorted[below] + fraction * (sorted[below + 1] - sorted[below]);
}

DQuantileTable simulate_d_quantiles(std::size_t replications, double grid_step, double range,
                                    std::uint64_t seed, unsigned threads,
                                    std::span<const double> levels) {
  if (replications < 1000) throw InvalidInput("D simulation needs at least 1000 replications");
  check_grid(grid_step, range);
  std::vector<double> requested(levels.begin(), levels.end());
  if (requested.empty()) requested = default_quantile_levels();
  for (double level : requested) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
  }

  std::vector<double> draws(replications);
  parallel_for(replications, threads, [&](std::size_t i) {
    draws[i] = simulate_d_draw(seed + i, grid_step, range);
  });
  std::sort(draws.begin(), draws.end());

  DQuantileTable table;
  table.replications = replications;
  table.grid_step = grid_step;
  table.range = range;
  table.seed = seed;
  for (double level : requested) table.quantiles[level] = empirical_quantile(draws, level);
  return table;
}

void write_quantile_table(std::ostream& out, const DQuantileTable& table) {
  out << "level,quantile,replications,grid_step,range,seed\n";
  for (const auto& [level, value] : table.quantiles) {
    out << csv::format_double(level) << ',' << csv::format_double(value) << ','
        << table.replications << ',' << csv::format_double(table.grid_step) << ','
        << csv::format_double(table.range) << ',' << table.seed << '\n';
  }
}

void write_quantile_table(const std::filesystem::path& path, const DQuantileTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  write_quantile_table(out, table);
}

DQuantileTable read_quantile_table(std::istream& in) {
  DQuantileTable table;
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (!header_seen) {
      if (trimmed != "level,quantile,replications,grid_step,range,seed") {
        throw InvalidInput("quantile table: unexpected header");
      }
      header_seen = true;
      continue;
    }
    const auto fields = csv::split_line(trimmed);
    const auto where = "quantile table line " + std::to_string(line_number);
    if (fields.size() != 6) throw InvalidInput(where + ": expected 6 fields");
    const auto level = csv::parse_double(fields[0]);
    const auto value = csv::parse_double(fields[1]);
    const auto reps = csv::parse_int(fields[2]);
    const auto step = csv::parse_double(fields[3]);
    const auto range = csv::parse_double(fields[4]);
    const auto seed = csv::parse_uint64(fields[5]);
    if (!level || !value || !reps || !step || !range || !seed) {
      throw InvalidInput(where + ": unparseable field");
    }
    if (!(*level > 0.0 && *level < 1.0) || !(*value > 0.0)) {
      throw InvalidInput(where + ": level must lie in (0, 1) and quantile must be positive");
    }
    if (first_record) {
      table.replications = static_cast<std::size_t>(*reps);
      table.grid_step = *step;
      table.range = *range;
      table.seed = *seed;
      first_record = false;
    }
    table.quantiles[*level] = *value;
  }
  if (table.quantiles.empty()) throw InvalidInput("quantile table has no records");
  double previous = 0.0;
  for (const auto& [level, value] : table.quantiles) {
    if (value < previous) throw InvalidInput("quantile table: quantiles must increase with level");
    previous = value;
  }
  return table;
}

DQuantileTable read_quantile_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_quantile_table(in);
}

}  // namespace isopref
