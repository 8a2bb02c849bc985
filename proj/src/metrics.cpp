#include "isopref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "isopref/error.hpp"

namespace isopref {

namespace {

// exp(-z^2/2) is exactly zero in double precision beyond this many bandwidths.
constexpr double kKernelReach = 40.0;
constexpr double kUnderflow = 1e-300;

double normal_density(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::optional<double> sample_sd(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return std::nullopt;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

OracleEstimate::OracleEstimate(std::span<const ChoicePair> test_pairs, double bandwidth)
    : bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidInput("oracle bandwidth must be positive");
  }
  if (test_pairs.empty()) throw InvalidInput("oracle needs at least one test pair");
  std::vector<ChoicePair> sorted(test_pairs.begin(), test_pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ChoicePair& a, const ChoicePair& b) { return a.relative < b.relative; });
  for (const ChoicePair& pair : sorted) {
    if (locations_.empty() || locations_.back() != pair.relative) {
      locations_.push_back(pair.relative);
      counts_.push_back(0.0);
      successes_.push_back(0.0);
    }
    counts_.back() += 1.0;
    successes_.back() += pair.successor;
  }
}

double OracleEstimate::operator()(double r) const {
  const double reach = kKernelReach * bandwidth_;
  const auto first = std::lower_bound(locations_.begin(), locations_.end(), r - reach);
  const auto last = std::upper_bound(locations_.begin(), locations_.end(), r + reach);
  double numerator = 0.0;
  double denominator = 0.0;
  for (auto it = first; it != last; ++it) {
    const auto g = static_cast<std::size_t>(it - locations_.begin());
    const double k = normal_density((r - *it) / bandwidth_);
    numerator += successes_[g] * k;
    denominator += counts_[g] * k;
  }
  if (denominator >= kUnderflow) return numerator / denominator;

  // Nearest test locations; both neighbours count when equidistant.
  const auto above = std::lower_bound(locations_.begin(), locations_.end(), r);
  double best = std::numeric_limits<double>::infinity();
  if (above != locations_.end()) best = std::min(best, *above - r);
  if (above != locations_.begin()) best = std::min(best, r - *(above - 1));
  double hits = 0.0;
  double total = 0.0;
  if (above != locations_.end() && *above - r == best) {
    const auto g = static_cast<std::size_t>(above - locations_.begin());
    hits += successes_[g];
    total += counts_[g];
  }
  if (above != locations_.begin() && r - *(above - 1) == best) {
    const auto g = static_cast<std::size_t>(above - 1 - locations_.begin());
    hits += successes_[g];
    total += counts_[g];
  }
  return hits / total;
}

double nadaraya_watson_oracle(std::span<const ChoicePair> test_pairs, double bandwidth, double r) {
  return OracleEstimate(test_pairs, bandwidth)(r);
}

std::vector<double> evaluation_grid() {
  std::vector<double> grid(kEvaluationGridSize);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    grid[x] = static_cast<double>(x) / static_cast<double>(kEvaluationGridSize - 1);
  }
  return grid;
}

double test_error(const MonotoneStepFn& fitted, const OracleEstimate& oracle) {
  double total = 0.0;
  const auto grid = evaluation_grid();
  for (double r : grid) total += std::abs(oracle(r) - eval_step(fitted, r));
  return total / static_cast<double>(grid.size());
}

double test_error(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs,
                  double bandwidth) {
  return test_error(fitted, OracleEstimate(test_pairs, bandwidth));
}

std::string to_string(EceBinning binning) {
  return binning == EceBinning::Covariate ? "covariate" : "prediction";
}

EceBinning parse_ece_binning(const std::string& text) {
  if (text == "covariate") return EceBinning::Covariate;
  if (text == "prediction") return EceBinning::Prediction;
  throw InvalidInput("ece_binning must be 'covariate' or 'prediction'");
}

std::size_t bin_index(double x, std::size_t bins) {
  if (bins < 1) throw InvalidInput("at least one bin is required");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("binned quantity outside [0, 1]");
  const double b = static_cast<double>(bins);
  auto index = static_cast<std::size_t>(std::min(std::floor(x * b), b - 1.0));
  // Correct for rounding in x * B so that membership follows the edges i / B.
  while (index + 1 < bins && x >= static_cast<double>(index + 1) / b) ++index;
  while (index > 0 && x < static_cast<double>(index) / b) --index;
  return index;
}

ReliabilityBins reliability_bins(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs,
                                 std::size_t bins, EceBinning binning) {
  if (bins < 1) throw InvalidInput("at least one bin is required");
  if (test_pairs.empty()) throw InvalidInput("calibration needs at least one test pair");
  ReliabilityBins result;
  result.bins.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    result.bins[i].lower = static_cast<double>(i) / static_cast<double>(bins);
    result.bins[i].upper = static_cast<double>(i + 1) / static_cast<double>(bins);
  }
  for (const ChoicePair& pair : test_pairs) {
    const double prediction = eval_step(fitted, pair.relative);
    const double key = binning == EceBinning::Covariate ? pair.relative : prediction;
    ReliabilityBin& bin = result.bins[bin_index(key, bins)];
    ++bin.count;
    bin.confidence += prediction;
    bin.accuracy += pair.successor;
  }
  for (ReliabilityBin& bin : result.bins) {
    if (bin.count == 0) continue;
    bin.confidence /= static_cast<double>(bin.count);
    bin.accuracy /= static_cast<double>(bin.count);
  }
  result.total = test_pairs.size();
  return result;
}

double ece(const ReliabilityBins& bins) {
  if (bins.total == 0) throw InvalidInput("calibration error of an empty test set");
  double total = 0.0;
  for (const ReliabilityBin& bin : bins.bins) {
    if (bin.count == 0) continue;
    total += static_cast<double>(bin.count) * std::abs(bin.confidence - bin.accuracy);
  }
  return total / static_cast<double>(bins.total);
}

double ece(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs, std::size_t bins,
           EceBinning binning) {
  return ece(reliability_bins(fitted, test_pairs, bins, binning));
}

ReplicationSummary summarize_replications(std::span<const ReplicationRecord> records) {
  if (records.empty()) throw InvalidInput("no replications to summarize");
  std::vector<double> errors, eces, lengths;
  std::size_t covered = 0;
  for (const ReplicationRecord& r : records) {
    errors.push_back(r.test_error);
    eces.push_back(r.ece);
    lengths.push_back(r.ci_length());
    covered += r.covered ? 1 : 0;
  }
  ReplicationSummary summary;
  summary.replications = records.size();
  summary.test_error_mean = mean_of(errors);
  summary.test_error_sd = sample_sd(errors, summary.test_error_mean);
  summary.ece_mean = mean_of(eces);
  summary.ece_sd = sample_sd(eces, summary.ece_mean);
  summary.ci_length_mean = mean_of(lengths);
  summary.ci_length_sd = sample_sd(lengths, summary.ci_length_mean);
  summary.coverage = static_cast<double>(covered) / static_cast<double>(records.size());
  return summary;
}

}  // namespace isopref
