#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isopref/model.hpp"

namespace isopref {

inline constexpr double kDefaultBandwidth = 0.01;
inline constexpr std::size_t kDefaultBins = 50;
inline constexpr std::size_t kEvaluationGridSize = 100;

// Gaussian-kernel Nadaraya-Watson smoother of U+ on R over held-out pairs.
// When the kernel weights sum below 1e-300 the average of U+ over the test
// points nearest to r is returned instead.
class OracleEstimate {
 public:
  OracleEstimate(std::span<const ChoicePair> test_pairs, double bandwidth);

  double operator()(double r) const;
  double bandwidth() const { return bandwidth_; }

 private:
  double bandwidth_;
  // Distinct R values in increasing order, with the number of pairs and the
  // number of U+ = 1 at each.
  std::vector<double> locations_;
  std::vector<double> counts_;
  std::vector<double> successes_;
};

double nadaraya_watson_oracle(std::span<const ChoicePair> test_pairs, double bandwidth, double r);

// x / 99 for x = 0..99.
std::vector<double> evaluation_grid();

// Mean absolute gap between oracle and fit over the evaluation grid.
double test_error(const MonotoneStepFn& fitted, const OracleEstimate& oracle);
double test_error(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs,
                  double bandwidth = kDefaultBandwidth);

// Covariate bins on R (the default) or bins on the predicted probability.
enum class EceBinning { Covariate, Prediction };

std::string to_string(EceBinning binning);
EceBinning parse_ece_binning(const std::string& text);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double confidence = 0.0;  // mean prediction
  double accuracy = 0.0;    // mean observed U+
};

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;
  std::size_t total = 0;
};

// Equal-width bins [(i-1)/B, i/B), the last closed at 1.
std::size_t bin_index(double x, std::size_t bins);

ReliabilityBins reliability_bins(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs,
                                 std::size_t bins = kDefaultBins,
                                 EceBinning binning = EceBinning::Covariate);

double ece(const ReliabilityBins& bins);
double ece(const MonotoneStepFn& fitted, std::span<const ChoicePair> test_pairs,
           std::size_t bins = kDefaultBins, EceBinning binning = EceBinning::Covariate);

struct ReplicationRecord {
  std::size_t replication = 0;
  double test_error = 0.0;
  double ece = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  bool covered = false;

  double ci_length() const { return ci_upper - ci_lower; }
};

struct ReplicationSummary {
  std::size_t replications = 0;
  double test_error_mean = 0.0;
  std::optional<double> test_error_sd;
  double ece_mean = 0.0;
  std::optional<double> ece_sd;
  double ci_length_mean = 0.0;
  std::optional<double> ci_length_sd;
  double coverage = 0.0;
};

// Means, sample standard deviations (n - 1 divisor; absent below two
// records) and the share of covering intervals.
ReplicationSummary summarize_replications(std::span<const ReplicationRecord> records);

}  // namespace isopref
