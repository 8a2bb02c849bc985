#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isopref/dquantile.hpp"
#include "isopref/inference.hpp"
#include "isopref/metrics.hpp"
#include "isopref/simulate.hpp"

namespace isopref {

// A sweep over scenarios x user counts x replications. Loaded from JSON; see
// docs/formats.md for the schema.
struct ExperimentConfig {
  std::vector<ScenarioSpec> scenarios;
  std::vector<std::size_t> users;
  std::size_t replications = 100;
  double r0 = 1.0 / 3.0;
  double level = 0.95;
  std::uint64_t seed = 20240501;
  double q = kDefaultInitialProbability;
  double bandwidth = kDefaultBandwidth;
  std::size_t bins = kDefaultBins;
  double grid_step = kDefaultGridStep;
  EceBinning binning = EceBinning::Covariate;
  // Empty means the bundled table.
  std::filesystem::path quantile_table;

  void validate() const;
  // One line of key=value pairs echoed at the top of every output table.
  std::string describe() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Parses a probability written as a decimal or as a ratio "a/b".
double parse_ratio(std::string_view text);

// The simulation setting of one replication. Its seed depends only on
// (experiment seed, scenario id, users, replication).
SimConfig replication_config(const ExperimentConfig& config, const ScenarioSpec& scenario,
                             std::size_t users, std::size_t replication);

// Deterministic file name c{id}_n{users}_r{rep}.csv.
std::string dataset_file_name(int scenario_id, std::size_t users, std::size_t replication);

struct FitCurve {
  std::vector<double> r;
  std::vector<double> fitted;
  std::vector<double> oracle;
  std::vector<double> truth;
};

struct ReplicationOutput {
  ReplicationRecord record;
  FitCurve curve;
  ReliabilityBins reliability;
};

// Simulates, splits into halves, fits, scores, and builds the interval at r0.
ReplicationOutput run_replication(const ExperimentConfig& config, const ScenarioSpec& scenario,
                                  std::size_t users, std::size_t replication,
                                  const DQuantileTable& quantiles);

struct ExperimentCell {
  int scenario_id = 0;
  std::string scenario_name;
  std::size_t users = 0;
  std::vector<ReplicationRecord> records;
  std::vector<std::string> failures;
  std::optional<ReplicationSummary> summary;
  // Plot data from replication 0, when it succeeded.
  std::optional<ReplicationOutput> example;
};

struct ExperimentResult {
  std::vector<ExperimentCell> cells;
  std::size_t failures() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const DQuantileTable& quantiles,
                                unsigned threads = 1);

// Writes table1.csv, table2.csv, replications.csv and plots/*.csv.
void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                              const DQuantileTable& quantiles, const std::filesystem::path& dir);

// Path of the bundled quantile table.
std::filesystem::path default_quantile_table_path();

}  // namespace isopref
