#include "isopref/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"
#include "isopref/parallel.hpp"
#include "isopref/seed.hpp"

namespace isopref {

namespace {

using nlohmann::json;

void require_keys(const json& object, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!object.is_object()) throw InvalidInput(where + " must be an object");
  std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : object.items()) {
    if (!known.contains(item.key())) {
      throw InvalidInput(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
T get_or(const json& object, const char* key, T fallback) {
  const auto it = object.find(key);
  if (it == object.end()) return fallback;
  return it->get<T>();
}

double get_probability(const json& object, const char* key, double fallback) {
  const auto it = object.find(key);
  if (it == object.end()) return fallback;
  if (it->is_string()) return parse_ratio(it->get<std::string>());
  return it->get<double>();
}

PreferenceSpec parse_preference(const json& node) {
  require_keys(node, {"type", "p", "f", "knots", "values"}, "preference");
  const auto type = node.at("type").get<std::string>();
  if (type == "quadratic") return PreferenceSpec::quadratic();
  if (type == "gerw") {
    const auto f = node.at("f").get<std::string>();
    return gerw_preference(node.at("p").get<double>(), named_monotone_map(f), f);
  }
  if (type == "table") {
    return PreferenceSpec::table(node.at("knots").get<std::vector<double>>(),
                                 node.at("values").get<std::vector<double>>());
  }
  throw InvalidInput("unknown preference type '" + type + "'");
}

LengthSpec parse_length(const json& node) {
  require_keys(node, {"type", "t0", "mean", "floor", "ceiling"}, "length");
  const auto type = node.at("type").get<std::string>();
  LengthSpec spec;
  if (type == "constant") {
    spec = ConstantLength{node.at("t0").get<std::size_t>()};
  } else if (type == "truncated_poisson") {
    TruncatedPoisson p;
    p.mean = get_or(node, "mean", p.mean);
    p.floor = get_or(node, "floor", p.floor);
    p.ceiling = get_or(node, "ceiling", p.ceiling);
    spec = p;
  } else {
    throw InvalidInput("unknown length type '" + type + "'");
  }
  validate(spec);
  return spec;
}

IntensitySpec parse_intensity(const json& node) {
  require_keys(node, {"type", "value", "keep_prob"}, "intensity");
  const auto type = node.at("type").get<std::string>();
  IntensitySpec spec;
  if (type == "degenerate") {
    spec = DegenerateIntensity{get_or(node, "value", 1.0)};
  } else if (type == "uniform") {
    spec = UniformIntensity{};
  } else if (type == "persistent") {
    spec = PersistentIntensity{get_or(node, "keep_prob", 0.2)};
  } else {
    throw InvalidInput("unknown intensity type '" + type + "'");
  }
  validate(spec);
  return spec;
}

ScenarioSpec parse_scenario(const json& node) {
  if (node.is_number_integer()) return builtin_scenario(node.get<int>());
  require_keys(node, {"id", "name", "preference", "length", "intensity"}, "configuration");
  ScenarioSpec spec;
  spec.id = node.at("id").get<int>();
  spec.name = get_or<std::string>(node, "name", "configuration " + std::to_string(spec.id));
  if (node.contains("preference")) spec.preference = parse_preference(node.at("preference"));
  spec.length = parse_length(node.at("length"));
  spec.intensity = parse_intensity(node.at("intensity"));
  return spec;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  return out;
}

std::string optional_fixed(const std::optional<double>& value) {
  return value ? csv::format_fixed(*value, 6) : std::string("NA");
}

}  // namespace

double parse_ratio(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    const auto value = csv::parse_double(text);
    if (!value) throw InvalidInput("cannot parse number '" + std::string(text) + "'");
    return *value;
  }
  const auto num = csv::parse_double(text.substr(0, slash));
  const auto den = csv::parse_double(text.substr(slash + 1));
  if (!num || !den || *den == 0.0) {
    throw InvalidInput("cannot parse ratio '" + std::string(text) + "'");
  }
  return *num / *den;
}

void ExperimentConfig::validate() const {
  if (scenarios.empty()) throw InvalidInput("experiment lists no configurations");
  if (users.empty()) throw InvalidInput("experiment lists no user counts");
  for (std::size_t n : users) {
    if (n < 1) throw InvalidInput("user counts must be at least 1");
  }
  std::set<int> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second) throw InvalidInput("duplicate configuration id " + std::to_string(s.id));
  }
  if (replications < 1) throw InvalidInput("replications must be at least 1");
  if (!(r0 > 0.0 && r0 < 1.0)) throw InvalidInput("r0 must lie in (0, 1)");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must lie in (0, 1)");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("q must lie in [0, 1]");
  if (!(bandwidth > 0.0)) throw InvalidInput("bandwidth must be positive");
  if (bins < 1) throw InvalidInput("bins must be at least 1");
  if (!(grid_step > 0.0 && grid_step <= 0.01)) throw InvalidInput("grid_step must lie in (0, 0.01]");
}

std::string ExperimentConfig::describe() const {
  std::ostringstream out;
  out << "q=" << csv::format_double(q) << " zeta=" << csv::format_double(bandwidth)
      << " bins=" << bins << " grid_step=" << csv::format_double(grid_step)
      << " ece_binning=" << to_string(binning) << " level=" << csv::format_double(level)
      << " r0=" << csv::format_double(r0) << " seed=" << seed
      << " replications=" << replications;
  return out.str();
}

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("experiment config is not valid JSON: ") + e.what());
  }
  try {
    require_keys(root,
                 {"configurations", "users", "replications", "r0", "level", "seed", "q",
                  "bandwidth", "bins", "grid_step", "ece_binning", "quantile_table"},
                 "experiment config");
    ExperimentConfig config;
    for (const auto& node : root.at("configurations")) config.scenarios.push_back(parse_scenario(node));
    config.users = root.at("users").get<std::vector<std::size_t>>();
    config.replications = get_or(root, "replications", config.replications);
    config.r0 = get_probability(root, "r0", config.r0);
    config.level = get_probability(root, "level", config.level);
    config.seed = get_or(root, "seed", config.seed);
    config.q = get_probability(root, "q", config.q);
    config.bandwidth = get_or(root, "bandwidth", config.bandwidth);
    config.bins = get_or(root, "bins", config.bins);
    config.grid_step = get_or(root, "grid_step", config.grid_step);
    config.binning = parse_ece_binning(get_or<std::string>(root, "ece_binning", "covariate"));
    if (root.contains("quantile_table")) {
      std::filesystem::path table = root.at("quantile_table").get<std::string>();
      config.quantile_table = table.is_relative() && !base_dir.empty() ? base_dir / table : table;
    }
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path.parent_path());
}

SimConfig replication_config(const ExperimentConfig& config, const ScenarioSpec& scenario,
                             std::size_t users, std::size_t replication) {
  SimConfig sim;
  sim.users = users;
  sim.q = config.q;
  sim.preference = scenario.preference;
  sim.length = scenario.length;
  sim.intensity = scenario.intensity;
  sim.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(scenario.id), users, replication});
  return sim;
}

std::string dataset_file_name(int scenario_id, std::size_t users, std::size_t replication) {
  return "c" + std::to_string(scenario_id) + "_n" + std::to_string(users) + "_r" +
         std::to_string(replication) + ".csv";
}

ReplicationOutput run_replication(const ExperimentConfig& config, const ScenarioSpec& scenario,
                                  std::size_t users, std::size_t replication,
                                  const DQuantileTable& quantiles) {
  const SimConfig sim = replication_config(config, scenario, users, replication);
  const auto dataset = generate_dataset(sim);
  const TrainTestSplit split = split_train_test(dataset, first_half(), second_half());
  if (split.test.empty()) throw InvalidInput("test window selects no pairs");

  const PooledSample train = pool(split.train);
  const MonotoneStepFn fitted = fit_npmle(train);
  const OracleEstimate oracle(split.test, config.bandwidth);

  ReplicationOutput out;
  out.record.replication = replication;
  out.record.test_error = test_error(fitted, oracle);
  out.reliability = reliability_bins(fitted, split.test, config.bins, config.binning);
  out.record.ece = ece(out.reliability);

  const ConfidenceInterval ci =
      confidence_set(train, config.r0, config.level, quantiles, config.grid_step);
  out.record.ci_lower = ci.lower;
  out.record.ci_upper = ci.upper;
  out.record.covered = ci.contains(scenario.preference(config.r0));

  for (double r : evaluation_grid()) {
    out.curve.r.push_back(r);
    out.curve.fitted.push_back(eval_step(fitted, r));
    out.curve.oracle.push_back(oracle(r));
    out.curve.truth.push_back(scenario.preference(r));
  }
  return out;
}

std::size_t ExperimentResult::failures() const {
  std::size_t total = 0;
  for (const auto& cell : cells) total += cell.failures.size();
  return total;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const DQuantileTable& quantiles,
                                unsigned threads) {
  config.validate();
  quantiles.quantile(config.level);

  ExperimentResult result;
  for (const auto& scenario : config.scenarios) {
    for (std::size_t n : config.users) {
      ExperimentCell cell;
      cell.scenario_id = scenario.id;
      cell.scenario_name = scenario.name;
      cell.users = n;
      result.cells.push_back(std::move(cell));
    }
  }

  const std::size_t reps = config.replications;
  const std::size_t tasks = result.cells.size() * reps;
  std::vector<std::optional<ReplicationOutput>> outputs(tasks);
  std::vector<std::string> errors(tasks);
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t cell_index = task / reps;
    const std::size_t rep = task % reps;
    const auto& scenario = config.scenarios[cell_index / config.users.size()];
    try {
      outputs[task] = run_replication(config, scenario, result.cells[cell_index].users, rep, quantiles);
      if (rep != 0) {
        outputs[task]->curve = {};
        outputs[task]->reliability = {};
      }
    } catch (const std::exception& e) {
      errors[task] = e.what();
    }
  });

  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    ExperimentCell& cell = result.cells[c];
    for (std::size_t rep = 0; rep < reps; ++rep) {
      auto& output = outputs[c * reps + rep];
      if (!output) {
        cell.failures.push_back("replication " + std::to_string(rep) + ": " + errors[c * reps + rep]);
        continue;
      }
      cell.records.push_back(output->record);
      if (rep == 0) cell.example = std::move(*output);
    }
    if (!cell.records.empty()) cell.summary = summarize_replications(cell.records);
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                              const DQuantileTable& quantiles, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "plots", ec);
  if (ec) throw InvalidInput("cannot create " + (dir / "plots").string() + ": " + ec.message());

  const std::string banner = "# " + config.describe() + " d_quantile=" +
                             csv::format_double(quantiles.quantile(config.level)) +
                             " d_replications=" + std::to_string(quantiles.replications) +
                             " d_seed=" + std::to_string(quantiles.seed) + "\n";

  auto table1 = open_output(dir / "table1.csv");
  table1 << banner << "config_id,N,test_error_mean,test_error_sd,ece_mean,ece_sd,replications\n";
  auto table2 = open_output(dir / "table2.csv");
  table2 << banner << "config_id,N,ci_length_mean,coverage,replications\n";
  auto reps = open_output(dir / "replications.csv");
  reps << banner << "config_id,N,rep,test_error,ece,ci_lower,ci_upper,ci_length,covered\n";

  for (const ExperimentCell& cell : result.cells) {
    for (const ReplicationRecord& r : cell.records) {
      reps << cell.scenario_id << ',' << cell.users << ',' << r.replication << ','
           << csv::format_double(r.test_error) << ',' << csv::format_double(r.ece) << ','
           << csv::format_double(r.ci_lower) << ',' << csv::format_double(r.ci_upper) << ','
           << csv::format_double(r.ci_length()) << ',' << (r.covered ? 1 : 0) << '\n';
    }
    if (!cell.summary) continue;
    const ReplicationSummary& s = *cell.summary;
    table1 << cell.scenario_id << ',' << cell.users << ',' << csv::format_fixed(s.test_error_mean, 6)
           << ',' << optional_fixed(s.test_error_sd) << ',' << csv::format_fixed(s.ece_mean, 6) << ','
           << optional_fixed(s.ece_sd) << ',' << s.replications << '\n';
    table2 << cell.scenario_id << ',' << cell.users << ',' << csv::format_fixed(s.ci_length_mean, 6)
           << ',' << csv::format_fixed(s.coverage, 4) << ',' << s.replications << '\n';

    if (!cell.example) continue;
    const std::string suffix =
        "_c" + std::to_string(cell.scenario_id) + "_n" + std::to_string(cell.users) + ".csv";
    auto fit = open_output(dir / "plots" / ("fit" + suffix));
    fit << banner << "r,h_hat,oracle,h_true\n";
    const FitCurve& curve = cell.example->curve;
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
      fit << csv::format_double(curve.r[i]) << ',' << csv::format_double(curve.fitted[i]) << ','
          << csv::format_double(curve.oracle[i]) << ',' << csv::format_double(curve.truth[i]) << '\n';
    }
    auto rel = open_output(dir / "plots" / ("reliability" + suffix));
    rel << banner << "bin,lower,upper,count,confidence,accuracy\n";
    const auto& bins = cell.example->reliability.bins;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      rel << b + 1 << ',' << csv::format_double(bins[b].lower) << ','
          << csv::format_double(bins[b].upper) << ',' << bins[b].count << ','
          << csv::format_double(bins[b].confidence) << ',' << csv::format_double(bins[b].accuracy)
          << '\n';
    }
  }
}

std::filesystem::path default_quantile_table_path() {
  if (const char* env = std::getenv("ISOPREF_QUANTILES")) return env;
  return ISOPREF_DEFAULT_QUANTILES;
}

}  // namespace isopref
