// isopref: monotone preference estimation from sequential binary choices.
//
// Exit codes: 0 success, 1 completed with warnings, 2 invalid input or
// environment.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"
#include "isopref/experiment.hpp"
#include "isopref/inference.hpp"
#include "isopref/ingest.hpp"
#include "isopref/parallel.hpp"
#include "isopref/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace isopref;

namespace {

constexpr int kOk = 0;
constexpr int kWarnings = 1;
constexpr int kInvalid = 2;

WindowRule parse_window(const std::string& text) {
  if (text == "all") return all_steps();
  if (text == "half") return first_half();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto first = csv::parse_int(text.substr(0, colon));
    const auto last = csv::parse_int(text.substr(colon + 1));
    if (first && last && *first >= 1 && *last >= *first) {
      return fixed_steps(static_cast<std::size_t>(*first), static_cast<std::size_t>(*last));
    }
  }
  throw InvalidInput("window must be 'all', 'half' or 'first:last', got '" + text + "'");
}

std::set<std::string> parse_labels(const std::string& text) {
  std::set<std::string> labels;
  for (const auto& label : csv::split_line(text, ',')) {
    const auto trimmed = csv::trim(label);
    if (!trimmed.empty()) labels.emplace(trimmed);
  }
  return labels;
}

DQuantileTable load_quantiles(const std::string& flag, const fs::path& from_config = {}) {
  fs::path path = !flag.empty() ? fs::path(flag) : from_config;
  if (path.empty()) path = default_quantile_table_path();
  return read_quantile_table(path);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidInput("cannot create output directory " + dir.string());
  }
}

struct SimulateArgs {
  std::string config;
  std::string out;
  unsigned threads = default_thread_count();
};

int cmd_simulate(const SimulateArgs& args) {
  const ExperimentConfig config = load_experiment_config(args.config);
  ensure_directory(args.out);
  for (const auto& scenario : config.scenarios) {
    for (std::size_t n : config.users) {
      for (std::size_t rep = 0; rep < config.replications; ++rep) {
        const SimConfig sim = replication_config(config, scenario, n, rep);
        const auto dataset = generate_dataset(sim, args.threads);
        const std::vector<std::string> comments = {
            "config_id=" + std::to_string(scenario.id) + " N=" + std::to_string(n) +
                " rep=" + std::to_string(rep) + " seed=" + std::to_string(sim.seed),
            "q=" + csv::format_double(sim.q) + " preference=" + sim.preference.description() +
                " length=" + describe(sim.length) + " intensity=" + describe(sim.intensity)};
        write_trajectories(fs::path(args.out) / dataset_file_name(scenario.id, n, rep), dataset,
                           comments);
      }
    }
  }
  return kOk;
}

struct FitArgs {
  std::string input;
  std::string out;
  std::string window = "all";
};

int cmd_fit(const FitArgs& args) {
  const auto trajectories = read_trajectories(args.input);
  const PooledSample sample = pool(trajectories, parse_window(args.window));
  const MonotoneStepFn fit = fit_npmle(sample);
  std::ofstream file;
  if (!args.out.empty() && args.out != "-") {
    file.open(args.out, std::ios::binary);
    if (!file) throw InvalidInput("cannot open " + args.out + " for writing");
  }
  std::ostream& out = file.is_open() ? file : std::cout;
  out << "knot,value\n";
  for (std::size_t s = 0; s < fit.knots.size(); ++s) {
    out << csv::format_double(fit.knots[s]) << ',' << csv::format_double(fit.values[s]) << '\n';
  }
  return kOk;
}

struct CiArgs {
  std::string input;
  std::string r0;
  std::string level = "0.95";
  std::string quantiles;
  double grid_step = kDefaultGridStep;
  std::string window = "all";
};

int cmd_ci(const CiArgs& args) {
  const double r0 = parse_ratio(args.r0);
  if (!(r0 > 0.0 && r0 < 1.0)) throw InvalidInput("r0 must lie in (0, 1)");
  const double level = parse_ratio(args.level);
  const DQuantileTable table = load_quantiles(args.quantiles);
  const auto trajectories = read_trajectories(args.input);
  const PooledSample sample = pool(trajectories, parse_window(args.window));
  const ConfidenceInterval ci = confidence_set(sample, r0, level, table, args.grid_step);
  std::cout << "r0,level,estimate,lower,upper,contiguous\n"
            << csv::format_double(r0) << ',' << csv::format_double(level) << ','
            << csv::format_double(ci.estimate) << ',' << csv::format_double(ci.lower) << ','
            << csv::format_double(ci.upper) << ',' << (ci.contiguous ? "true" : "false") << '\n';
  return ci.contiguous ? kOk : kWarnings;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::string quantiles;
  unsigned threads = default_thread_count();
};

int cmd_experiment(const ExperimentArgs& args) {
  const ExperimentConfig config = load_experiment_config(args.config);
  const DQuantileTable table = load_quantiles(args.quantiles, config.quantile_table);
  ensure_directory(args.out);
  const ExperimentResult result = run_experiment(config, table, args.threads);
  write_experiment_outputs(result, config, table, args.out);
  for (const auto& cell : result.cells) {
    for (const auto& failure : cell.failures) {
      std::cerr << "warning: config " << cell.scenario_id << " N=" << cell.users << " " << failure
                << '\n';
    }
  }
  return result.failures() == 0 ? kOk : kWarnings;
}

struct IngestArgs {
  std::string events;
  std::string categories;
  std::string group1;
  std::string group0;
  std::size_t min_choices = 20;
  std::string intensity = "constant";
  std::string format = "default";
  std::string out;
  std::string summary;
};

int cmd_ingest(const IngestArgs& args) {
  const bool movielens = args.format == "movielens";
  if (!movielens && args.format != "default") {
    throw InvalidInput("format must be 'default' or 'movielens'");
  }
  IngestRules rules;
  rules.min_choices = args.min_choices;
  if (args.intensity == "constant") {
    rules.intensity = IntensityMode::Constant;
  } else if (args.intensity == "rating") {
    rules.intensity = IntensityMode::RatingBased;
  } else {
    throw InvalidInput("intensity must be 'constant' or 'rating'");
  }

  const EventLoad load =
      load_events(args.events, movielens ? EventFormat::movielens() : EventFormat{});
  std::vector<RowError> category_errors;
  GroupSpec groups;
  groups.group1 = parse_labels(args.group1);
  groups.group0 = parse_labels(args.group0);
  groups.categories = load_categories(
      args.categories, movielens ? CategoryFormat::movielens() : CategoryFormat{}, &category_errors);

  for (const auto& w : load.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& e : load.errors) {
    std::cerr << args.events << ":" << e.line << ": " << e.message << '\n';
  }
  for (const auto& e : category_errors) {
    std::cerr << args.categories << ":" << e.line << ": " << e.message << '\n';
  }

  IngestSummary summary;
  const auto trajectories = extract_pairwise(load.events, groups, rules, &summary);
  write_trajectories(fs::path(args.out), trajectories);

  std::ostringstream report;
  report << "input_events=" << summary.input_events << '\n'
         << "row_errors=" << load.errors.size() + category_errors.size() << '\n'
         << "users_seen=" << summary.users_seen << '\n'
         << "users_below_min=" << summary.users_below_min << '\n'
         << "valid_users=" << summary.valid_users << '\n'
         << "unknown_items=" << summary.unknown_items << '\n';
  for (const auto& [reason, count] : summary.dropped) report << "dropped_" << reason << '=' << count << '\n';
  if (!args.summary.empty()) {
    std::ofstream file(args.summary, std::ios::binary);
    if (!file) throw InvalidInput("cannot open " + args.summary + " for writing");
    file << report.str();
  }
  std::cerr << report.str();
  const bool warnings = !load.errors.empty() || !category_errors.empty();
  if (warnings) std::cerr << "completed with " << load.errors.size() + category_errors.size() << " row errors\n";
  return warnings ? kWarnings : kOk;
}

struct DQuantileArgs {
  std::size_t replications = 20000;
  double grid_step = 0.01;
  double range = 6.0;
  std::uint64_t seed = 20240501;
  std::string out;
  unsigned threads = default_thread_count();
};

int cmd_dquantile(const DQuantileArgs& args) {
  const DQuantileTable table =
      simulate_d_quantiles(args.replications, args.grid_step, args.range, args.seed, args.threads);
  if (args.out.empty() || args.out == "-") {
    write_quantile_table(std::cout, table);
  } else {
    write_quantile_table(fs::path(args.out), table);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone preference estimation from sequential binary choices"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate trajectory files for an experiment config");
  simulate->add_option("--config", sim.config, "Experiment config (JSON)")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads (default $ISOPREF_THREADS)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the monotone preference function");
  fit_cmd->add_option("--input", fit.input, "Trajectory file")->required();
  fit_cmd->add_option("--out", fit.out, "Output file for knot,value rows (default stdout)");
  fit_cmd->add_option("--window", fit.window, "Steps t used: all | half | first:last");

  CiArgs ci;
  auto* ci_cmd = app.add_subcommand("ci", "Likelihood-ratio confidence set for h(r0)");
  ci_cmd->add_option("--input", ci.input, "Trajectory file")->required();
  ci_cmd->add_option("--r0", ci.r0, "Point in (0,1); decimals or ratios like 1/3")->required();
  ci_cmd->add_option("--level", ci.level, "Confidence level");
  ci_cmd->add_option("--quantiles", ci.quantiles, "Quantile table (default: bundled)");
  ci_cmd->add_option("--grid-step", ci.grid_step, "Spacing of the h0 grid");
  ci_cmd->add_option("--window", ci.window, "Steps t used: all | half | first:last");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation sweep and write tables");
  exp_cmd->add_option("--config", exp.config, "Experiment config (JSON)")->required();
  exp_cmd->add_option("--out", exp.out, "Output directory")->required();
  exp_cmd->add_option("--quantiles", exp.quantiles, "Quantile table override");
  exp_cmd->add_option("--threads", exp.threads, "Worker threads (default $ISOPREF_THREADS)");

  IngestArgs ing;
  auto* ing_cmd = app.add_subcommand("ingest", "Convert rating logs into choice trajectories");
  ing_cmd->add_option("--events", ing.events, "Ratings file")->required();
  ing_cmd->add_option("--categories", ing.categories, "Item categories file")->required();
  ing_cmd->add_option("--group1", ing.group1, "Comma-separated tags of option c1")->required();
  ing_cmd->add_option("--group0", ing.group0, "Comma-separated tags of option c0")->required();
  ing_cmd->add_option("--min-choices", ing.min_choices, "Minimum choices per user");
  ing_cmd->add_option("--intensity", ing.intensity, "constant | rating");
  ing_cmd->add_option("--format", ing.format, "default | movielens");
  ing_cmd->add_option("--out", ing.out, "Output trajectory file")->required();
  ing_cmd->add_option("--summary", ing.summary, "Optional summary file");

  DQuantileArgs dq;
  auto* dq_cmd = app.add_subcommand("dquantile", "Simulate quantiles of the LR null limit");
  dq_cmd->add_option("--replications", dq.replications, "Number of replications");
  dq_cmd->add_option("--grid-step", dq.grid_step, "Brownian motion grid step");
  dq_cmd->add_option("--range", dq.range, "Half-width L of [-L, L]");
  dq_cmd->add_option("--seed", dq.seed, "Base seed");
  dq_cmd->add_option("--out", dq.out, "Output file (default stdout)");
  dq_cmd->add_option("--threads", dq.threads, "Worker threads (default $ISOPREF_THREADS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fit_cmd) return cmd_fit(fit);
    if (*ci_cmd) return cmd_ci(ci);
    if (*exp_cmd) return cmd_experiment(exp);
    if (*ing_cmd) return cmd_ingest(ing);
    if (*dq_cmd) return cmd_dquantile(dq);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
