#include "isopref/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "isopref/csv.hpp"
#include "isopref/error.hpp"
#include "isopref/parallel.hpp"
#include "isopref/seed.hpp"

namespace isopref {

namespace {

constexpr std::size_t kValidationPoints = 1000;

void check_preference(const std::function<double(double)>& fn) {
  double previous = -1.0;
  for (std::size_t i = 0; i <= kValidationPoints; ++i) {
    const double r = static_cast<double>(i) / kValidationPoints;
    const double h = fn(r);
    if (!(h >= 0.0 && h <= 1.0)) throw InvalidInput("preference function leaves [0, 1]");
    if (h < previous) throw InvalidInput("preference function is decreasing somewhere");
    previous = h;
  }
}

// Uniform draw on the open interval (0, 1).
double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (;;) {
    const double u = uniform(rng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

bool bernoulli(double p, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  return uniform(rng) < p;
}

}  // namespace

PreferenceSpec::PreferenceSpec(Kind kind, std::function<double(double)> fn,
                               std::string description)
    : kind_(kind), fn_(std::move(fn)), description_(std::move(description)) {
  check_preference(fn_);
}

PreferenceSpec PreferenceSpec::quadratic() {
  return PreferenceSpec(Kind::Quadratic, [](double r) { return 0.4 * r * r + 0.3; },
                        "quadratic(0.4*r^2+0.3)");
}

PreferenceSpec PreferenceSpec::gerw(double p, std::function<double(double)> f,
                                    std::string f_name) {
  if (!(p > 0.5 && p < 1.0)) throw InvalidInput("gerw preference: p must lie in (1/2, 1)");
  if (!f) throw InvalidInput("gerw preference: missing f");
  for (std::size_t i = 0; i <= kValidationPoints; ++i) {
    const double x = static_cast<double>(i) / kValidationPoints;
    const double fx = f(x);
    if (!(fx >= 0.0 && fx <= 1.0)) throw InvalidInput("gerw preference: f leaves [0, 1]");
  }
  auto h = [p, f = std::move(f)](double x) {
    const double fx = f(x);
    return p * fx + (1.0 - p) * (1.0 - fx);
  };
  return PreferenceSpec(Kind::Gerw, std::move(h),
                        "gerw(p=" + csv::format_double(p) + ",f=" + f_name + ")");
}

PreferenceSpec PreferenceSpec::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw InvalidInput("table preference: need equally many knots and values");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw InvalidInput("table preference: knots must increase");
  }
  auto h = [knots, values](double r) {
    if (r <= knots.front()) return values.front();
    if (r >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), r);
    const auto hi = static_cast<std::size_t>(it - knots.begin());
    const std::size_t lo = hi - 1;
    const double t = (r - knots[lo]) / (knots[hi] - knots[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
  };
  return PreferenceSpec(Kind::Table, std::move(h),
                        "table(" + std::to_string(knots.size()) + " knots)");
}

PreferenceSpec gerw_preference(double p, std::function<double(double)> f, std::string f_name) {
  return PreferenceSpec::gerw(p, std::move(f), std::move(f_name));
}

std::function<double(double)> named_monotone_map(const std::string& name) {
  if (name == "identity") return [](double x) { return x; };
  if (name == "square") return [](double x) { return x * x; };
  if (name == "sqrt") return [](double x) { return std::sqrt(x); };
  if (name == "one") return [](double) { return 1.0; };
  throw InvalidInput("unknown monotone map '" + name + "'");
}

void validate(const LengthSpec& spec) {
  if (const auto* c = std::get_if<ConstantLength>(&spec)) {
    if (c->t0 < 1) throw InvalidInput("constant length must be at least 1");
  } else {
    const auto& p = std::get<TruncatedPoisson>(spec);
    if (!(p.mean > 0.0) || !std::isfinite(p.mean)) throw InvalidInput("Poisson mean must be positive");
    if (p.floor < 1 || p.floor > p.ceiling) {
      throw InvalidInput("truncated Poisson needs 1 <= floor <= ceiling");
    }
  }
}

std::size_t truncate_length(long long draw, const TruncatedPoisson& spec) {
  if (draw <= static_cast<long long>(spec.floor)) return spec.floor;
  if (draw >= static_cast<long long>(spec.ceiling)) return spec.ceiling;
  return static_cast<std::size_t>(draw);
}

std::size_t draw_length(const LengthSpec& spec, Rng& rng) {
  if (const auto* c = std::get_if<ConstantLength>(&spec)) return c->t0;
  const auto& p = std::get<TruncatedPoisson>(spec);
  std::poisson_distribution<long long> poisson(p.mean);
  return truncate_length(poisson(rng), p);
}

std::size_t max_length(const LengthSpec& spec) {
  if (const auto* c = std::get_if<ConstantLength>(&spec)) return c->t0;
  return std::get<TruncatedPoisson>(spec).ceiling;
}

std::string describe(const LengthSpec& spec) {
  if (const auto* c = std::get_if<ConstantLength>(&spec)) {
    return "constant(" + std::to_string(c->t0) + ")";
  }
  const auto& p = std::get<TruncatedPoisson>(spec);
  return "truncated_poisson(mean=" + csv::format_double(p.mean) +
         ",floor=" + std::to_string(p.floor) + ",ceiling=" + std::to_string(p.ceiling) + ")";
}

void validate(const IntensitySpec& spec) {
  if (const auto* d = std::get_if<DegenerateIntensity>(&spec)) {
    if (!(d->value > 0.0) || !std::isfinite(d->value)) {
      throw InvalidInput("degenerate intensity must be positive");
    }
  } else if (const auto* p = std::get_if<PersistentIntensity>(&spec)) {
    if (!(p->keep_prob >= 0.0 && p->keep_prob < 1.0)) {
      throw InvalidInput("persistent intensity: keep probability must lie in [0, 1)");
    }
  }
}

std::vector<double> draw_intensities(const IntensitySpec& spec, std::size_t length, Rng& rng) {
  if (length < 1) throw InvalidInput("intensity sequence length must be at least 1");
  validate(spec);
  std::vector<double> w(length);
  if (const auto* d = std::get_if<DegenerateIntensity>(&spec)) {
    std::fill(w.begin(), w.end(), d->value);
  } else if (std::holds_alternative<UniformIntensity>(spec)) {
    for (double& x : w) x = open_uniform(rng);
  } else {
    const double keep = std::get<PersistentIntensity>(spec).keep_prob;
    w[0] = open_uniform(rng);
    for (std::size_t t = 1; t < length; ++t) {
      w[t] = bernoulli(keep, rng) ? w[t - 1] : open_uniform(rng);
    }
  }
  return w;
}

std::string describe(const IntensitySpec& spec) {
  if (const auto* d = std::get_if<DegenerateIntensity>(&spec)) {
    return "degenerate(" + csv::format_double(d->value) + ")";
  }
  if (std::holds_alternative<UniformIntensity>(spec)) return "uniform(0,1)";
  return "persistent(keep=" + csv::format_double(std::get<PersistentIntensity>(spec).keep_prob) + ")";
}

void SimConfig::validate() const {
  if (users < 1) throw InvalidInput("simulation needs at least one user");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("initial probability q must lie in [0, 1]");
  isopref::validate(length);
  isopref::validate(intensity);
}

Rng user_stream(std::uint64_t seed, std::size_t user_index) {
  return Rng(derive_seed(seed, {user_index}));
}

ChoiceTrajectory gen_trajectory(const SimConfig& config, std::size_t user_index, Rng& rng) {
  const std::size_t horizon = draw_length(config.length, rng);
  const std::vector<double> intensity = draw_intensities(config.intensity, horizon + 1, rng);

  std::vector<ChoiceEvent> events(horizon + 1);
  events[0] = {static_cast<std::uint8_t>(bernoulli(config.q, rng)), intensity[0]};
  // Same accumulation as relative_intensities, so R_t here is bitwise equal
  // to the value the trajectory stores.
  double chosen = 0.0;
  double total = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    chosen += events[t - 1].choice * events[t - 1].intensity;
    total += events[t - 1].intensity;
    const double relative = chosen / total;
    events[t] = {static_cast<std::uint8_t>(bernoulli(config.preference(relative), rng)),
                 intensity[t]};
  }
  return ChoiceTrajectory(std::to_string(user_index + 1), std::move(events));
}

std::vector<ChoiceTrajectory> generate_dataset(const SimConfig& config, unsigned threads) {
  config.validate();
  std::vector<std::optional<ChoiceTrajectory>> slots(config.users);
  parallel_for(config.users, threads, [&](std::size_t j) {
    Rng rng = user_stream(config.seed, j);
    slots[j].emplace(gen_trajectory(config, j, rng));
  });
  std::vector<ChoiceTrajectory> dataset;
  dataset.reserve(config.users);
  for (auto& slot : slots) dataset.push_back(std::move(*slot));
  return dataset;
}

TrainTestSplit split_train_test(std::span<const ChoiceTrajectory> trajectories,
                                const WindowRule& train, const WindowRule& test) {
  TrainTestSplit split;
  for (const ChoiceTrajectory& trajectory : trajectories) {
    const std::size_t horizon = trajectory.horizon();
    const auto a = train(horizon);
    const auto b = test(horizon);
    if (a && b && a->first <= b->last && b->first <= a->last) {
      throw InvalidInput("train and test windows overlap for user " + trajectory.user_id());
    }
    if (a) {
      for (std::size_t t = a->first; t <= std::min(a->last, horizon); ++t) {
        split.train.push_back({trajectory.relative(t), trajectory.successor(t)});
      }
    }
    if (b) {
      for (std::size_t t = b->first; t <= std::min(b->last, horizon); ++t) {
        split.test.push_back({trajectory.relative(t), trajectory.successor(t)});
      }
    }
  }
  if (split.train.empty()) throw InvalidInput("training window selects no pairs");
  return split;
}

ScenarioSpec builtin_scenario(int id) {
  if (id < 1 || id > 6) throw InvalidInput("scenario id must be 1..6");
  ScenarioSpec spec;
  spec.id = id;
  const bool random_length = (id % 2) == 0;
  spec.length = random_length ? LengthSpec{TruncatedPoisson{}} : LengthSpec{ConstantLength{20}};
  const int regime = (id - 1) / 2;
  if (regime == 0) {
    spec.intensity = DegenerateIntensity{1.0};
  } else if (regime == 1) {
    spec.intensity = UniformIntensity{};
  } else {
    spec.intensity = PersistentIntensity{0.2};
  }
  static const char* const kRegimes[] = {"equal", "uniform", "persistent"};
  spec.name = std::string(kRegimes[regime]) + " intensity, " +
              (random_length ? "random" : "constant") + " number of choices";
  return spec;
}

std::vector<ScenarioSpec> builtin_scenarios() {
  std::vector<ScenarioSpec> all;
  for (int id = 1; id <= 6; ++id) all.push_back(builtin_scenario(id));
  return all;
}

}  // namespace isopref
