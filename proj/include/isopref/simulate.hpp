#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "isopref/model.hpp"

namespace isopref {

using Rng = std::mt19937_64;

// Non-decreasing map [0,1] -> [0,1] driving the simulated choices.
class PreferenceSpec {
 public:
  enum class Kind { Quadratic, Gerw, Table };

  // h(r) = 0.4 r^2 + 0.3.
  static PreferenceSpec quadratic();
  // h(x) = p f(x) + (1 - p)(1 - f(x)) with p in (1/2, 1).
  static PreferenceSpec gerw(double p, std::function<double(double)> f, std::string f_name);
  // Piecewise-linear interpolation through (knot, value), constant outside.
  static PreferenceSpec table(std::vector<double> knots, std::vector<double> values);

  double operator()(double r) const { return fn_(r); }
  Kind kind() const { return kind_; }
  const std::string& description() const { return description_; }

 private:
  PreferenceSpec(Kind kind, std::function<double(double)> fn, std::string description);

  Kind kind_;
  std::function<double(double)> fn_;
  std::string description_;
};

PreferenceSpec gerw_preference(double p, std::function<double(double)> f,
                               std::string f_name = "f");

// Named monotone maps accepted in configuration files: identity, square,
// sqrt, one.
std::function<double(double)> named_monotone_map(const std::string& name);

struct ConstantLength {
  std::size_t t0 = 20;
};

// X ~ Poisson(mean); X <= floor maps to floor, X >= ceiling maps to ceiling.
struct TruncatedPoisson {
  double mean = 20.0;
  std::size_t floor = 4;
  std::size_t ceiling = 20;
};

using LengthSpec = std::variant<ConstantLength, TruncatedPoisson>;

void validate(const LengthSpec& spec);
std::size_t truncate_length(long long draw, const TruncatedPoisson& spec);
std::size_t draw_length(const LengthSpec& spec, Rng& rng);
// Largest T the spec can produce.
std::size_t max_length(const LengthSpec& spec);
std::string describe(const LengthSpec& spec);

struct DegenerateIntensity {
  double value = 1.0;
};
struct UniformIntensity {};
// W_1 uniform; afterwards W_t repeats W_{t-1} with probability keep_prob,
// otherwise a fresh uniform is drawn.
struct PersistentIntensity {
  double keep_prob = 0.2;
};

using IntensitySpec = std::variant<DegenerateIntensity, UniformIntensity, PersistentIntensity>;

void validate(const IntensitySpec& spec);
std::vector<double> draw_intensities(const IntensitySpec& spec, std::size_t length, Rng& rng);
std::string describe(const IntensitySpec& spec);

inline constexpr double kDefaultInitialProbability = 0.5;

struct SimConfig {
  std::size_t users = 1;
  double q = kDefaultInitialProbability;
  PreferenceSpec preference = PreferenceSpec::quadratic();
  LengthSpec length = ConstantLength{};
  IntensitySpec intensity = DegenerateIntensity{};
  std::uint64_t seed = 0;

  void validate() const;
};

// Independent stream for one user, derived from (seed, user_index).
Rng user_stream(std::uint64_t seed, std::size_t user_index);

// Draws T, then W_1..W_{T+1}, U_1 ~ Bernoulli(q) and U_{t+1} ~ Bernoulli(h(R_t)).
ChoiceTrajectory gen_trajectory(const SimConfig& config, std::size_t user_index, Rng& rng);

// Users are named "1".."N"; user j uses user_stream(config.seed, j - 1).
std::vector<ChoiceTrajectory> generate_dataset(const SimConfig& config, unsigned threads = 1);

struct TrainTestSplit {
  std::vector<ChoicePair> train;
  std::vector<ChoicePair> test;
};

// Throws InvalidInput when a user's windows overlap or no training pair exists.
TrainTestSplit split_train_test(std::span<const ChoiceTrajectory> trajectories,
                                const WindowRule& train, const WindowRule& test);

// One of the six simulated settings: {constant T = 20, truncated Poisson T}
// x {unit, uniform, persistent intensity}, all with the quadratic preference.
struct ScenarioSpec {
  int id = 1;
  std::string name;
  PreferenceSpec preference = PreferenceSpec::quadratic();
  LengthSpec length = ConstantLength{};
  IntensitySpec intensity = DegenerateIntensity{};
};

ScenarioSpec builtin_scenario(int id);
std::vector<ScenarioSpec> builtin_scenarios();

}  // namespace isopref
