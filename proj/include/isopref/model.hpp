#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isopref/isotonic.hpp"

namespace isopref {

// One binary choice: choice == 1 selects option c1, 0 selects c0.
struct ChoiceEvent {
  std::uint8_t choice = 0;
  double intensity = 1.0;

  friend bool operator==(const ChoiceEvent&, const ChoiceEvent&) = default;
};

// R_1..R_T for a sequence of T+1 events. R_t is the intensity-weighted share
// of c1 among the first t events, accumulated left to right with one
// division per step. Every caller goes through this routine so that equal
// histories yield bitwise-equal ratios.
std::vector<double> relative_intensities(std::span<const ChoiceEvent> events);

// A single user's ordered choices together with the derived R_t.
class ChoiceTrajectory {
 public:
  ChoiceTrajectory(std::string user_id, std::vector<ChoiceEvent> events);

  const std::string& user_id() const { return user_id_; }
  std::span<const ChoiceEvent> events() const { return events_; }

  // T, the number of (U_{t+1}, R_t) pairs available.
  std::size_t horizon() const { return events_.size() - 1; }

  // R_t for t in 1..T.
  double relative(std::size_t t) const { return relative_[t - 1]; }
  std::span<const double> relative_intensities() const { return relative_; }

  // U_{t+1} for t in 1..T.
  std::uint8_t successor(std::size_t t) const { return events_[t].choice; }

 private:
  std::string user_id_;
  std::vector<ChoiceEvent> events_;
  std::vector<double> relative_;
};

// (R_t, U_{t+1}).
struct ChoicePair {
  double relative = 0.0;
  std::uint8_t successor = 0;
};

// Inclusive range of t (1-based).
struct TimeWindow {
  std::size_t first = 1;
  std::size_t last = 1;
};

// Maps a user's horizon T to the window of t used for that user, or nullopt
// when the user contributes no pairs.
using WindowRule = std::function<std::optional<TimeWindow>(std::size_t horizon)>;

WindowRule all_steps();
// t = 1..floor(T/2).
WindowRule first_half();
// t = floor(T/2)+1..T.
WindowRule second_half();
// t = first..min(last, T).
WindowRule fixed_steps(std::size_t first, std::size_t last);

std::vector<ChoicePair> collect_pairs(std::span<const ChoiceTrajectory> trajectories,
                                      const WindowRule& window);

// Sufficient statistics: distinct knots R_(s), counts F_s, successor means.
struct PooledSample {
  std::vector<double> knots;
  std::vector<std::size_t> counts;
  std::vector<double> means;

  std::size_t size() const { return knots.size(); }
  std::size_t total() const;
  WeightedSeries series() const;
};

// Groups pairs by exact equality of R. Throws InvalidInput on an empty input.
PooledSample pool(std::span<const ChoicePair> pairs);
PooledSample pool(std::span<const ChoiceTrajectory> trajectories, const WindowRule& window);

struct LogLikelihood {
  double value = 0.0;
  // False when some h_s assigns probability zero to an observed outcome;
  // value is then -infinity.
  bool finite = true;
};

// sum_s F_s [U_s log h_s + (1 - U_s) log(1 - h_s)] with 0 log 0 = 0.
LogLikelihood loglik(const PooledSample& sample, std::span<const double> values);

// Contribution of one observation mean at probability h, weight one.
double bernoulli_term(double mean, double h);

// Right-continuous non-decreasing step function with jumps at the knots,
// extended by its first value to the left of the first knot.
struct MonotoneStepFn {
  std::vector<double> knots;
  std::vector<double> values;

  void validate() const;
};

double eval_step(const MonotoneStepFn& fn, double r);

}  // namespace isopref
