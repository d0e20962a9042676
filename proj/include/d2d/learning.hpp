#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "d2d/game.hpp"
#include "d2d/rng.hpp"

namespace d2d {

/// Fixed temperature, or tau(t) = scale / log(1 + t) for slots t >= 1.
class TemperatureSchedule {
 public:
  static TemperatureSchedule fixed(double tau);
  static TemperatureSchedule log_decreasing(double scale);

  double at(std::size_t t) const;
  bool is_fixed() const { return fixed_; }
  double parameter() const { return value_; }

 private:
  TemperatureSchedule(bool fixed, double value) : fixed_(fixed), value_(value) {}
  bool fixed_;
  double value_;
};

/// Estimation noise confined to an interval of width `width`.
struct BoundedNoise {
  double width = 1.0;
};

/// Unbounded noise described by its log moment generating function. The
/// optimizer searches theta in [0, theta_max]; log_mgf must be finite there.
struct MgfNoise {
  std::function<double(double)> log_mgf;
  double theta_max = 100.0;
  std::string label = "custom";
};

MgfNoise gaussian_noise(double sigma, double theta_max = 100.0);

using NoiseSpec = std::variant<BoundedNoise, MgfNoise>;

/// Smallest N with N >= (ln(4/xi) + 2/tau) * ell^2 / (2 (1-xi)^2 tau^2).
std::uint64_t required_samples_bounded(double tau, double xi, double ell);

struct UnboundedSampleCount {
  std::uint64_t samples = 0;
  double theta_star = 0.0;
  double numerator = 0.0;    // ln(4/xi) + 2/tau
  double denominator = 0.0;  // theta*(1-xi)tau - log M(theta*)
  bool theta_at_cap = false;  // optimum sits on theta_max (light-tailed limit)
};

/// Chernoff-style count: ceil(numerator / max_theta [theta (1-xi) tau - log M(theta)]).
/// Throws std::domain_error when the optimized denominator is not positive.
UnboundedSampleCount required_samples_unbounded(double tau, double xi, const MgfNoise& noise);

std::uint64_t required_samples(double tau, double xi, const NoiseSpec& noise);

/// (1 + exp(delta / tau))^-1, evaluated without overflow.
double acceptance_probability(double delta, double tau);

struct SlotRecord {
  std::size_t t = 0;
  double tau = 0.0;
  std::uint64_t samples = 0;
  std::size_t player = 0;
  int trial = 0;
  bool accepted = false;
  double delta = 0.0;     // U^N(current) - U^N(trial), normalized
  double sum_rate = 0.0;  // expected sum rate of the profile after the slot, bit/s
  std::vector<int> channels;
};

struct LearnerState {
  AssignmentProfile profile;
  std::size_t t = 0;
  double tau = 0.0;
  std::uint64_t samples = 0;
};

struct Trajectory {
  AssignmentProfile initial;
  double initial_sum_rate = 0.0;
  std::vector<SlotRecord> slots;

  AssignmentProfile final_profile() const;
};

/// Evaluates the expected sum rate of a profile for trajectory logging.
using SumRateFn = std::function<double(const AssignmentProfile&)>;

/// Memoized expected sum rate. Noisy games are averaged over one shared bank
/// of fading draws so every profile is scored on the same realizations.
class PotentialCache {
 public:
  PotentialCache(const CapGame& game, std::size_t num_mc, std::uint64_t seed);
  double operator()(const AssignmentProfile& profile);
  std::size_t evaluations() const { return values_.size(); }

 private:
  const CapGame* game_;
  std::optional<FadingBank> bank_;
  std::map<std::vector<int>, double> values_;
};

/// One BLLA slot: uniform active player, uniform trial channel (the current one
/// included), two independent N-sample estimates, log-linear acceptance.
/// A non-zero `sample_cap` bounds N per phase.
SlotRecord blla_step(LearnerState& state, const CapGame& game, const TemperatureSchedule& schedule,
                     const NoiseSpec& noise, double xi, Rng& rng, std::uint64_t sample_cap = 0);

/// Same sampling protocol; the trial is taken only if its estimate is strictly larger.
SlotRecord better_response_step(LearnerState& state, const CapGame& game, std::uint64_t n_samples, Rng& rng);

struct RunOptions {
  std::optional<AssignmentProfile> initial;
  SumRateFn sum_rate;  // defaults to a PotentialCache with 256 draws
  /// Optional cap on N per phase; 0 keeps the literal sample count.
  std::uint64_t sample_cap = 0;
};

Trajectory run_blla(const CapGame& game, const TemperatureSchedule& schedule, const NoiseSpec& noise, double xi,
                    std::size_t horizon, std::uint64_t seed, RunOptions options = {});

Trajectory run_br(const CapGame& game, std::uint64_t n_samples, std::size_t horizon, std::uint64_t seed,
                  RunOptions options = {});

/// Delimited table, one row per slot, header first.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

std::string format_channels(const std::vector<int>& channels);

}  // namespace d2d
