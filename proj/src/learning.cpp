#include "d2d/learning.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace d2d {

TemperatureSchedule TemperatureSchedule::fixed(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("temperature must be positive");
  return {true, tau};
}

TemperatureSchedule TemperatureSchedule::log_decreasing(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("schedule scale must be positive");
  return {false, scale};
}

double TemperatureSchedule::at(std::size_t t) const {
  if (fixed_) return value_;
  if (t < 1) throw std::invalid_argument("decreasing schedule is defined for t >= 1");
  return value_ / std::log1p(static_cast<double>(t));
}

MgfNoise gaussian_noise(double sigma, double theta_max) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_noise: sigma must be positive");
  const double var = sigma * sigma;
  return {[var](double theta) { return 0.5 * theta * theta * var; }, theta_max,
          "gaussian(sigma=" + std::to_string(sigma) + ")"};
}

namespace {

void check_xi_tau(double tau, double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in (0, 1)");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
}

std::uint64_t ceil_count(double value) {
  constexpr double limit = 9007199254740992.0;  // 2^53
  if (!std::isfinite(value) || value > limit) throw std::overflow_error("required sample count overflows");
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(value)));
}

double sample_numerator(double tau, double xi) { return std::log(4.0 / xi) + 2.0 / tau; }

}  // namespace

std::uint64_t required_samples_bounded(double tau, double xi, double ell) {
  check_xi_tau(tau, xi);
  if (!(ell > 0.0)) throw std::invalid_argument("noise width must be positive");
  const double slack = (1.0 - xi) * tau;
  return ceil_count(sample_numerator(tau, xi) * ell * ell / (2.0 * slack * slack));
}

UnboundedSampleCount required_samples_unbounded(double tau, double xi, const MgfNoise& noise) {
  check_xi_tau(tau, xi);
  if (!noise.log_mgf) throw std::invalid_argument("noise spec has no log-MGF");
  if (!(noise.theta_max > 0.0) || !std::isfinite(noise.theta_max))
    throw std::invalid_argument("noise spec needs a finite positive theta_max");
  const double slope = (1.0 - xi) * tau;
  // log M is convex, so the exponent is concave in theta and Brent finds the peak.
  auto neg_exponent = [&](double theta) { return -(theta * slope - noise.log_mgf(theta)); };
  const auto [theta, neg_best] = boost::math::tools::brent_find_minima(
      neg_exponent, 0.0, noise.theta_max, std::numeric_limits<double>::digits);
  UnboundedSampleCount r;
  r.theta_star = theta;
  r.numerator = sample_numerator(tau, xi);
  r.denominator = -neg_best;
  r.theta_at_cap = noise.theta_max - theta <= 1e-6 * noise.theta_max;
  if (!(r.denominator > 0.0) || !std::isfinite(r.denominator))
    throw std::domain_error("noise MGF too heavy: optimized Chernoff exponent is not positive");
  r.samples = ceil_count(r.numerator / r.denominator);
  return r;
}

std::uint64_t required_samples(double tau, double xi, const NoiseSpec& noise) {
  if (const auto* b = std::get_if<BoundedNoise>(&noise)) return required_samples_bounded(tau, xi, b->width);
  return required_samples_unbounded(tau, xi, std::get<MgfNoise>(noise)).samples;
}

double acceptance_probability(double delta, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("acceptance_probability: tau must be positive");
  const double x = delta / tau;
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

AssignmentProfile Trajectory::final_profile() const {
  AssignmentProfile p = initial;
  if (!slots.empty()) p.channel = slots.back().channels;
  return p;
}

PotentialCache::PotentialCache(const CapGame& game, std::size_t num_mc, std::uint64_t seed) : game_(&game) {
  if (game.mode() == UtilityMode::noisy) bank_.emplace(game.num_players(), num_mc, seed);
}

double PotentialCache::operator()(const AssignmentProfile& profile) {
  auto it = values_.find(profile.channel);
  if (it != values_.end()) return it->second;
  const double v = bank_ ? game_->potential(profile, *bank_) : game_->potential(profile, 1, 0);
  values_.emplace(profile.channel, v);
  return v;
}

namespace {

struct Proposal {
  std::size_t player;
  int trial;
};

Proposal propose(const CapGame& game, Rng& rng) {
  const auto& active = game.active_players();
  if (active.empty()) throw std::logic_error("learning needs at least one active player");
  std::uniform_int_distribution<std::size_t> pick_player(0, active.size() - 1);
  std::uniform_int_distribution<int> pick_channel(0, game.num_channels() - 1);
  const std::size_t player = active[pick_player(rng)];
  return {player, pick_channel(rng)};
}

// Phase I estimate at the current profile, Phase II at the trial profile, each
// from its own N fresh samples. Returns U^N(current) - U^N(trial).
double estimate_delta(const CapGame& game, const AssignmentProfile& profile, const Proposal& prop,
                      std::uint64_t n, Rng& rng) {
  const double current = game.utility_mean(profile, prop.player, n, rng).mean;
  AssignmentProfile trial = profile;
  trial.channel[prop.player] = prop.trial;
  const double candidate = game.utility_mean(trial, prop.player, n, rng).mean;
  return current - candidate;
}

SlotRecord start_record(const LearnerState& s, const Proposal& prop) {
  SlotRecord r;
  r.t = s.t;
  r.tau = s.tau;
  r.samples = s.samples;
  r.player = prop.player;
  r.trial = prop.trial;
  return r;
}

}  // namespace

SlotRecord blla_step(LearnerState& state, const CapGame& game, const TemperatureSchedule& schedule,
                     const NoiseSpec& noise, double xi, Rng& rng, std::uint64_t sample_cap) {
  state.t += 1;
  state.tau = schedule.at(state.t);
  if (sample_cap == 0) {
    state.samples = required_samples(state.tau, xi, noise);
  } else {
    try {
      state.samples = std::min(required_samples(state.tau, xi, noise), sample_cap);
    } catch (const std::overflow_error&) {
      state.samples = sample_cap;
    }
  }
  const Proposal prop = propose(game, rng);
  SlotRecord r = start_record(state, prop);
  if (prop.trial != state.profile.channel[prop.player]) {
    r.delta = estimate_delta(game, state.profile, prop, state.samples, rng);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    r.accepted = coin(rng) < acceptance_probability(r.delta, state.tau);
    if (r.accepted) state.profile.channel[prop.player] = prop.trial;
  }
  r.channels = state.profile.channel;
  return r;
}

SlotRecord better_response_step(LearnerState& state, const CapGame& game, std::uint64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("better response needs n_samples >= 1");
  state.t += 1;
  state.tau = 0.0;
  state.samples = n_samples;
  const Proposal prop = propose(game, rng);
  SlotRecord r = start_record(state, prop);
  if (prop.trial != state.profile.channel[prop.player]) {
    r.delta = estimate_delta(game, state.profile, prop, n_samples, rng);
    r.accepted = r.delta < 0.0;
    if (r.accepted) state.profile.channel[prop.player] = prop.trial;
  }
  r.channels = state.profile.channel;
  return r;
}

namespace {

template <typename Step>
Trajectory run(const CapGame& game, std::size_t horizon, std::uint64_t seed, RunOptions& options, Step step) {
  Rng rng = make_rng(seed, stream::learning);
  LearnerState state;
  state.profile = options.initial ? *options.initial : game.random_profile(rng);
  validate_profile(state.profile, game.num_channels());
  std::optional<PotentialCache> cache;
  if (!options.sum_rate) {
    cache.emplace(game, 256, seed);
    options.sum_rate = [&cache](const AssignmentProfile& p) { return (*cache)(p); };
  }
  Trajectory traj;
  traj.initial = state.profile;
  traj.initial_sum_rate = options.sum_rate(state.profile);
  traj.slots.reserve(horizon);
  const AssignmentProfile frozen_passive = state.profile;
  const bool idle = game.active_players().empty();
  for (std::size_t k = 0; k < horizon; ++k) {
    // Without active players every slot is a no-op.
    SlotRecord r;
    if (idle) {
      r.t = ++state.t;
      r.player = game.num_players();
      r.trial = -1;
      r.channels = state.profile.channel;
    } else {
      r = step(state, rng);
    }
    r.sum_rate = options.sum_rate(state.profile);
    traj.slots.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < frozen_passive.size(); ++i)
    if (frozen_passive.passive[i] && state.profile.channel[i] != frozen_passive.channel[i])
      throw std::logic_error("passive player changed channel");
  return traj;
}

}  // namespace

Trajectory run_blla(const CapGame& game, const TemperatureSchedule& schedule, const NoiseSpec& noise, double xi,
                    std::size_t horizon, std::uint64_t seed, RunOptions options) {
  const std::uint64_t cap = options.sample_cap;
  return run(game, horizon, seed, options, [&](LearnerState& s, Rng& rng) {
    return blla_step(s, game, schedule, noise, xi, rng, cap);
  });
}

Trajectory run_br(const CapGame& game, std::uint64_t n_samples, std::size_t horizon, std::uint64_t seed,
                  RunOptions options) {
  return run(game, horizon, seed, options,
             [&](LearnerState& s, Rng& rng) { return better_response_step(s, game, n_samples, rng); });
}

std::string format_channels(const std::vector<int>& channels) {
  std::string out;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(channels[i]);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,tau,samples,player,trial,accepted,delta,sum_rate,profile\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << 0 << ',' << ',' << ',' << ',' << ',' << ',' << ',' << num(trajectory.initial_sum_rate) << ','
      << format_channels(trajectory.initial.channel) << '\n';
  for (const SlotRecord& r : trajectory.slots)
    out << r.t << ',' << num(r.tau) << ',' << r.samples << ',' << r.player << ',' << r.trial << ','
        << (r.accepted ? 1 : 0) << ',' << num(r.delta) << ',' << num(r.sum_rate) << ','
        << format_channels(r.channels) << '\n';
}

}  // namespace d2d
