#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "d2d/profile.hpp"
#include "d2d/radio.hpp"
#include "d2d/rng.hpp"

namespace d2d {

/// How utilities react to fading. `noisy` draws fresh Rayleigh coefficients
/// for every sample; `deterministic` freezes them to 1 so utilities are exact.
enum class UtilityMode { noisy, deterministic };

/// Sample mean of N utility samples, normalized by CapGame::phi_max().
struct UtilityEstimate {
  double mean = 0.0;
  std::size_t count = 0;
  std::vector<double> samples;  // empty unless requested
};

/// Pre-drawn fading realizations shared read-only across evaluations, so that
/// potentials of different profiles are compared on common random numbers.
class FadingBank {
 public:
  FadingBank(std::size_t num_links, std::size_t num_draws, std::uint64_t seed);
  std::size_t size() const { return draws_.size(); }
  const FadingRealization& operator[](std::size_t k) const { return draws_[k]; }

 private:
  std::vector<FadingRealization> draws_;
};

/// Channel assignment game. Every UE is a player; cellular UEs are passive and
/// keep their dedicated channel, D2D UEs are active. A player's utility is its
/// marginal contribution to the sum rate of its channel, which makes the
/// (expected) sum rate an exact potential.
class CapGame {
 public:
  CapGame(Topology topology, RadioParams params, UtilityMode mode);

  const Topology& topology() const { return topology_; }
  const RadioParams& params() const { return params_; }
  UtilityMode mode() const { return mode_; }
  CapGame with_mode(UtilityMode mode) const { return CapGame(topology_, params_, mode); }

  std::size_t num_players() const { return topology_.num_links(); }
  int num_channels() const { return params_.num_channels; }
  const std::vector<std::size_t>& active_players() const { return active_; }
  bool is_active(std::size_t player) const { return !topology_.is_cellular(player); }

  /// Upper bound on any profile's sum rate: |D| W log2(1 + sinr_max).
  double phi_max() const { return phi_max_; }

  /// Cellular UE k on channel k, every active player on `active_channel`.
  AssignmentProfile base_profile(int active_channel = 0) const;
  /// Passive players on their dedicated channels, active ones uniform.
  AssignmentProfile random_profile(Rng& rng) const;
  /// Profile with the active players' channels given in active-player order.
  AssignmentProfile make_profile(const std::vector<int>& active_channels) const;

  /// One normalized utility sample under the given fading realization.
  double utility_sample(const AssignmentProfile& profile, std::size_t player,
                        const FadingRealization& fading) const;
  /// Exact utility with frozen fading.
  double utility(const AssignmentProfile& profile, std::size_t player) const;

  UtilityEstimate utility_mean(const AssignmentProfile& profile, std::size_t player, std::size_t n_samples,
                               std::uint64_t seed, bool keep_samples = false) const;
  /// Same estimator drawing from a caller-owned generator (learning loop).
  UtilityEstimate utility_mean(const AssignmentProfile& profile, std::size_t player, std::size_t n_samples,
                               Rng& rng, bool keep_samples = false) const;

  /// Sum rate in bit/s under one fading realization.
  double sum_rate(const AssignmentProfile& profile, const FadingRealization& fading) const;
  /// Expected sum rate in bit/s: exact in deterministic mode, otherwise the
  /// mean over `num_mc` fading draws.
  double potential(const AssignmentProfile& profile, std::size_t num_mc, std::uint64_t seed) const;
  double potential(const AssignmentProfile& profile, const FadingBank& bank) const;
  /// Deterministic-mode potential divided by phi_max (same scale as utilities).
  double normalized_potential(const AssignmentProfile& profile) const;

 private:
  Topology topology_;
  RadioParams params_;
  UtilityMode mode_;
  std::vector<std::size_t> active_;
  double phi_max_ = 0.0;
};

/// |[U_i(a_i,a_-i) - U_i(a_i',a_-i)] - [phi(a_i,a_-i) - phi(a_i',a_-i)]| on the
/// normalized scale. Throws std::logic_error in noisy mode.
double verify_potential_identity(const CapGame& game, std::size_t player, int a_i, int a_i_prime,
                                 const AssignmentProfile& profile);

}  // namespace d2d
