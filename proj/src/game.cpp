#include "d2d/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/random/exponential_distribution.hpp>

namespace d2d {

namespace {

// The UEs of one channel with their mean received powers, S(a, b) = P_a g_ab.
// Utilities and sum rates only ever need the links inside one channel.
struct ChannelGroup {
  std::vector<std::size_t> members;
  std::vector<double> power;  // k*k row-major, transmitter-major
  double noise = 0.0;
  double sinr_lo = 0.0;
  double sinr_hi = 0.0;
  double bandwidth = 0.0;

  ChannelGroup(const CapGame& game, const AssignmentProfile& profile, int channel)
      : members(cochannel_set(profile, channel)) {
    const auto& t = game.topology();
    const auto& p = game.params();
    const std::size_t k = members.size();
    power.resize(k * k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        power[a * k + b] = t.tx_power_w[members[a]] *
                           t.mean_gain(static_cast<Eigen::Index>(members[a]), static_cast<Eigen::Index>(members[b]));
    noise = p.noise_power_w;
    sinr_lo = p.sinr_min();
    sinr_hi = p.sinr_max();
    bandwidth = p.bandwidth_hz;
  }

  std::size_t size() const { return members.size(); }

  std::size_t local_index(std::size_t ue) const {
    return static_cast<std::size_t>(std::find(members.begin(), members.end(), ue) - members.begin());
  }

  void gather(const FadingRealization& fading, std::vector<double>& h) const {
    const std::size_t k = size();
    h.resize(k * k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) h[a * k + b] = fading(members[a], members[b]);
  }

  // Clamped SINR of member b with member `skip` silenced (skip >= k: nobody).
  double member_sinr(std::size_t b, std::size_t skip, const double* h) const {
    const std::size_t k = size();
    double interference = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      if (a != b && a != skip) interference += power[a * k + b] * h[a * k + b];
    return std::clamp(power[b * k + b] * h[b * k + b] / (interference + noise), sinr_lo, sinr_hi);
  }

  double sum_rate(const double* h) const {
    double total = 0.0;
    for (std::size_t b = 0; b < size(); ++b) total += rate(member_sinr(b, size(), h), bandwidth);
    return total;
  }

  // Sum rate of the channel with player i minus the same sum without it.
  double marginal(std::size_t i, const double* h) const {
    double u = rate(member_sinr(i, size(), h), bandwidth);
    for (std::size_t b = 0; b < size(); ++b) {
      if (b == i) continue;
      const double with = member_sinr(b, size(), h);
      const double without = member_sinr(b, i, h);
      if (with != without) u += rate(with, bandwidth) - rate(without, bandwidth);
    }
    return u;
  }
};

void require_player(const CapGame& game, std::size_t player) {
  if (player >= game.num_players()) throw std::out_of_range("player index " + std::to_string(player));
}

}  // namespace

FadingBank::FadingBank(std::size_t num_links, std::size_t num_draws, std::uint64_t seed) {
  Rng rng = make_rng(seed, stream::potential);
  draws_.reserve(num_draws);
  for (std::size_t k = 0; k < num_draws; ++k) draws_.push_back(FadingRealization::draw(num_links, rng));
}

CapGame::CapGame(Topology topology, RadioParams params, UtilityMode mode)
    : topology_(std::move(topology)), params_(params), mode_(mode) {
  params_.validate();
  if (topology_.num_uec() > static_cast<std::size_t>(params_.num_channels))
    throw std::invalid_argument("CapGame: more cellular UEs than channels");
  if (topology_.tx_power_w.size() != topology_.num_links() ||
      static_cast<std::size_t>(topology_.mean_gain.rows()) != topology_.num_links())
    throw std::invalid_argument("CapGame: topology arrays do not match link count");
  for (std::size_t i = topology_.num_uec(); i < topology_.num_links(); ++i) active_.push_back(i);
  phi_max_ = static_cast<double>(num_players()) * params_.max_rate();
}

AssignmentProfile CapGame::base_profile(int active_channel) const {
  std::vector<int> ch(num_players(), active_channel);
  std::vector<bool> passive(num_players(), false);
  for (std::size_t k = 0; k < topology_.num_uec(); ++k) {
    ch[k] = static_cast<int>(k);
    passive[k] = true;
  }
  return {std::move(ch), std::move(passive)};
}

AssignmentProfile CapGame::random_profile(Rng& rng) const {
  AssignmentProfile p = base_profile();
  std::uniform_int_distribution<int> pick(0, num_channels() - 1);
  for (std::size_t i : active_) p.channel[i] = pick(rng);
  return p;
}

AssignmentProfile CapGame::make_profile(const std::vector<int>& active_channels) const {
  if (active_channels.size() != active_.size())
    throw std::invalid_argument("make_profile: expected " + std::to_string(active_.size()) + " channels");
  AssignmentProfile p = base_profile();
  for (std::size_t k = 0; k < active_.size(); ++k) p.channel[active_[k]] = active_channels[k];
  validate_profile(p, num_channels());
  return p;
}

double CapGame::utility_sample(const AssignmentProfile& profile, std::size_t player,
                               const FadingRealization& fading) const {
  require_player(*this, player);
  const ChannelGroup group(*this, profile, profile.channel[player]);
  std::vector<double> h;
  group.gather(fading, h);
  return group.marginal(group.local_index(player), h.data()) / phi_max_;
}

double CapGame::utility(const AssignmentProfile& profile, std::size_t player) const {
  return utility_sample(profile, player, FadingRealization::frozen(num_players()));
}

UtilityEstimate CapGame::utility_mean(const AssignmentProfile& profile, std::size_t player,
                                      std::size_t n_samples, std::uint64_t seed, bool keep_samples) const {
  Rng rng = make_rng(seed, stream::utility);
  return utility_mean(profile, player, n_samples, rng, keep_samples);
}

UtilityEstimate CapGame::utility_mean(const AssignmentProfile& profile, std::size_t player,
                                      std::size_t n_samples, Rng& rng, bool keep_samples) const {
  if (n_samples < 1) throw std::invalid_argument("utility_mean: n_samples must be >= 1");
  require_player(*this, player);
  UtilityEstimate est;
  est.count = n_samples;
  if (mode_ == UtilityMode::deterministic) {
    est.mean = utility(profile, player);
    if (keep_samples) est.samples.assign(n_samples, est.mean);
    return est;
  }
  const ChannelGroup group(*this, profile, profile.channel[player]);
  const std::size_t i = group.local_index(player);
  const std::size_t kk = group.size() * group.size();
  std::vector<double> h(kk);
  boost::random::exponential_distribution<double> exp1(1.0);
  if (keep_samples) est.samples.reserve(n_samples);
  double sum = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (double& x : h) x = exp1(rng);
    const double u = group.marginal(i, h.data());
    sum += u;
    if (keep_samples) est.samples.push_back(u / phi_max_);
  }
  est.mean = sum / static_cast<double>(n_samples) / phi_max_;
  return est;
}

double CapGame::sum_rate(const AssignmentProfile& profile, const FadingRealization& fading) const {
  double total = 0.0;
  std::vector<double> h;
  for (int c = 0; c < num_channels(); ++c) {
    const ChannelGroup group(*this, profile, c);
    if (group.size() == 0) continue;
    group.gather(fading, h);
    total += group.sum_rate(h.data());
  }
  return total;
}

double CapGame::potential(const AssignmentProfile& profile, std::size_t num_mc, std::uint64_t seed) const {
  if (num_mc < 1) throw std::invalid_argument("potential: num_mc must be >= 1");
  if (mode_ == UtilityMode::deterministic) return sum_rate(profile, FadingRealization::frozen(num_players()));
  return potential(profile, FadingBank(num_players(), num_mc, seed));
}

double CapGame::potential(const AssignmentProfile& profile, const FadingBank& bank) const {
  if (mode_ == UtilityMode::deterministic) return sum_rate(profile, FadingRealization::frozen(num_players()));
  if (bank.size() == 0) throw std::invalid_argument("potential: empty fading bank");
  std::vector<ChannelGroup> groups;
  for (int c = 0; c < num_channels(); ++c) {
    ChannelGroup g(*this, profile, c);
    if (g.size() > 0) groups.push_back(std::move(g));
  }
  std::vector<double> h;
  double total = 0.0;
  for (std::size_t k = 0; k < bank.size(); ++k)
    for (const auto& g : groups) {
      g.gather(bank[k], h);
      total += g.sum_rate(h.data());
    }
  return total / static_cast<double>(bank.size());
}

double CapGame::normalized_potential(const AssignmentProfile& profile) const {
  if (phi_max_ == 0.0) return 0.0;
  return sum_rate(profile, FadingRealization::frozen(num_players())) / phi_max_;
}

double verify_potential_identity(const CapGame& game, std::size_t player, int a_i, int a_i_prime,
                                 const AssignmentProfile& profile) {
  if (game.mode() != UtilityMode::deterministic)
    throw std::logic_error("verify_potential_identity: the identity is exact only with frozen fading");
  if (!game.is_active(player)) throw std::invalid_argument("verify_potential_identity: player is passive");
  AssignmentProfile a = profile;
  AssignmentProfile b = profile;
  a.channel[player] = a_i;
  b.channel[player] = a_i_prime;
  validate_profile(a, game.num_channels());
  validate_profile(b, game.num_channels());
  const double du = game.utility(a, player) - game.utility(b, player);
  const double dphi = game.normalized_potential(a) - game.normalized_potential(b);
  return std::abs(du - dphi);
}

}  // namespace d2d
