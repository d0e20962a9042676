#include "d2d/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/random/exponential_distribution.hpp>

namespace d2d {

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt * 1e3); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double thermal_noise_w(double psd_dbm_hz, double bandwidth_hz) {
  return dbm_to_watt(psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

double RadioParams::max_rate() const { return rate(sinr_max(), bandwidth_hz); }

void RadioParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("radio params: ") + what);
  };
  require(tx_power_ue_w > 0 && tx_power_bs_w > 0 && noise_power_w > 0, "powers must be positive");
  require(d2d_radius_m > 0 && cell_radius_m > d2d_radius_m, "need cell_radius > d2d_radius > 0");
  require(sinr_min_db < sinr_max_db, "need sinr_min < sinr_max");
  require(num_channels >= 1, "need at least one channel");
  require(bandwidth_hz > 0, "bandwidth must be positive");
  require(pathloss_exponent > 0 && reference_distance_m > 0, "path loss model");
  require(shadowing_sigma_db >= 0, "shadowing sigma must be non-negative");
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

Point uniform_in_disk(Point center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double theta = 2.0 * std::numbers::pi * u(rng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

double pathloss(const RadioParams& params, double d) {
  return std::pow(std::max(d, params.reference_distance_m), -params.pathloss_exponent);
}

// Shadowing is a property of the (transmitter node, receiver node) pair, so
// every cellular link sees the same BS->receiver shadowing and the value does
// not depend on how many other UEs exist.
double shadowing_db(const RadioParams& params, std::uint64_t seed, std::size_t tx_node, std::size_t rx_node) {
  if (params.shadowing_sigma_db == 0.0) return 0.0;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream::shadowing), static_cast<std::uint32_t>(tx_node),
                    static_cast<std::uint32_t>(rx_node)};
  Rng rng(seq);
  std::normal_distribution<double> n(0.0, params.shadowing_sigma_db);
  return n(rng);
}

Topology assemble(const RadioParams& params, Point bs, std::vector<Link> uec, std::vector<Link> ued,
                  std::uint64_t seed, bool shadowed) {
  Topology t;
  t.bs = bs;
  t.uec = std::move(uec);
  t.ued = std::move(ued);
  t.seed = seed;
  t.tx_power_w = link_powers(params, t.num_uec(), t.num_ued());
  const std::size_t n = t.num_links();
  t.mean_gain.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    // node 0 is the BS, D2D transmitters are 1..num_ued
    const std::size_t tx_node = t.is_cellular(j) ? 0 : 1 + (j - t.num_uec());
    for (std::size_t i = 0; i < n; ++i) {
      double g = pathloss(params, distance(t.link(j).tx, t.link(i).rx));
      if (shadowed) g *= db_to_linear(shadowing_db(params, seed, tx_node, i));
      t.mean_gain(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
    }
  }
  return t;
}

}  // namespace

std::vector<double> link_powers(const RadioParams& params, std::size_t num_uec, std::size_t num_ued) {
  std::vector<double> p;
  p.reserve(num_uec + num_ued);
  const double bs_share =
      params.split_bs_power && num_uec > 0 ? params.tx_power_bs_w / static_cast<double>(num_uec) : params.tx_power_bs_w;
  p.insert(p.end(), num_uec, bs_share);
  p.insert(p.end(), num_ued, params.tx_power_ue_w);
  return p;
}

Topology generate_topology(const RadioParams& params, std::size_t num_uec, std::size_t num_ued,
                           std::uint64_t seed) {
  params.validate();
  if (num_uec > static_cast<std::size_t>(params.num_channels))
    throw std::invalid_argument("generate_topology: " + std::to_string(num_uec) + " cellular UEs need dedicated channels but only " +
                                std::to_string(params.num_channels) + " exist");
  Rng rng = make_rng(seed, stream::placement);
  const Point bs{0.0, 0.0};
  std::vector<Link> uec;
  for (std::size_t k = 0; k < num_uec; ++k) uec.push_back({bs, uniform_in_disk(bs, params.cell_radius_m, rng)});
  std::vector<Link> ued;
  for (std::size_t k = 0; k < num_ued; ++k) {
    const Point tx = uniform_in_disk(bs, params.cell_radius_m, rng);
    Point rx;
    do {
      rx = uniform_in_disk(tx, params.d2d_radius_m, rng);
    } while (distance(rx, bs) > params.cell_radius_m);
    ued.push_back({tx, rx});
  }
  return assemble(params, bs, std::move(uec), std::move(ued), seed, true);
}

Topology topology_from_positions(const RadioParams& params, Point bs, const std::vector<Point>& uec_rx,
                                 const std::vector<Link>& ued) {
  std::vector<Link> uec;
  for (const Point& p : uec_rx) uec.push_back({bs, p});
  return assemble(params, bs, std::move(uec), ued, 0, false);
}

Topology topology_from_gains(Eigen::MatrixXd mean_gain, std::vector<double> tx_power_w, std::size_t num_uec) {
  const auto n = static_cast<std::size_t>(mean_gain.rows());
  if (mean_gain.cols() != mean_gain.rows() || tx_power_w.size() != n || num_uec > n)
    throw std::invalid_argument("topology_from_gains: shape mismatch");
  if ((mean_gain.array() <= 0.0).any()) throw std::invalid_argument("topology_from_gains: gains must be positive");
  Topology t;
  t.uec.resize(num_uec);
  t.ued.resize(n - num_uec);
  t.tx_power_w = std::move(tx_power_w);
  t.mean_gain = std::move(mean_gain);
  return t;
}

FadingRealization FadingRealization::frozen(std::size_t num_links) {
  const auto n = static_cast<Eigen::Index>(num_links);
  return FadingRealization(Eigen::MatrixXd::Ones(n, n));
}

FadingRealization FadingRealization::draw(std::size_t num_links, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(num_links);
  Eigen::MatrixXd h(n, n);
  boost::random::exponential_distribution<double> exp1(1.0);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) h(j, i) = exp1(rng);
  return FadingRealization(std::move(h));
}

double raw_sinr(const Topology& topology, const RadioParams& params, const AssignmentProfile& profile,
                std::size_t ue, const FadingRealization& fading) {
  const auto& g = topology.mean_gain;
  const auto& p = topology.tx_power_w;
  const int c = profile.channel.at(ue);
  double interference = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (j == ue || profile.channel[j] != c) continue;
    interference += p[j] * g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(ue)) * fading(j, ue);
  }
  const auto i = static_cast<Eigen::Index>(ue);
  return p[ue] * g(i, i) * fading(ue, ue) / (interference + params.noise_power_w);
}

double sinr(const Topology& topology, const RadioParams& params, const AssignmentProfile& profile,
            std::size_t ue, const FadingRealization& fading) {
  return std::clamp(raw_sinr(topology, params, profile, ue, fading), params.sinr_min(), params.sinr_max());
}

double rate(double sinr, double bandwidth_hz) { return bandwidth_hz * std::log2(1.0 + sinr); }

RateEstimate expected_rate(const Topology& topology, const RadioParams& params,
                           const AssignmentProfile& profile, std::size_t ue, std::size_t num_mc,
                           std::uint64_t seed, FadingMode mode) {
  if (num_mc < 1) throw std::invalid_argument("expected_rate: num_mc must be >= 1");
  const std::size_t n = topology.num_links();
  if (mode == FadingMode::frozen) {
    const double r = rate(sinr(topology, params, profile, ue, FadingRealization::frozen(n)), params.bandwidth_hz);
    return {r, 0.0, num_mc};
  }
  Rng rng = make_rng(seed, stream::fading);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < num_mc; ++k) {
    const double r =
        rate(sinr(topology, params, profile, ue, FadingRealization::draw(n, rng)), params.bandwidth_hz);
    sum += r;
    sum_sq += r * r;
  }
  const double m = static_cast<double>(num_mc);
  const double mean = sum / m;
  const double var = num_mc > 1 ? std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0)) : 0.0;
  return {mean, std::sqrt(var / m), num_mc};
}

}  // namespace d2d
