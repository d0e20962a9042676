#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "d2d/profile.hpp"
#include "d2d/rng.hpp"

namespace d2d {

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_linear(double db);
/// Noise power over `bandwidth_hz` for a density given in dBm/Hz.
double thermal_noise_w(double psd_dbm_hz, double bandwidth_hz);

/// Physical layer constants. Defaults follow the LTE downlink table used for
/// the reference experiments (5 channels of 180 kHz, 46 dBm BS, 25 dBm UE).
struct RadioParams {
  double cell_radius_m = 200.0;
  double d2d_radius_m = 20.0;
  int num_channels = 5;
  double bandwidth_hz = 180e3;
  double tx_power_ue_w = dbm_to_watt(25.0);
  double tx_power_bs_w = dbm_to_watt(46.0);
  double noise_power_w = thermal_noise_w(-174.0, 180e3);
  double pathloss_exponent = 3.5;
  double reference_distance_m = 1.0;
  double shadowing_sigma_db = 6.0;
  double sinr_min_db = -10.0;
  double sinr_max_db = 23.0;
  /// Downlink: the BS power budget is divided evenly over the cellular links.
  bool split_bs_power = true;

  double sinr_min() const { return db_to_linear(sinr_min_db); }
  double sinr_max() const { return db_to_linear(sinr_max_db); }
  double max_rate() const;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

/// A transmitter/receiver pair. Cellular links transmit from the BS.
struct Link {
  Point tx;
  Point rx;
  bool operator==(const Link&) const = default;
};

/// Network instance. Links are indexed cellular first, then D2D, and that
/// index is the UE index used by profiles. `mean_gain(j, i)` is the linear
/// power gain from link j's transmitter to link i's receiver (path loss and
/// shadowing, no fading).
struct Topology {
  Point bs;
  std::vector<Link> uec;
  std::vector<Link> ued;
  std::vector<double> tx_power_w;
  Eigen::MatrixXd mean_gain;
  std::uint64_t seed = 0;

  std::size_t num_uec() const { return uec.size(); }
  std::size_t num_ued() const { return ued.size(); }
  std::size_t num_links() const { return uec.size() + ued.size(); }
  const Link& link(std::size_t i) const { return i < uec.size() ? uec[i] : ued[i - uec.size()]; }
  bool is_cellular(std::size_t i) const { return i < uec.size(); }
};

/// Random placement: UEs uniform in the cell disk, each D2D receiver uniform in
/// the d2d disk around its transmitter (clipped to the cell). Cellular UEs are
/// drawn before D2D UEs so a larger `num_ued` extends a smaller instance.
/// Throws std::invalid_argument if num_uec > params.num_channels.
Topology generate_topology(const RadioParams& params, std::size_t num_uec, std::size_t num_ued,
                           std::uint64_t seed);

/// Deterministic placement without shadowing (hand-built scenarios).
Topology topology_from_positions(const RadioParams& params, Point bs, const std::vector<Point>& uec_rx,
                                 const std::vector<Link>& ued);

/// Hand-set gains and powers; positions are left at the origin. The first
/// `num_uec` links are treated as cellular.
Topology topology_from_gains(Eigen::MatrixXd mean_gain, std::vector<double> tx_power_w,
                             std::size_t num_uec = 0);

/// Per-link power resolved from the downlink convention.
std::vector<double> link_powers(const RadioParams& params, std::size_t num_uec, std::size_t num_ued);

/// Multiplicative Rayleigh power coefficients, h(j, i) for transmitter j and
/// receiver i. The frozen realization is all ones.
class FadingRealization {
 public:
  FadingRealization() = default;
  explicit FadingRealization(Eigen::MatrixXd coefficients) : h_(std::move(coefficients)) {}

  static FadingRealization frozen(std::size_t num_links);
  /// Draws num_links^2 i.i.d. Exp(1) coefficients in row-major order.
  static FadingRealization draw(std::size_t num_links, Rng& rng);

  double operator()(std::size_t tx, std::size_t rx) const { return h_(tx, rx); }
  const Eigen::MatrixXd& coefficients() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(h_.rows()); }

 private:
  Eigen::MatrixXd h_;
};

enum class FadingMode { rayleigh, frozen };

/// SINR of `ue` on its assigned channel before clamping.
double raw_sinr(const Topology& topology, const RadioParams& params, const AssignmentProfile& profile,
                std::size_t ue, const FadingRealization& fading);

/// SINR clamped into [sinr_min, sinr_max] (linear).
double sinr(const Topology& topology, const RadioParams& params, const AssignmentProfile& profile,
            std::size_t ue, const FadingRealization& fading);

/// Shannon rate W log2(1 + sinr) in bit/s.
double rate(double sinr, double bandwidth_hz);

struct RateEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean of the rate of `ue` over `num_mc` independent fading draws.
RateEstimate expected_rate(const Topology& topology, const RadioParams& params,
                           const AssignmentProfile& profile, std::size_t ue, std::size_t num_mc,
                           std::uint64_t seed, FadingMode mode = FadingMode::rayleigh);

// Structured-text (JSON) persistence. Doubles are written in shortest
// round-trip form so a reloaded topology reproduces runs bit-exactly.
std::string topology_to_json(const Topology& topology);
Topology topology_from_json(const std::string& text);
void save_topology(const Topology& topology, const std::filesystem::path& path);
Topology load_topology(const std::filesystem::path& path);

}  // namespace d2d
