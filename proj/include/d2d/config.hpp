#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "d2d/game.hpp"
#include "d2d/learning.hpp"
#include "d2d/radio.hpp"

namespace d2d {

/// Flat experiment description. Units are part of the key names; powers are
/// kept in dBm here and converted to watts by radio_params().
struct ExperimentConfig {
  // instance
  std::string scenario = "random";  // random | desk | symmetric-pair | file
  std::string topology_file;
  std::optional<std::uint64_t> topology_seed;  // unset: placement seed = realization seed
  int num_uec = 1;
  int num_ued = 4;
  int num_channels = 3;

  // radio
  double cell_radius_m = 200.0;
  double d2d_radius_m = 20.0;
  double bandwidth_hz = 180e3;
  double ue_power_dbm = 25.0;
  double bs_power_dbm = 46.0;
  double noise_psd_dbm_hz = -174.0;
  double pathloss_exponent = 3.5;
  double reference_distance_m = 1.0;
  double shadowing_sigma_db = 6.0;
  double sinr_min_db = -10.0;
  double sinr_max_db = 23.0;
  bool split_bs_power = true;

  // learning
  std::string utility_mode = "noisy";  // noisy | deterministic
  std::string algorithm = "blla";      // blla | br
  std::string schedule = "fixed";      // fixed | log
  double tau = 0.1;                    // fixed temperature, or c in c/log(1+t)
  std::string noise = "bounded";       // bounded | gaussian
  double noise_width = 1.0;
  double noise_sigma = 1.0;
  double noise_theta_max = 100.0;
  double xi = 1e-5;
  std::uint64_t br_samples = 1;
  std::uint64_t sample_cap = 0;
  std::uint64_t horizon_slots = 500;

  // experiment
  std::uint64_t realizations = 100;
  std::uint64_t seed = 1;
  std::uint64_t potential_mc = 256;
  double final_window_fraction = 0.25;
  bool track_optimum = false;
  bool write_trajectories = false;
  std::vector<int> channel_counts = {2, 3, 4};
  std::vector<int> ued_counts = {2, 4, 8};
  std::vector<double> tau_grid = {0.5, 0.2, 0.1, 0.05, 0.02};
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  RadioParams radio_params() const;
  UtilityMode mode() const;
  TemperatureSchedule temperature() const;
  NoiseSpec noise_spec() const;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// `key = value` lines, '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Every key, doubles in shortest round-trip form.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a of the serialized config without out_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::vector<std::string> preset_names();
/// table1 | desk | desk-decreasing | desk-br | desk-sweep | symmetric
ExperimentConfig preset(const std::string& name);

}  // namespace d2d
