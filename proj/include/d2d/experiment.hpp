#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "d2d/analysis.hpp"
#include "d2d/config.hpp"
#include "d2d/parallel.hpp"

namespace d2d {

/// Network instance for realization `seed` of a config.
CapGame build_game(const ExperimentConfig& config, std::uint64_t seed);

struct RealizationResult {
  std::uint64_t seed = 0;
  std::vector<double> sum_rate;  // initial profile, then one value per slot
  double final_window_mean = 0.0;
  std::vector<int> final_channels;
  /// Fraction of final-window slots spent in the deterministic optimum set
  /// (NaN unless track_optimum).
  double optimal_occupancy = std::numeric_limits<double>::quiet_NaN();
  /// Best expected sum rate in the game's own mode (NaN unless track_optimum).
  double phi_star = std::numeric_limits<double>::quiet_NaN();
  Trajectory trajectory;  // kept only when write_trajectories is set
};

struct SweepPoint {
  std::string label;
  ExperimentConfig config;
  std::string config_hash;
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 0;
  std::size_t window_slots = 0;
  std::vector<double> mean_trace;
  double mean = 0.0;       // final-window sum rate, bit/s
  double std_error = 0.0;  // sample std / sqrt(realizations)
  double mean_occupancy = std::numeric_limits<double>::quiet_NaN();
  double mean_phi_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<RealizationResult> realizations;
};

/// Number of slots in the final window: round(fraction * T), at least 1.
std::size_t final_window_slots(const ExperimentConfig& config);

/// `realizations` independent trajectories with seeds seed + k, run
/// concurrently and reduced in index order.
SweepPoint run_experiment(const ExperimentConfig& config, Execution exec = Execution::parallel);
std::vector<SweepPoint> sweep_channels(const ExperimentConfig& config, const std::vector<int>& channel_counts,
                                       Execution exec = Execution::parallel);
std::vector<SweepPoint> sweep_ues(const ExperimentConfig& config, const std::vector<int>& ued_counts,
                                  Execution exec = Execution::parallel);

struct SamplesReport {
  double tau = 0.0;
  double xi = 0.0;
  std::string noise;
  std::uint64_t samples = 0;
  double numerator = 0.0;
  double denominator = 0.0;
  double theta_star = std::numeric_limits<double>::quiet_NaN();
  bool theta_at_cap = false;
};
SamplesReport samples_calc(double tau, double xi, const NoiseSpec& noise);
void write_samples_report(std::ostream& out, const SamplesReport& report);

struct StationaryPoint {
  double tau = 0.0;
  StationaryDistribution direct, gibbs, tree;
  bool has_tree = false;
  double residual = 0.0;       // ||pi_direct P - pi_direct||_inf
  double gibbs_gap = 0.0;      // ||pi_direct - pi_gibbs||_inf
  double tree_gap = std::numeric_limits<double>::quiet_NaN();
};

struct StationaryAnalysis {
  std::size_t num_states = 0;
  std::vector<StationaryPoint> points;
  OptimumResult optimum;
  StabilityReport stability;
  bool has_verdict = false;
  bool verdict = false;  // stable set == optimum set
};

/// Exact analysis of the config's instance (deterministic utilities, placement
/// seed = topology_seed or seed).
StationaryAnalysis analyze_stationary(const ExperimentConfig& config, const std::vector<double>& tau_grid,
                                      Execution exec = Execution::parallel);

/// Files written by the emitters below, relative to the output directory.
struct OutputFiles {
  std::filesystem::path dir;
  std::vector<std::string> files;
  std::string config_hash;
};

/// Each call writes its tables plus config.txt and manifest.txt. I/O errors
/// name the path.
OutputFiles write_experiment(const std::filesystem::path& dir, const std::string& name,
                             const std::vector<SweepPoint>& points, const ExperimentConfig& config);
OutputFiles write_samples(const std::filesystem::path& dir, const SamplesReport& report,
                          const ExperimentConfig& config);
OutputFiles write_stationary(const std::filesystem::path& dir, const StationaryAnalysis& analysis,
                             const ExperimentConfig& config);

}  // namespace d2d
