#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "d2d/game.hpp"
#include "d2d/parallel.hpp"

namespace d2d {

/// Enumeration of all profiles reachable by the active players with passive
/// channels held fixed. Index = mixed-radix number over the active players'
/// channels, the lowest active index being the least significant digit.
class ProfileSpace {
 public:
  /// Throws std::length_error when |F|^#active exceeds `max_states`.
  explicit ProfileSpace(const CapGame& game, std::size_t max_states = 1'000'000);

  std::size_t size() const { return size_; }
  std::size_t num_active() const { return active_.size(); }
  int radix() const { return radix_; }
  const std::vector<std::size_t>& active_players() const { return active_; }

  AssignmentProfile profile(std::size_t index) const;
  std::size_t index(const AssignmentProfile& profile) const;
  /// Index of the profile with active player `k` (in active order) moved to `channel`.
  std::size_t neighbor(std::size_t index, std::size_t k, int channel) const;
  int digit(std::size_t index, std::size_t k) const;

 private:
  AssignmentProfile base_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> stride_;
  int radix_ = 1;
  std::size_t size_ = 1;
};

/// Size of the profile space without building it; saturates at SIZE_MAX.
std::size_t profile_space_size(const CapGame& game);

struct OptimumResult {
  std::vector<std::size_t> argmax;  // profile indices, increasing
  std::vector<AssignmentProfile> profiles;
  double phi_star = 0.0;             // bit/s
  double phi_star_normalized = 0.0;  // phi_star / phi_max
  std::vector<double> phi;           // normalized potential of every profile
};

/// Exhaustive maximization of the potential. Deterministic games are exact;
/// noisy games are scored on a shared bank of `num_mc` fading draws. Ties
/// within 1e-12 on the normalized scale are all returned.
OptimumResult brute_force_optimum(const CapGame& game, Execution exec = Execution::parallel,
                                  std::size_t num_mc = 256, std::uint64_t seed = 0);

/// Normalized potential of every profile, indexed as in ProfileSpace.
std::vector<double> potential_table(const CapGame& game, const ProfileSpace& space,
                                    Execution exec = Execution::parallel);

struct TransitionKernel {
  ProfileSpace space;
  double tau = 0.0;
  Eigen::MatrixXd P;  // row-stochastic, P(a, b)
};

/// Largest state count for which a dense kernel is built.
inline constexpr std::size_t max_kernel_states = 4096;

/// One-slot BLLA kernel under exact (frozen-fading) utilities.
TransitionKernel exact_transition_matrix(const CapGame& game, double tau, Execution exec = Execution::parallel);

/// Kernel under arbitrary utilities, u(profile index, player) on the normalized
/// scale. Used to build the chain induced by noisy expected utilities.
TransitionKernel transition_matrix(const ProfileSpace& space, int num_channels, double tau,
                                   const std::function<double(std::size_t, std::size_t)>& utility,
                                   Execution exec = Execution::parallel);

enum class StationaryMethod { direct, gibbs, tree };
std::string to_string(StationaryMethod method);

struct StationaryDistribution {
  Eigen::VectorXd pi;
  double tau = std::numeric_limits<double>::quiet_NaN();
  StationaryMethod method = StationaryMethod::direct;
};

/// max_j |(pi P)_j - pi_j|.
double stationary_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& P);

/// Grassmann-Taylor-Heyman elimination (no subtractions). Throws
/// std::runtime_error when a pivot underflows, which happens once the chain is
/// numerically reducible at very small tau; use the tree or Gibbs form then.
StationaryDistribution stationary_direct(const Eigen::MatrixXd& P);
StationaryDistribution stationary_direct(const TransitionKernel& kernel);

/// pi(a) proportional to exp(phi(a) / tau), max-shifted.
StationaryDistribution gibbs_distribution(const CapGame& game, double tau);
Eigen::VectorXd gibbs_weights(const std::vector<double>& phi, double tau);

inline constexpr std::size_t max_tree_states = 8;

/// Markov chain tree theorem by enumeration of in-arborescences.
StationaryDistribution stationary_tree(const Eigen::MatrixXd& P);
StationaryDistribution stationary_tree(const TransitionKernel& kernel);

struct StabilityReport {
  std::vector<double> tau_grid;
  std::vector<StationaryDistribution> distributions;
  bool has_verdict = false;  // false for a single-point grid
  std::vector<std::size_t> stable;
  std::vector<std::string> warnings;
};

/// Largest extrapolated decay rate, on the normalized potential scale, of a state
/// counted as stochastically stable.
inline constexpr double stable_rate_tolerance = 1e-9;

/// Direct stationary solve on each grid point. For every state, -tau ln(pi(a) /
/// max pi) is fitted against tau over the last three grid points; the intercept
/// is the rate at which its relative mass vanishes as tau -> 0. States with a
/// zero rate form the stable set. Warns when a non-stable state's mass fails to
/// shrink along the grid tail.
StabilityReport stochastically_stable_states(const CapGame& game, const std::vector<double>& tau_grid,
                                             Execution exec = Execution::parallel);

/// max(0, delta).
double transition_resistance(double delta);

/// R(a, b) = max(0, U_i(a) - U_i(b)) for single-coordinate moves, 0 on the
/// diagonal, +inf where the kernel has no edge.
Eigen::MatrixXd resistance_matrix(const CapGame& game);

struct TreeCheck {
  bool passed = true;
  double min_resistance = 0.0;
  std::vector<std::size_t> min_roots;  // roots of minimum-resistance trees
  std::size_t min_trees = 0;
  std::size_t witness_root = 0;
  std::vector<std::size_t> witness_parent;  // parent[root] == root
};

/// Enumerates every rooted in-arborescence of the resistance graph, finds the
/// minimum total resistance and checks that each minimizing tree uses a
/// zero-resistance edge.
TreeCheck min_resistance_tree_check(const Eigen::MatrixXd& resistance);

struct ResistanceFit {
  double intercept = 0.0;  // resistance estimate
  double slope = 0.0;
  double max_residual = 0.0;
  bool warn = false;
};

/// Least-squares line through (tau, -tau ln f(tau)); the intercept is the
/// resistance. `warn` is set when a residual exceeds `tolerance`.
ResistanceFit empirical_resistance(const std::function<double(double)>& f, const std::vector<double>& tau_grid,
                                   double tolerance = 1e-3);
/// Same fit from ln f, for functions that underflow on the grid.
ResistanceFit empirical_resistance_log(const std::function<double(double)>& log_f,
                                       const std::vector<double>& tau_grid, double tolerance = 1e-3);

/// Delimited export: index, profile, then one column per distribution.
void write_distributions_csv(std::ostream& out, const ProfileSpace& space,
                             const std::vector<StationaryDistribution>& dists);

}  // namespace d2d
