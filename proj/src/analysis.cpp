#include "d2d/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "d2d/learning.hpp"

namespace d2d {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double tie_tolerance = 1e-12;

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive and finite");
}

}  // namespace

std::size_t profile_space_size(const CapGame& game) {
  const auto radix = static_cast<std::size_t>(game.num_channels());
  std::size_t size = 1;
  for (std::size_t k = 0; k < game.active_players().size(); ++k) {
    if (radix != 0 && size > std::numeric_limits<std::size_t>::max() / radix)
      return std::numeric_limits<std::size_t>::max();
    size *= radix;
  }
  return size;
}

ProfileSpace::ProfileSpace(const CapGame& game, std::size_t max_states)
    : base_(game.base_profile(0)), active_(game.active_players()), radix_(game.num_channels()) {
  size_ = profile_space_size(game);
  if (size_ > max_states)
    throw std::length_error("profile space has " +
                            (size_ == std::numeric_limits<std::size_t>::max() ? std::string("more than 2^64")
                                                                              : std::to_string(size_)) +
                            " states, limit is " + std::to_string(max_states));
  stride_.resize(active_.size());
  std::size_t s = 1;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    stride_[k] = s;
    s *= static_cast<std::size_t>(radix_);
  }
}

int ProfileSpace::digit(std::size_t index, std::size_t k) const {
  return static_cast<int>((index / stride_[k]) % static_cast<std::size_t>(radix_));
}

AssignmentProfile ProfileSpace::profile(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("profile index " + std::to_string(index));
  AssignmentProfile p = base_;
  for (std::size_t k = 0; k < active_.size(); ++k) p.channel[active_[k]] = digit(index, k);
  return p;
}

std::size_t ProfileSpace::index(const AssignmentProfile& profile) const {
  if (profile.size() != base_.size()) throw std::invalid_argument("profile has the wrong number of UEs");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const int c = profile.channel[active_[k]];
    if (c < 0 || c >= radix_) throw std::invalid_argument("profile channel out of range");
    idx += static_cast<std::size_t>(c) * stride_[k];
  }
  return idx;
}

std::size_t ProfileSpace::neighbor(std::size_t index, std::size_t k, int channel) const {
  const int d = digit(index, k);
  return index - static_cast<std::size_t>(d) * stride_[k] + static_cast<std::size_t>(channel) * stride_[k];
}

namespace {

std::vector<double> potential_table_impl(const CapGame& game, const ProfileSpace& space, Execution exec,
                                         const FadingBank* bank) {
  const std::size_t n = space.size();
  std::vector<double> phi(n);
  const double scale = game.phi_max() > 0.0 ? 1.0 / game.phi_max() : 0.0;
  auto eval = [&](std::size_t a) {
    const AssignmentProfile p = space.profile(a);
    phi[a] = bank ? game.potential(p, *bank) * scale : game.normalized_potential(p);
  };
  if (exec == Execution::serial) {
    for (std::size_t a = 0; a < n; ++a) eval(a);
    return phi;
  }
  ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t a = 0; a < n; ++a) slot.run([&] { eval(a); });
  slot.rethrow();
  return phi;
}

}  // namespace

std::vector<double> potential_table(const CapGame& game, const ProfileSpace& space, Execution exec) {
  return potential_table_impl(game, space, exec, nullptr);
}

OptimumResult brute_force_optimum(const CapGame& game, Execution exec, std::size_t num_mc, std::uint64_t seed) {
  const ProfileSpace space(game);
  std::optional<FadingBank> bank;
  if (game.mode() == UtilityMode::noisy) {
    if (num_mc < 1) throw std::invalid_argument("brute_force_optimum: num_mc must be >= 1");
    bank.emplace(game.num_players(), num_mc, seed);
  }
  OptimumResult r;
  r.phi = potential_table_impl(game, space, exec, bank ? &*bank : nullptr);
  r.phi_star_normalized = *std::max_element(r.phi.begin(), r.phi.end());
  for (std::size_t a = 0; a < r.phi.size(); ++a)
    if (r.phi[a] >= r.phi_star_normalized - tie_tolerance) {
      r.argmax.push_back(a);
      r.profiles.push_back(space.profile(a));
    }
  r.phi_star = r.phi_star_normalized * game.phi_max();
  return r;
}

TransitionKernel transition_matrix(const ProfileSpace& space, int num_channels, double tau,
                                   const std::function<double(std::size_t, std::size_t)>& utility,
                                   Execution exec) {
  check_tau(tau);
  const std::size_t n = space.size();
  if (n > max_kernel_states)
    throw std::length_error("kernel would have " + std::to_string(n) + " states, limit is " +
                            std::to_string(max_kernel_states));
  const std::size_t m = space.num_active();
  TransitionKernel kernel{space, tau, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  if (n == 1 || m == 0) {
    kernel.P.setIdentity();
    return kernel;
  }
  const double w = 1.0 / (static_cast<double>(m) * num_channels);
  auto row = [&](std::size_t a) {
    const auto ia = static_cast<Eigen::Index>(a);
    double stay = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t player = space.active_players()[k];
      const double ua = utility(a, player);
      const int own = space.digit(a, k);
      stay += w;  // self-trial
      for (int c = 0; c < num_channels; ++c) {
        if (c == own) continue;
        const std::size_t b = space.neighbor(a, k, c);
        const double delta = ua - utility(b, player);
        kernel.P(ia, static_cast<Eigen::Index>(b)) = w * acceptance_probability(delta, tau);
        stay += w * acceptance_probability(-delta, tau);
      }
    }
    kernel.P(ia, ia) = stay;
  };
  if (exec == Execution::serial) {
    for (std::size_t a = 0; a < n; ++a) row(a);
    return kernel;
  }
  ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t a = 0; a < n; ++a) slot.run([&] { row(a); });
  slot.rethrow();
  return kernel;
}

TransitionKernel exact_transition_matrix(const CapGame& game, double tau, Execution exec) {
  check_tau(tau);
  const ProfileSpace space(game, max_kernel_states);
  const std::size_t n = space.size();
  const std::size_t players = game.num_players();
  // Utilities are evaluated once per (profile, player) and then shared by
  // every row that references them.
  std::vector<double> table(n * players, 0.0);
  auto fill = [&](std::size_t a) {
    const AssignmentProfile p = space.profile(a);
    for (std::size_t i : space.active_players()) table[a * players + i] = game.utility(p, i);
  };
  if (exec == Execution::serial) {
    for (std::size_t a = 0; a < n; ++a) fill(a);
  } else {
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t a = 0; a < n; ++a) slot.run([&] { fill(a); });
    slot.rethrow();
  }
  return transition_matrix(
      space, game.num_channels(), tau, [&](std::size_t a, std::size_t i) { return table[a * players + i]; }, exec);
}

std::string to_string(StationaryMethod method) {
  switch (method) {
    case StationaryMethod::direct: return "direct";
    case StationaryMethod::gibbs: return "gibbs";
    case StationaryMethod::tree: return "tree";
  }
  return "unknown";
}

double stationary_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& P) {
  if (pi.size() != P.rows() || P.rows() != P.cols()) throw std::invalid_argument("dimension mismatch");
  if (pi.size() == 0) return 0.0;
  return (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

namespace {

void check_stochastic(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() == 0) throw std::invalid_argument("transition matrix must be square, non-empty");
  if ((P.array() < 0.0).any() || !P.allFinite()) throw std::invalid_argument("transition matrix has invalid entries");
}

}  // namespace

StationaryDistribution stationary_direct(const Eigen::MatrixXd& P) {
  check_stochastic(P);
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd A = P;
  for (Eigen::Index k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += A(k, j);
    if (!(s > std::numeric_limits<double>::min()))
      throw std::runtime_error("direct stationary solve is numerically singular (pivot " + std::to_string(s) +
                               " at state " + std::to_string(k) +
                               "); the chain is too cold, use the tree or Gibbs method");
    for (Eigen::Index i = 0; i < k; ++i) A(i, k) /= s;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (Eigen::Index j = 0; j < k; ++j) A(i, j) += aik * A(k, j);
    }
  }
  Eigen::VectorXd pi(n);
  pi(0) = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) v += pi(i) * A(i, k);
    pi(k) = v;
  }
  pi /= pi.sum();
  return {pi, std::numeric_limits<double>::quiet_NaN(), StationaryMethod::direct};
}

StationaryDistribution stationary_direct(const TransitionKernel& kernel) {
  StationaryDistribution d = stationary_direct(kernel.P);
  d.tau = kernel.tau;
  return d;
}

Eigen::VectorXd gibbs_weights(const std::vector<double>& phi, double tau) {
  check_tau(tau);
  if (phi.empty()) throw std::invalid_argument("gibbs_weights: empty potential table");
  const double top = *std::max_element(phi.begin(), phi.end());
  Eigen::VectorXd pi(static_cast<Eigen::Index>(phi.size()));
  for (std::size_t a = 0; a < phi.size(); ++a) pi(static_cast<Eigen::Index>(a)) = std::exp((phi[a] - top) / tau);
  return pi / pi.sum();
}

StationaryDistribution gibbs_distribution(const CapGame& game, double tau) {
  const ProfileSpace space(game);
  return {gibbs_weights(potential_table(game, space), tau), tau, StationaryMethod::gibbs};
}

namespace {

// Calls visit(root, parent) for every spanning in-arborescence, where each
// non-root node points to its parent along an allowed edge.
template <typename Allowed, typename Visit>
void for_each_arborescence(std::size_t n, Allowed allowed, Visit visit) {
  std::vector<std::vector<std::size_t>> options(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && allowed(i, j)) options[i].push_back(j);
  std::vector<std::size_t> parent(n);
  std::vector<int> state(n);
  auto reaches_root = [&](std::size_t root) {
    // 0 unknown, 1 on current path, 2 known to reach root
    std::fill(state.begin(), state.end(), 0);
    state[root] = 2;
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t v = s;
      std::vector<std::size_t> path;
      while (state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = parent[v];
      }
      if (state[v] == 1) return false;
      for (std::size_t u : path) state[u] = 2;
    }
    return true;
  };
  for (std::size_t root = 0; root < n; ++root) {
    parent[root] = root;
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < n; ++i)
      if (i != root) nodes.push_back(i);
    bool feasible = true;
    for (std::size_t v : nodes) feasible = feasible && !options[v].empty();
    if (!feasible) continue;
    std::vector<std::size_t> pick(nodes.size(), 0);
    while (true) {
      for (std::size_t k = 0; k < nodes.size(); ++k) parent[nodes[k]] = options[nodes[k]][pick[k]];
      if (reaches_root(root)) visit(root, parent);
      std::size_t k = 0;
      while (k < nodes.size() && ++pick[k] == options[nodes[k]].size()) pick[k++] = 0;
      if (k == nodes.size()) break;
    }
  }
}

}  // namespace

StationaryDistribution stationary_tree(const Eigen::MatrixXd& P) {
  check_stochastic(P);
  const auto n = static_cast<std::size_t>(P.rows());
  if (n > max_tree_states)
    throw std::length_error("tree enumeration supports at most " + std::to_string(max_tree_states) + " states");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(P.rows());
  auto edge = [&](std::size_t i, std::size_t j) { return P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
  for_each_arborescence(
      n, [&](std::size_t i, std::size_t j) { return edge(i, j) > 0.0; },
      [&](std::size_t root, const std::vector<std::size_t>& parent) {
        double w = 1.0;
        for (std::size_t v = 0; v < n; ++v)
          if (v != root) w *= edge(v, parent[v]);
        u(static_cast<Eigen::Index>(root)) += w;
      });
  if (!(u.sum() > 0.0)) throw std::runtime_error("chain has no spanning arborescence (reducible)");
  return {u / u.sum(), std::numeric_limits<double>::quiet_NaN(), StationaryMethod::tree};
}

StationaryDistribution stationary_tree(const TransitionKernel& kernel) {
  StationaryDistribution d = stationary_tree(kernel.P);
  d.tau = kernel.tau;
  return d;
}

StabilityReport stochastically_stable_states(const CapGame& game, const std::vector<double>& tau_grid,
                                             Execution exec) {
  if (tau_grid.empty()) throw std::invalid_argument("tau grid is empty");
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    check_tau(tau_grid[k]);
    if (k > 0 && !(tau_grid[k] < tau_grid[k - 1])) throw std::invalid_argument("tau grid must be strictly decreasing");
  }
  StabilityReport report;
  report.tau_grid = tau_grid;
  for (double tau : tau_grid) report.distributions.push_back(stationary_direct(exact_transition_matrix(game, tau, exec)));
  if (tau_grid.size() < 2) return report;
  report.has_verdict = true;
  const Eigen::VectorXd& last = report.distributions.back().pi;
  const std::size_t tail = std::min<std::size_t>(3, tau_grid.size());
  // Decay rate of pi(a) / max pi, extrapolated to tau = 0 from the grid tail.
  const std::vector<double> tail_grid(tau_grid.end() - static_cast<std::ptrdiff_t>(tail), tau_grid.end());
  for (Eigen::Index a = 0; a < last.size(); ++a) {
    bool vanished = false;
    const auto log_ratio = [&](double tau) {
      const auto k = static_cast<std::size_t>(std::find(tau_grid.begin(), tau_grid.end(), tau) - tau_grid.begin());
      const Eigen::VectorXd& pi = report.distributions[k].pi;
      if (!(pi(a) > 0.0)) vanished = true;
      return vanished ? 0.0 : std::log(pi(a) / pi.maxCoeff());
    };
    const double rate = empirical_resistance_log(log_ratio, tail_grid).intercept;
    if (!vanished && rate <= stable_rate_tolerance) report.stable.push_back(static_cast<std::size_t>(a));
  }
  // Mass of every other state should be shrinking over the last grid points.
  std::size_t rising = 0;
  for (Eigen::Index a = 0; a < last.size(); ++a) {
    if (std::binary_search(report.stable.begin(), report.stable.end(), static_cast<std::size_t>(a))) continue;
    for (std::size_t k = tau_grid.size() - tail + 1; k < tau_grid.size(); ++k)
      if (report.distributions[k].pi(a) > report.distributions[k - 1].pi(a) * (1.0 + 1e-9)) {
        ++rising;
        break;
      }
  }
  if (rising > 0)
    report.warnings.push_back(std::to_string(rising) +
                              " non-stable state(s) gain mass along the grid tail; the grid may be too coarse");
  return report;
}

double transition_resistance(double delta) { return std::max(0.0, delta); }

Eigen::MatrixXd resistance_matrix(const CapGame& game) {
  const ProfileSpace space(game, max_kernel_states);
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(n, n, inf);
  for (Eigen::Index a = 0; a < n; ++a) {
    R(a, a) = 0.0;
    const AssignmentProfile pa = space.profile(static_cast<std::size_t>(a));
    for (std::size_t k = 0; k < space.num_active(); ++k) {
      const std::size_t player = space.active_players()[k];
      const double ua = game.utility(pa, player);
      for (int c = 0; c < game.num_channels(); ++c) {
        if (c == space.digit(static_cast<std::size_t>(a), k)) continue;
        const std::size_t b = space.neighbor(static_cast<std::size_t>(a), k, c);
        R(a, static_cast<Eigen::Index>(b)) = transition_resistance(ua - game.utility(space.profile(b), player));
      }
    }
  }
  return R;
}

TreeCheck min_resistance_tree_check(const Eigen::MatrixXd& resistance) {
  if (resistance.rows() != resistance.cols() || resistance.rows() == 0)
    throw std::invalid_argument("resistance matrix must be square and non-empty");
  const auto n = static_cast<std::size_t>(resistance.rows());
  if (n > max_tree_states)
    throw std::length_error("tree enumeration supports at most " + std::to_string(max_tree_states) + " states");
  auto r = [&](std::size_t i, std::size_t j) { return resistance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
  auto allowed = [&](std::size_t i, std::size_t j) { return std::isfinite(r(i, j)); };
  auto total = [&](std::size_t root, const std::vector<std::size_t>& parent) {
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (v != root) s += r(v, parent[v]);
    return s;
  };
  TreeCheck check;
  check.min_resistance = inf;
  for_each_arborescence(n, allowed, [&](std::size_t root, const std::vector<std::size_t>& parent) {
    check.min_resistance = std::min(check.min_resistance, total(root, parent));
  });
  if (!std::isfinite(check.min_resistance)) throw std::runtime_error("resistance graph has no spanning tree");
  const double cutoff = check.min_resistance + tie_tolerance;
  bool have_witness = false;
  for_each_arborescence(n, allowed, [&](std::size_t root, const std::vector<std::size_t>& parent) {
    if (total(root, parent) > cutoff) return;
    ++check.min_trees;
    if (check.min_roots.empty() || check.min_roots.back() != root) check.min_roots.push_back(root);
    bool has_zero = n == 1;
    for (std::size_t v = 0; v < n && !has_zero; ++v)
      if (v != root && r(v, parent[v]) <= 0.0) has_zero = true;
    // The witness is the first minimum tree, or the first counterexample.
    const bool counterexample = !has_zero && check.passed;
    if (!has_zero) check.passed = false;
    if (!have_witness || counterexample) {
      check.witness_root = root;
      check.witness_parent = parent;
      have_witness = true;
    }
  });
  return check;
}

ResistanceFit empirical_resistance_log(const std::function<double(double)>& log_f,
                                       const std::vector<double>& tau_grid, double tolerance) {
  if (tau_grid.size() < 2) throw std::invalid_argument("empirical_resistance needs at least two grid points");
  const auto m = static_cast<double>(tau_grid.size());
  std::vector<double> y(tau_grid.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    check_tau(tau_grid[k]);
    const double lf = log_f(tau_grid[k]);
    if (!std::isfinite(lf)) throw std::domain_error("f must be positive and finite on the grid");
    y[k] = -tau_grid[k] * lf;
    sx += tau_grid[k];
    sy += y[k];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    sxx += (tau_grid[k] - mx) * (tau_grid[k] - mx);
    sxy += (tau_grid[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("tau grid needs distinct points");
  ResistanceFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t k = 0; k < tau_grid.size(); ++k)
    fit.max_residual = std::max(fit.max_residual, std::abs(y[k] - fit.intercept - fit.slope * tau_grid[k]));
  fit.warn = fit.max_residual > tolerance;
  return fit;
}

ResistanceFit empirical_resistance(const std::function<double(double)>& f, const std::vector<double>& tau_grid,
                                   double tolerance) {
  return empirical_resistance_log(
      [&f](double tau) {
        const double v = f(tau);
        if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return std::log(v);
      },
      tau_grid, tolerance);
}

void write_distributions_csv(std::ostream& out, const ProfileSpace& space,
                             const std::vector<StationaryDistribution>& dists) {
  out << "index,profile";
  char buf[64];
  for (const auto& d : dists) {
    std::snprintf(buf, sizeof buf, "%.17g", d.tau);
    out << ',' << to_string(d.method) << "_tau_" << buf;
  }
  out << '\n';
  for (std::size_t a = 0; a < space.size(); ++a) {
    out << a << ',' << format_channels(space.profile(a).channel);
    for (const auto& d : dists) {
      if (static_cast<std::size_t>(d.pi.size()) != space.size())
        throw std::invalid_argument("distribution size does not match profile space");
      std::snprintf(buf, sizeof buf, "%.17g", d.pi(static_cast<Eigen::Index>(a)));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace d2d
