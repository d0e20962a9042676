// End-to-end acceptance checks. One line per criterion; exit status is
// non-zero when any criterion fails. Wall-clock budgets are reported next to
// each result but do not decide it.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/analysis.hpp"
#include "d2d/config.hpp"
#include "d2d/experiment.hpp"
#include "d2d/learning.hpp"
#include "d2d/resistance.hpp"
#include "d2d/rng.hpp"
#include "d2d/scenarios.hpp"

using namespace d2d;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

int failures = 0;
int executed = 0;
std::vector<int> selected;  // empty: all

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  ++executed;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s, budget %.0f s%s)\n", out.pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs, budget_s, secs > budget_s ? ", over budget" : "");
  std::fflush(stdout);
}

// Sum rate rebuilt link by link from the radio layer, normalized.
double oracle_phi(const CapGame& game, const AssignmentProfile& p) {
  const auto frozen = FadingRealization::frozen(game.num_players());
  double s = 0.0;
  for (std::size_t i = 0; i < game.num_players(); ++i)
    s += rate(sinr(game.topology(), game.params(), p, i, frozen), game.params().bandwidth_hz);
  return s / game.phi_max();
}

CapGame scenario_game(const Scenario& s) { return CapGame(s.topology, s.params, UtilityMode::deterministic); }

// Random gain matrix: strong direct links, log-uniform cross gains.
CapGame gain_game(std::size_t players, std::size_t uec, int channels, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> direct(0.5, 1.0), cross(std::log(1e-3), std::log(0.5));
  Eigen::MatrixXd g(players, players);
  for (std::size_t a = 0; a < players; ++a)
    for (std::size_t b = 0; b < players; ++b) g(a, b) = a == b ? direct(rng) : std::exp(cross(rng));
  RadioParams p;
  p.num_channels = channels;
  p.noise_power_w = 1e-3;
  p.bandwidth_hz = 1.0;
  p.sinr_min_db = -60.0;
  p.sinr_max_db = 60.0;
  return CapGame(topology_from_gains(g, std::vector<double>(players, 1.0), uec), p, UtilityMode::deterministic);
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Outcome potential_identity() {
  struct Shape {
    std::size_t uec, ued;
    int channels;
  };
  const std::vector<Shape> shapes = {{1, 3, 3}, {0, 4, 3}, {1, 4, 3}, {2, 4, 3}, {1, 4, 2}};
  double worst = 0.0;
  std::size_t checks = 0;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto& s = shapes[k];
    const CapGame game = scenario_game(random_scenario(s.uec, s.ued, s.channels, 100 + k));
    const ProfileSpace space(game);
    std::vector<double> phi(space.size());
    for (std::size_t a = 0; a < space.size(); ++a) phi[a] = oracle_phi(game, space.profile(a));
    for (std::size_t a = 0; a < space.size(); ++a) {
      const AssignmentProfile base = space.profile(a);
      for (std::size_t j = 0; j < space.num_active(); ++j) {
        const std::size_t i = space.active_players()[j];
        for (int c = 0; c < game.num_channels(); ++c)
          for (int c2 = 0; c2 < game.num_channels(); ++c2) {
            if (c == c2) continue;
            AssignmentProfile x = base, y = base;
            x.channel[i] = c;
            y.channel[i] = c2;
            const double du = game.utility(x, i) - game.utility(y, i);
            const double dphi = phi[space.neighbor(a, j, c)] - phi[space.neighbor(a, j, c2)];
            worst = std::max({worst, std::abs(du - dphi), verify_potential_identity(game, i, c, c2, base)});
            ++checks;
          }
      }
    }
  }
  return {worst <= 1e-12, fmt("%zu instances, %zu unilateral deviations, max |dU - dphi| = %.3g (tol 1e-12)",
                              shapes.size(), checks, worst)};
}

Outcome gibbs_oracle() {
  std::vector<CapGame> games = {scenario_game(desk_scenario()),
                                scenario_game(random_scenario(1, 3, 3, 7)),
                                gain_game(4, 0, 3, 11), gain_game(3, 1, 2, 12)};
  double worst_gap = 0.0, worst_res = 0.0;
  for (const auto& game : games) {
    const ProfileSpace space(game);
    for (double tau : {0.5, 0.1, 0.02}) {
      const auto kernel = exact_transition_matrix(game, tau);
      const auto direct = stationary_direct(kernel);
      std::vector<long double> w(space.size());
      long double top = -1e300L, z = 0.0L;
      for (std::size_t a = 0; a < space.size(); ++a) {
        w[a] = static_cast<long double>(oracle_phi(game, space.profile(a))) / tau;
        top = std::max(top, w[a]);
      }
      for (auto& x : w) z += (x = std::exp(x - top));
      Eigen::VectorXd gibbs(space.size());
      for (std::size_t a = 0; a < space.size(); ++a) gibbs[a] = static_cast<double>(w[a] / z);
      worst_gap = std::max({worst_gap, max_abs_diff(direct.pi, gibbs),
                            max_abs_diff(direct.pi, gibbs_distribution(game, tau).pi)});
      worst_res = std::max(worst_res, stationary_residual(direct.pi, kernel.P));
    }
  }
  return {worst_gap <= 1e-9 && worst_res <= 1e-10,
          fmt("%zu instances x 3 temperatures, max |pi_direct - pi_gibbs| = %.3g (tol 1e-9), "
              "max residual = %.3g (tol 1e-10)",
              games.size(), worst_gap, worst_res)};
}

Outcome tree_check() {
  std::vector<Eigen::MatrixXd> chains;
  Rng rng = make_rng(31, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 2; n <= 5; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::MatrixXd P(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) P(a, b) = (rep % 2 == 1 && u(rng) < 0.4) ? 0.0 : u(rng);
      // keep it irreducible with a cycle
      for (int a = 0; a < n; ++a) P(a, (a + 1) % n) += 0.05;
      for (int a = 0; a < n; ++a) P.row(a) /= P.row(a).sum();
      chains.push_back(P);
    }
  for (int channels = 2; channels <= 5; ++channels)
    chains.push_back(exact_transition_matrix(gain_game(1, 0, channels, 40 + channels), 0.1).P);
  chains.push_back(exact_transition_matrix(gain_game(2, 0, 2, 50), 0.05).P);
  double worst = 0.0;
  for (const auto& P : chains) worst = std::max(worst, max_abs_diff(stationary_tree(P).pi, stationary_direct(P).pi));
  return {worst <= 1e-10, fmt("%zu chains of 2-5 states, max |pi_tree - pi_direct| = %.3g (tol 1e-10)",
                              chains.size(), worst)};
}

Outcome stability() {
  const std::vector<double> grid = {0.5, 0.2, 0.1, 0.05, 0.02};
  std::vector<std::pair<std::string, CapGame>> games = {
      {"symmetric-pair", scenario_game(symmetric_pair_scenario())},
      {"desk", scenario_game(desk_scenario())},
      {"gain 3x2", gain_game(3, 0, 2, 61)},
      {"gain 3x3", gain_game(3, 0, 3, 62)},
      {"gain 4x2", gain_game(4, 1, 2, 63)}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, game] : games) {
    const auto report = stochastically_stable_states(game, grid);
    const auto opt = brute_force_optimum(game);
    const bool same = report.has_verdict && report.stable == opt.argmax;
    ok = ok && same;
    detail += fmt("%s%s |opt|=%zu %s", detail.empty() ? "" : ", ", name.c_str(), opt.argmax.size(),
                  same ? "match" : "MISMATCH");
  }
  return {ok, detail};
}

using Dec = boost::multiprecision::cpp_dec_float_50;

std::uint64_t dec_ceil(const Dec& x) { return static_cast<std::uint64_t>(boost::multiprecision::ceil(x)); }

Outcome sample_counts() {
  const Dec tau("0.1"), xi("1e-5");
  const Dec bounded = (boost::multiprecision::log(Dec(4) / xi) + Dec(2) / tau) / (2 * (1 - xi) * (1 - xi) * tau * tau);
  const auto n_bounded = required_samples_bounded(0.1, 1e-5, 1.0);

  // Gaussian: log M = sigma^2 theta^2 / 2, theta* = (1-xi) tau / sigma^2,
  // denominator (1-xi)^2 tau^2 / (2 sigma^2).
  struct G {
    double sigma, xi, tau;
  };
  bool gauss_ok = true;
  double worst_theta = 0.0;
  std::string gauss_detail;
  for (const G& g : {G{1.0, 0.5, 0.1}, G{0.7, 1e-5, 0.05}, G{1.3, 0.01, 0.2}}) {
    const Dec s(g.sigma), x(g.xi), t(g.tau);
    const Dec theta = (1 - x) * t / (s * s);
    const Dec denom = (1 - x) * (1 - x) * t * t / (2 * s * s);
    const std::uint64_t n = dec_ceil((boost::multiprecision::log(4 / x) + 2 / t) / denom);
    const auto got = required_samples_unbounded(g.tau, g.xi, gaussian_noise(g.sigma));
    const double dtheta = std::abs(got.theta_star - theta.convert_to<double>());
    worst_theta = std::max(worst_theta, dtheta);
    gauss_ok = gauss_ok && dtheta <= 1e-8 && got.samples == n;
    gauss_detail += fmt(" %llu/%llu", static_cast<unsigned long long>(got.samples), static_cast<unsigned long long>(n));
  }
  const bool ok = n_bounded == dec_ceil(bounded) && n_bounded == 1645 && gauss_ok;
  return {ok, fmt("bounded N = %llu (oracle %llu), gaussian N got/oracle:%s, max |theta* error| = %.3g (tol 1e-8)",
                  static_cast<unsigned long long>(n_bounded), static_cast<unsigned long long>(dec_ceil(bounded)),
                  gauss_detail.c_str(), worst_theta)};
}

Outcome acceptance_statistics() {
  const std::size_t trials = 100000;
  Rng rng = make_rng(77, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool ok = true;
  std::string detail;
  const double tau = 0.1;
  for (double ratio : {-2.0, 0.0, 2.0}) {
    const double p = acceptance_probability(ratio * tau, tau);
    const double oracle = 1.0 / (1.0 + std::exp(ratio));
    std::size_t hits = 0;
    for (std::size_t k = 0; k < trials; ++k) hits += u(rng) < p;
    const double freq = static_cast<double>(hits) / trials;
    const double bound = 3.0 * std::sqrt(oracle * (1.0 - oracle) / trials);
    ok = ok && std::abs(freq - oracle) <= bound && std::abs(p - oracle) <= 1e-15;
    detail += fmt("d/tau=%g freq %.4f vs %.4f (3 sigma %.4f); ", ratio, freq, oracle, bound);
  }
  bool saturated = true;
  for (const auto& [d, t] : std::vector<std::pair<double, double>>{{800.0, 1.0}, {1.0, 1e-3}, {1e300, 1e-300},
                                                                   {0.7, 1e-308}, {40.0, 1.0}})
    saturated = saturated && acceptance_probability(d, t) + acceptance_probability(-d, t) == 1.0;
  ok = ok && saturated;
  detail += saturated ? "saturated p(d)+p(-d) == 1" : "saturated sum != 1";
  return {ok, detail};
}

// Expression trees for the resistance rules.
struct Node {
  enum Kind { constant, exponential, add, sub, mul, inv } kind;
  double value = 0.0;
  std::unique_ptr<Node> a, b;
};

std::unique_ptr<Node> random_tree(Rng& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 1);
  std::uniform_int_distribution<int> level(0, 6);
  std::uniform_real_distribution<double> kappa(0.5, 5.0);
  auto n = std::make_unique<Node>();
  n->kind = static_cast<Node::Kind>(pick(rng));
  if (n->kind == Node::constant) {
    n->value = kappa(rng);
  } else if (n->kind == Node::exponential) {
    n->value = 0.5 * level(rng);
  } else {
    n->a = random_tree(rng, depth - 1);
    if (n->kind != Node::inv) n->b = random_tree(rng, depth - 1);
  }
  return n;
}

ResistanceExpr build(const Node& n) {
  switch (n.kind) {
    case Node::constant: return res_of_const(n.value);
    case Node::exponential: return res_of_exp(n.value);
    case Node::add: return res_add(build(*n.a), build(*n.b));
    case Node::sub: return res_sub(build(*n.a), build(*n.b));
    case Node::mul: return res_mul(build(*n.a), build(*n.b));
    case Node::inv: return res_inv(build(*n.a));
  }
  throw std::logic_error("bad node");
}

// (resistance, term count); nullopt where the rules give no answer
std::optional<std::pair<double, std::size_t>> rule_oracle(const Node& n) {
  if (n.kind == Node::constant) return std::pair{0.0, std::size_t{1}};
  if (n.kind == Node::exponential) return std::pair{n.value, std::size_t{1}};
  const auto x = rule_oracle(*n.a);
  if (!x) return std::nullopt;
  if (n.kind == Node::inv) {
    if (x->second != 1 || x->first == 0.0) return std::nullopt;
    return std::pair{-x->first, std::size_t{1}};
  }
  const auto y = rule_oracle(*n.b);
  if (!y) return std::nullopt;
  if (n.kind == Node::add) return std::pair{std::min(x->first, y->first), x->second + y->second};
  if (n.kind == Node::mul) return std::pair{x->first + y->first, x->second * y->second};
  if (!(x->first < y->first)) return std::nullopt;
  return std::pair{x->first, x->second + y->second};
}

Outcome resistance_suite() {
  Rng rng = make_rng(2025, 0);
  int agree = 0, defined = 0;
  for (int k = 0; k < 100; ++k) {
    const auto tree = random_tree(rng, 3);
    const auto expected = rule_oracle(*tree);
    if (!expected) {
      try {
        build(*tree);
      } catch (const UndefinedResistance&) {
        ++agree;
      }
      continue;
    }
    ++defined;
    const ResistanceExpr e = build(*tree);
    agree += e.resistance() == expected->first && e.terms().size() == expected->second;
  }

  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(0.01 * k);
  double worst_fit = 0.0;
  for (double d : {-0.5, 0.0, 0.5}) {
    const auto fit = empirical_resistance([d](double t) { return acceptance_probability(d, t); }, grid);
    worst_fit = std::max(worst_fit, std::abs(fit.intercept - std::max(0.0, d)));
  }

  int chains = 0, trees_ok = 0;
  for (int k = 0; k < 10; ++k)
    for (const CapGame& game : {gain_game(1, 0, 3, 300 + k), gain_game(1, 0, 4, 400 + k), gain_game(2, 0, 2, 500 + k)}) {
      const Eigen::MatrixXd R = resistance_matrix(game);
      const TreeCheck check = min_resistance_tree_check(R);
      bool witness_zero = false;
      for (std::size_t v = 0; v < check.witness_parent.size(); ++v)
        if (v != check.witness_root && R(v, check.witness_parent[v]) == 0.0) witness_zero = true;
      ++chains;
      trees_ok += check.passed && check.min_trees > 0 && witness_zero;
    }
  const bool ok = agree == 100 && worst_fit <= 1e-2 && trees_ok == chains;
  return {ok, fmt("rules %d/100 exact (%d defined), max |fit - max(0,d)| = %.3g (tol 1e-2), "
                  "zero-edge min trees %d/%d chains",
                  agree, defined, worst_fit, trees_ok, chains)};
}

ExperimentConfig desk_config(const std::string& name) {
  ExperimentConfig c = preset(name);
  c.realizations = 100;
  c.horizon_slots = 500;
  return c;
}

}  // namespace

// Optional arguments restrict the run to the listed criterion numbers.
int main(int argc, char** argv) {
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  criterion(1, "potential identity", 10, potential_identity);
  criterion(2, "gibbs stationarity", 30, gibbs_oracle);
  criterion(3, "tree theorem", 10, tree_check);
  criterion(4, "stochastic stability", 60, stability);
  criterion(5, "sample counts", 1, sample_counts);
  criterion(6, "acceptance rule statistics", 5, acceptance_statistics);

  std::optional<SweepPoint> blla;
  criterion(7, "noisy convergence", 300, [&] {
    blla = run_experiment(desk_config("desk"));
    return Outcome{blla->mean_occupancy >= 0.8,
                   fmt("mean optimal occupancy %.4f (min 0.8), N = %llu, mean sum rate %.4g bit/s", blla->mean_occupancy,
                       static_cast<unsigned long long>(required_samples(0.05, 1e-5, BoundedNoise{1.0})), blla->mean)};
  });

  std::optional<SweepPoint> decreasing;
  criterion(8, "decreasing vs fixed temperature", 300, [&] {
    ExperimentConfig fixed = desk_config("desk");
    fixed.tau = 0.1;
    const SweepPoint f = run_experiment(fixed);
    decreasing = run_experiment(desk_config("desk-decreasing"));
    return Outcome{decreasing->mean_occupancy >= f.mean_occupancy,
                   fmt("occupancy decreasing %.4f vs fixed %.4f", decreasing->mean_occupancy, f.mean_occupancy)};
  });

  criterion(9, "sweep trends", 600, [] {
    const ExperimentConfig c = preset("desk-sweep");
    const auto ch = sweep_channels(c, {2, 3, 4});
    const auto ue = sweep_ues(c, {2, 4, 8});
    const bool ch_ok = ch[0].mean <= ch[1].mean && ch[1].mean <= ch[2].mean;
    const double d1 = (ue[1].mean - ue[0].mean) / 2.0, d2 = (ue[2].mean - ue[1].mean) / 4.0;
    const bool ue_ok = ue[0].mean < ue[1].mean && ue[1].mean < ue[2].mean && d2 - d1 <= 0.0;
    return Outcome{ch_ok && ue_ok,
                   fmt("channels 2/3/4: %.4g %.4g %.4g; ueds 2/4/8: %.4g %.4g %.4g, slope %.4g -> %.4g per ued",
                       ch[0].mean, ch[1].mean, ch[2].mean, ue[0].mean, ue[1].mean, ue[2].mean, d1, d2)};
  });

  // BLLA runs with tau(t) = 0.1 / log(1 + t); the fixed tau = 0.05 run is
  // reported for reference only.
  criterion(10, "blla vs better response", 600, [&] {
    if (!decreasing) decreasing = run_experiment(desk_config("desk-decreasing"));
    ExperimentConfig br = desk_config("desk-br");
    br.br_samples = 1;
    const SweepPoint br1 = run_experiment(br);
    br.br_samples = 2000;
    const SweepPoint brn = run_experiment(br);
    const double gap1 = decreasing->mean - br1.mean, gapn = decreasing->mean - brn.mean;
    const std::string reference = blla ? fmt(" (fixed tau 0.05 blla %.5g)", blla->mean) : "";
    return Outcome{gap1 > 0.0 && std::abs(gapn) < gap1,
                   fmt("blla %.5g, br(1) %.5g, br(2000) %.5g bit/s; gap %.4g -> %.4g%s", decreasing->mean, br1.mean,
                       brn.mean, gap1, gapn, reference.c_str())};
  });

  criterion(11, "resistance suite", 60, resistance_suite);

  std::printf("%d of %d criteria failed\n", failures, executed);
  return failures == 0 ? 0 : 1;
}
