// Serial reference vs OpenMP kernels: wall time and result equality.

#include <chrono>
#include <cstdio>
#include <functional>

#include "d2d/experiment.hpp"
#include "d2d/scenarios.hpp"

namespace {

double seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-26s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  identical %s\n", name, serial, parallel,
              serial / parallel, same ? "yes" : "NO");
}

}  // namespace

int main() {
  using d2d::Execution;
  std::printf("threads: %d\n", d2d::max_threads());

  const auto big = d2d::random_scenario(1, 8, 4, 11);
  const d2d::CapGame game(big.topology, big.params, d2d::UtilityMode::deterministic);
  d2d::OptimumResult a, b;
  const double s1 = seconds([&] { a = d2d::brute_force_optimum(game, Execution::serial); });
  const double p1 = seconds([&] { b = d2d::brute_force_optimum(game, Execution::parallel); });
  row("brute_force_optimum 4^8", s1, p1, a.phi == b.phi && a.argmax == b.argmax);

  const auto mid = d2d::random_scenario(1, 6, 4, 12);
  const d2d::CapGame kgame(mid.topology, mid.params, d2d::UtilityMode::deterministic);
  Eigen::MatrixXd ps, pp;
  const double s2 = seconds([&] { ps = d2d::exact_transition_matrix(kgame, 0.1, Execution::serial).P; });
  const double p2 = seconds([&] { pp = d2d::exact_transition_matrix(kgame, 0.1, Execution::parallel).P; });
  row("transition matrix 4^6", s2, p2, ps == pp);

  d2d::ExperimentConfig cfg = d2d::preset("desk");
  cfg.realizations = 8;
  cfg.horizon_slots = 100;
  d2d::SweepPoint rs, rp;
  const double s3 = seconds([&] { rs = d2d::run_experiment(cfg, Execution::serial); });
  const double p3 = seconds([&] { rp = d2d::run_experiment(cfg, Execution::parallel); });
  row("run_experiment desk x8", s3, p3, rs.mean_trace == rp.mean_trace && rs.mean == rp.mean);
  return 0;
}
