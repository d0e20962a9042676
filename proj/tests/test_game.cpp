#include <doctest.h>

#include <boost/random/exponential_distribution.hpp>

#include <cmath>
#include <numeric>

#include "d2d/game.hpp"
#include "d2d/scenarios.hpp"

using namespace d2d;

namespace {

RadioParams hand_params() {
  RadioParams p;
  p.noise_power_w = 1e-3;
  p.num_channels = 2;
  p.bandwidth_hz = 1.0;
  p.sinr_min_db = -60.0;
  p.sinr_max_db = 60.0;
  return p;
}

CapGame hand_game(UtilityMode mode = UtilityMode::deterministic) {
  Eigen::MatrixXd g(3, 3);
  g << 0.9, 0.2, 0.05,
       0.1, 0.8, 0.3,
       0.4, 0.07, 0.6;
  return CapGame(topology_from_gains(g, {1.0, 2.0, 0.5}), hand_params(), mode);
}

double lg(double x) { return std::log2(1.0 + x); }

CapGame random_game(std::size_t uec, std::size_t ued, int channels, std::uint64_t seed,
                    UtilityMode mode = UtilityMode::deterministic) {
  const Scenario s = random_scenario(uec, ued, channels, seed);
  return CapGame(s.topology, s.params, mode);
}

}  // namespace

TEST_CASE("cochannel sets") {
  CHECK(cochannel_set(AssignmentProfile{}, 0).empty());
  const AssignmentProfile all0({0, 0, 0}, {false, false, false});
  CHECK(cochannel_set(all0, 0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(cochannel_set(all0, 1).empty());
  const AssignmentProfile p({0, 1, 0}, {false, false, false});
  CHECK(cochannel_set(p, 0) == std::vector<std::size_t>{0, 2});
  CHECK(cochannel_set(p, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("profile validation") {
  CHECK_NOTHROW(validate_profile(AssignmentProfile({0, 1, 1}, {true, false, false}), 2));
  CHECK_THROWS_AS(validate_profile(AssignmentProfile({0, 2}, {false, false}), 2), std::invalid_argument);
  CHECK_THROWS_AS(validate_profile(AssignmentProfile({1, 1}, {true, true}), 2), std::invalid_argument);
  CHECK_THROWS_AS(AssignmentProfile({0, 1}, {false}), std::invalid_argument);
}

TEST_CASE("utility against hand evaluation") {
  const CapGame game = hand_game();
  const double phi_max = 3.0 * lg(1e6);
  CHECK(game.phi_max() == doctest::Approx(phi_max).epsilon(1e-15));
  const AssignmentProfile prof({0, 1, 0}, {false, false, false});
  const double n = 1e-3;
  // UE 0 with UE 2 co-channel: own rate + UE 2's rate with 0 minus without 0
  const double s0 = 0.9 / (0.5 * 0.4 + n);
  const double s2_with = 0.5 * 0.6 / (0.05 + n);
  const double s2_without = 0.5 * 0.6 / n;
  const double u0 = lg(s0) + lg(s2_with) - lg(s2_without);
  CHECK(game.utility(prof, 0) == doctest::Approx(u0 / phi_max).epsilon(1e-13));
  const double s0_without = 0.9 / n;
  const double u2 = lg(s2_with) + lg(s0) - lg(s0_without);
  CHECK(game.utility(prof, 2) == doctest::Approx(u2 / phi_max).epsilon(1e-13));
  // Alone on its channel the utility is the own rate.
  CHECK(game.utility(prof, 1) == doctest::Approx(lg(2.0 * 0.8 / n) / phi_max).epsilon(1e-13));
  // Marginal-contribution utilities can be negative.
  CHECK(game.utility(prof, 0) < 0.0);
}

TEST_CASE("potential against hand evaluation") {
  const CapGame game = hand_game();
  const AssignmentProfile prof({0, 1, 0}, {false, false, false});
  const double n = 1e-3;
  const double expected = lg(0.9 / (0.2 + n)) + lg(1.6 / n) + lg(0.3 / (0.05 + n));
  CHECK(game.potential(prof, 1, 0) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(game.normalized_potential(prof) == doctest::Approx(expected / game.phi_max()).epsilon(1e-13));

  SUBCASE("empty network") {
    RadioParams p;
    const CapGame empty(topology_from_positions(p, {0, 0}, {}, {}), p, UtilityMode::deterministic);
    CHECK(empty.potential(AssignmentProfile{}, 1, 0) == 0.0);
  }
  SUBCASE("single UE with unit gains") {
    RadioParams p;
    p.noise_power_w = 0.25;
    Eigen::MatrixXd g(1, 1);
    g << 1.0;
    const CapGame one(topology_from_gains(g, {1.0}), p, UtilityMode::deterministic);
    CHECK(one.potential(AssignmentProfile({0}, {false}), 1, 0) == doctest::Approx(p.bandwidth_hz * std::log2(5.0)));
  }
}

TEST_CASE("utility evaluation is deterministic") {
  const CapGame game = random_game(1, 4, 3, 8);
  const AssignmentProfile prof = game.make_profile({0, 2, 1, 0});
  CHECK(game.utility(prof, 3) == game.utility(prof, 3));
  Rng rng = make_rng(4, 0);
  const auto f = FadingRealization::draw(game.num_players(), rng);
  CHECK(game.utility_sample(prof, 2, f) == game.utility_sample(prof, 2, f));
}

TEST_CASE("exact potential identity, exhaustive 3 players / 2 channels") {
  const CapGame game = hand_game();
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (int code = 0; code < 8; ++code) {
      const AssignmentProfile prof({code & 1, (code >> 1) & 1, (code >> 2) & 1}, {false, false, false});
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) worst = std::max(worst, verify_potential_identity(game, i, a, b, prof));
    }
  CHECK(worst <= 1e-12);
  const AssignmentProfile prof({0, 1, 0}, {false, false, false});
  CHECK(verify_potential_identity(game, 0, 1, 1, prof) == 0.0);
}

TEST_CASE("exact potential identity, random 4 players / 3 channels") {
  const CapGame game = random_game(1, 3, 3, 21);
  Rng rng = make_rng(77, 0);
  std::uniform_int_distribution<int> ch(0, 2);
  std::uniform_int_distribution<std::size_t> pl(1, 3);
  for (int k = 0; k < 100; ++k) {
    const AssignmentProfile prof = game.random_profile(rng);
    CHECK(verify_potential_identity(game, pl(rng), ch(rng), ch(rng), prof) <= 1e-12);
  }
}

TEST_CASE("identity checks reject noisy games and passive players") {
  const CapGame noisy = random_game(1, 2, 2, 3, UtilityMode::noisy);
  const AssignmentProfile prof = noisy.base_profile();
  CHECK_THROWS_AS(verify_potential_identity(noisy, 1, 0, 1, prof), std::logic_error);
  const CapGame det = noisy.with_mode(UtilityMode::deterministic);
  CHECK_THROWS_AS(verify_potential_identity(det, 0, 0, 1, prof), std::invalid_argument);
}

TEST_CASE("locality: moving a player leaves other channels untouched") {
  const CapGame game = random_game(1, 6, 4, 13);
  Rng rng = make_rng(1, 1);
  for (int k = 0; k < 30; ++k) {
    AssignmentProfile a = game.random_profile(rng);
    const std::size_t i = 1 + static_cast<std::size_t>(k % 6);
    AssignmentProfile b = a;
    b.channel[i] = (a.channel[i] + 1) % 4;
    const auto frozen = FadingRealization::frozen(game.num_players());
    for (std::size_t j = 0; j < game.num_players(); ++j) {
      if (a.channel[j] == a.channel[i] || a.channel[j] == b.channel[i]) continue;
      CHECK(sinr(game.topology(), game.params(), a, j, frozen) == sinr(game.topology(), game.params(), b, j, frozen));
    }
  }
}

TEST_CASE("utility range") {
  // Marginal contributions are bounded by phi_max in magnitude.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CapGame game = random_game(2, 5, 3, seed);
    Rng rng = make_rng(seed, 9);
    for (int k = 0; k < 40; ++k) {
      const AssignmentProfile prof = game.random_profile(rng);
      for (std::size_t i : game.active_players()) {
        const double u = game.utility(prof, i);
        CHECK(u <= 1.0);
        CHECK(u > -1.0);
      }
      CHECK(game.normalized_potential(prof) >= 0.0);
      CHECK(game.normalized_potential(prof) <= 1.0);
    }
  }
}

TEST_CASE("utility_mean") {
  const CapGame game = random_game(1, 4, 2, 5, UtilityMode::noisy);
  const AssignmentProfile prof = game.make_profile({0, 0, 1, 0});

  SUBCASE("one sample equals utility_sample on the same draws") {
    Rng rng = make_rng(3, stream::utility);
    const double mean = game.utility_mean(prof, 1, 1, rng).mean;
    // Rebuild the draws: the estimator consumes k*k coefficients over the
    // co-channel members in transmitter-major order.
    Rng replay = make_rng(3, stream::utility);
    boost::random::exponential_distribution<double> exp1(1.0);
    const auto members = cochannel_set(prof, 0);
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(5, 5);
    for (std::size_t a : members)
      for (std::size_t b : members) h(Eigen::Index(a), Eigen::Index(b)) = exp1(replay);
    CHECK(mean == doctest::Approx(game.utility_sample(prof, 1, FadingRealization(h))).epsilon(1e-14));
  }
  SUBCASE("retained samples average to the mean") {
    const UtilityEstimate e = game.utility_mean(prof, 2, 50, 11, true);
    CHECK(e.count == 50);
    REQUIRE(e.samples.size() == 50);
    CHECK(std::accumulate(e.samples.begin(), e.samples.end(), 0.0) / 50.0 == doctest::Approx(e.mean).epsilon(1e-13));
  }
  SUBCASE("deterministic mode is exact for any N") {
    const CapGame det = game.with_mode(UtilityMode::deterministic);
    CHECK(det.utility_mean(prof, 1, 1, 0).mean == det.utility(prof, 1));
    CHECK(det.utility_mean(prof, 1, 1000, 0).mean == det.utility(prof, 1));
  }
  SUBCASE("variance shrinks like 1/N") {
    std::vector<double> var;
    for (std::size_t n : {10u, 100u, 1000u}) {
      const int reps = 400;
      double s = 0.0, ss = 0.0;
      for (int r = 0; r < reps; ++r) {
        const double m = game.utility_mean(prof, 1, n, 1000 + r * 7 + n).mean;
        s += m;
        ss += m * m;
      }
      var.push_back((ss - s * s / reps) / (reps - 1));
    }
    // ratios of 10 with the sampling spread of a 400-sample variance estimate
    CHECK(var[0] / var[1] == doctest::Approx(10.0).epsilon(0.3));
    CHECK(var[1] / var[2] == doctest::Approx(10.0).epsilon(0.3));
  }
  SUBCASE("unbiased for the fading expectation") {
    // Average many independent estimates and compare with a long direct
    // Monte Carlo of the same expectation over full realizations.
    double s = 0.0, ss = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      const double m = game.utility_mean(prof, 1, 200, 5000 + r).mean;
      s += m;
      ss += m * m;
    }
    const double grand = s / reps;
    const double se = std::sqrt((ss - s * s / reps) / (reps - 1) / reps);
    Rng rng = make_rng(12345, stream::fading);
    double ref = 0.0;
    const int n_ref = 200000;
    for (int k = 0; k < n_ref; ++k)
      ref += game.utility_sample(prof, 1, FadingRealization::draw(game.num_players(), rng));
    ref /= n_ref;
    CHECK(std::abs(grand - ref) <= 3.0 * se + 1e-4);
  }
  CHECK_THROWS_AS(game.utility_mean(prof, 1, 0, 1), std::invalid_argument);
}

TEST_CASE("noisy potential uses common draws") {
  const CapGame game = random_game(1, 3, 2, 6, UtilityMode::noisy);
  const FadingBank bank(game.num_players(), 64, 2);
  const AssignmentProfile a = game.make_profile({0, 1, 1});
  CHECK(game.potential(a, bank) == game.potential(a, 64, 2));
  // Mean over the bank equals the mean of per-draw sum rates.
  double s = 0.0;
  for (std::size_t k = 0; k < bank.size(); ++k) s += game.sum_rate(a, bank[k]);
  CHECK(game.potential(a, bank) == doctest::Approx(s / 64.0).epsilon(1e-14));
  CHECK(game.with_mode(UtilityMode::deterministic).potential(a, 64, 2) ==
        doctest::Approx(game.normalized_potential(a) * game.phi_max()).epsilon(1e-14));
}

TEST_CASE("profile builders") {
  const CapGame game = random_game(2, 3, 4, 1);
  const AssignmentProfile base = game.base_profile(3);
  CHECK(base.channel == std::vector<int>{0, 1, 3, 3, 3});
  CHECK(base.passive == std::vector<bool>{true, true, false, false, false});
  CHECK(game.active_players() == std::vector<std::size_t>{2, 3, 4});
  CHECK_THROWS_AS(game.make_profile({0, 1}), std::invalid_argument);
  Rng rng = make_rng(2, 2);
  for (int k = 0; k < 20; ++k) CHECK_NOTHROW(validate_profile(game.random_profile(rng), 4));
  RadioParams p;
  p.num_channels = 1;
  CHECK_THROWS_AS(CapGame(generate_topology(RadioParams{}, 2, 0, 1), p, UtilityMode::noisy), std::invalid_argument);
}
