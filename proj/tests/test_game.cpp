#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmc/game.hpp"
#include "mmc/rng.hpp"

using namespace mmc;

TEST_CASE("signal marginal follows the one-parameter rule") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  CHECK(signal_marginal(gp, Action::C, Signal::Good) == doctest::Approx(0.9));
  CHECK(signal_marginal(gp, Action::C, Signal::Bad) == doctest::Approx(0.1));
  CHECK(signal_marginal(gp, Action::D, Signal::Bad) == doctest::Approx(0.9));
  GameParams gp6(0.1, 0.1, 0.6, 0.7);
  CHECK(signal_marginal(gp6, Action::D, Signal::Bad) == doctest::Approx(0.6));
  // Marginals over {g, b} sum to one.
  for (Action a : {Action::C, Action::D})
    CHECK(signal_marginal(gp, a, Signal::Good) + signal_marginal(gp, a, Signal::Bad) ==
          doctest::Approx(1.0));
}

TEST_CASE("joint signal distribution is the product of marginals") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  auto d = joint_signal_dist(gp, {Action::C, Action::C});
  CHECK(d[0] == doctest::Approx(0.81));  // (g, g)
  CHECK(d[1] == doctest::Approx(0.09));  // (b, g)
  CHECK(d[2] == doctest::Approx(0.09));  // (g, b)
  CHECK(d[3] == doctest::Approx(0.01));  // (b, b)

  // Against a defector, player 1's bad signal has marginal p whatever w2 is.
  auto cd = joint_signal_dist(gp, {Action::C, Action::D});
  CHECK(cd[1] + cd[3] == doctest::Approx(0.9));
}

TEST_CASE("parameter validation rejects boundaries") {
  CHECK_THROWS_AS(GameParams(0.1, 0.1, 0.5, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(0.1, 0.1, 1.0, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(0.1, 0.1, 0.9, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(0.1, 0.1, 0.9, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(0.0, 0.1, 0.9, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(0.1, 0.0, 0.9, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(GameParams(1.2, 0.2, 0.9, 0.7), std::invalid_argument);  // x - y >= 1
  CHECK_NOTHROW(GameParams(1.2, 0.5, 0.9, 0.7));
}

TEST_CASE("expected stage payoffs match the matrix") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  CHECK(expected_stage_payoff(gp, {Action::D, Action::C}) == doctest::Approx(1.1));
  CHECK(expected_stage_payoff(gp, {Action::D, Action::D}) == doctest::Approx(0.0));
  CHECK(expected_stage_payoff(gp, {Action::C, Action::D}) == doctest::Approx(-0.1));
  CHECK(expected_stage_payoff(gp, {Action::C, Action::C}) == doctest::Approx(1.0));
}

TEST_CASE("joint distribution sums to one and marginalizes exactly") {
  Xoshiro256 rng(42);
  for (int i = 0; i < 200; ++i) {
    GameParams gp(0.02 + 0.9 * rng.uniform(), 0.02 + 0.9 * rng.uniform(),
                  0.51 + 0.48 * rng.uniform(), 0.05 + 0.9 * rng.uniform());
    for (Action a1 : {Action::C, Action::D})
      for (Action a2 : {Action::C, Action::D}) {
        auto d = joint_signal_dist(gp, {a1, a2});
        double sum = d[0] + d[1] + d[2] + d[3];
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (double v : d) CHECK(v >= 0.0);
        // Marginalizing over w2 reproduces player 1's marginal (one rounding
        // step of slack: q(p + s) regrouped).
        CHECK(std::abs(d[0] + d[2] - signal_marginal(gp, a2, Signal::Good)) <= 1e-15);
        CHECK(std::abs(d[1] + d[3] - signal_marginal(gp, a2, Signal::Bad)) <= 1e-15);
      }
  }
}

TEST_CASE("bitmask helpers agree with the per-market lookups") {
  GameParams gp(0.3, 0.2, 0.8, 0.6);
  // Player 1 plays (C, D), player 2 plays (D, D): -y + 0.
  CHECK(stage_payoff_vector(gp, 0b10, 0b11, 2) == doctest::Approx(-0.2));
  // Signal probabilities multiply across markets.
  // Opponent of a (C, D) player sees bad with prob s in market 0, p in market 1.
  CHECK(signal_vector_prob(gp, 0b10, 0b00, 2) == doctest::Approx(0.8 * 0.2));
  CHECK(signal_vector_prob(gp, 0b10, 0b10, 2) == doctest::Approx(0.8 * 0.8));
  double total = 0;
  for (uint32_t w = 0; w < 4; ++w) total += signal_vector_prob(gp, 0b10, w, 2);
  CHECK(total == doctest::Approx(1.0));
}
