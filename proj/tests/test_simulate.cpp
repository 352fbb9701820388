#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmc/simulate.hpp"
#include "mmc/value.hpp"

using namespace mmc;

namespace {

SimConfig quick(long n, uint64_t seed) {
  SimConfig cfg;
  cfg.replications = n;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("identical seeds give bit-identical results") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto st = make_ntpd(gp, ms, {cf.eps, cf.eps_hat});
  auto player = StrategyPlayer::two_state(st);
  SimConfig cfg = quick(4000, 99);
  cfg.start2 = State::P;
  SimResult a = simulate(gp, ms, player, player, cfg);
  SimResult b = simulate(gp, ms, player, player, cfg);
  CHECK(a.mean_payoff == b.mean_payoff);
  CHECK(a.std_error == b.std_error);
  for (int k = 0; k < 4; ++k) CHECK(a.state_occupancy[k] == b.state_occupancy[k]);
  // Thread count must not change the reduction.
  cfg.threads = 1;
  SimResult c = simulate(gp, ms, player, player, cfg);
  CHECK(a.mean_payoff == c.mean_payoff);
  CHECK(a.std_error == c.std_error);
}

TEST_CASE("replication streams are independent of the total count") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto st = make_ntpd(gp, ms, {cf.eps, cf.eps_hat});
  auto player = StrategyPlayer::two_state(st);
  SimConfig cfg = quick(500, 1234);
  SimResult res = simulate(gp, ms, player, player, cfg);
  // Recompute the same replications one by one.
  int horizon = res.horizon;
  double sum = 0;
  for (long i = 0; i < 500; ++i)
    sum += detail::run_replication(gp, ms, player, player, cfg, horizon,
                                   static_cast<uint64_t>(i), std::nullopt, nullptr);
  CHECK(res.mean_payoff == doctest::Approx(sum / 500).epsilon(1e-15));
}

TEST_CASE("EV pair mean is within four standard errors of the closed payoff") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  EVParams pars = ev_transition_solve(gp);
  auto st = make_ev(gp, pars);
  auto player = StrategyPlayer::two_state(st);
  SimConfig cfg = quick(30000, 321);
  SimResult res = simulate(gp, MarketStructure(1, 0), player, player, cfg);
  CHECK(std::abs(res.mean_payoff - 0.9875) <= 4 * res.std_error);
}

TEST_CASE("NTPD pair from RP estimates the punish-state payoff") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto player = StrategyPlayer::two_state(make_ntpd(gp, ms, {cf.eps, cf.eps_hat}));
  SimConfig cfg = quick(30000, 321);
  cfg.start1 = State::R;
  cfg.start2 = State::P;
  SimResult res = simulate(gp, ms, player, player, cfg);
  CHECK(std::abs(res.mean_payoff - 1.125) <= 4 * res.std_error);
  double occ = res.state_occupancy[0] + res.state_occupancy[1] +
               res.state_occupancy[2] + res.state_occupancy[3];
  CHECK(occ == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single period with a negligible discount factor pays the stage game") {
  GameParams gp(0.1, 0.1, 0.9, 1e-6);
  MarketStructure ms(2, 1);
  auto player = StrategyPlayer::two_state(make_ntpd(gp, ms, {0.5, 0.2}));
  SimConfig cfg = quick(200, 5);
  cfg.horizon = 1;
  SimResult res = simulate(gp, ms, player, player, cfg);
  CHECK(res.mean_payoff == doctest::Approx((1.0 - 1e-6) * 2.0).epsilon(1e-12));
  CHECK(res.std_error <= 1e-12);  // expected-payoff accrual, no sampling noise
}

TEST_CASE("std error shrinks like the square root of the replication count") {
  GameParams gp(0.1, 0.1, 0.8, 0.7);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto player = StrategyPlayer::two_state(make_ntpd(gp, ms, {cf.eps, cf.eps_hat}));
  SimResult a = simulate(gp, ms, player, player, quick(8000, 7));
  SimResult b = simulate(gp, ms, player, player, quick(16000, 7));
  double ratio = b.std_error / a.std_error;
  CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) <= 0.2 / std::sqrt(2.0));
}

TEST_CASE("pinned player 1 reproduces the value matrix even off equilibrium") {
  // p = 0.84, delta = 0.7 is constructible but not an equilibrium, where
  // conforming pair play would not match the constant-action values.
  GameParams gp(0.1, 0.1, 0.84, 0.7);
  MarketStructure ms(6, 3);
  ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
  auto st = make_ntpd(gp, ms, {cf.eps, cf.eps_hat});
  ValueMatrix vm = solve_value_equations(gp, ms, st);
  auto player = StrategyPlayer::two_state(st);
  const double analytic[4] = {vm.v_rr, vm.v_rp, vm.v_pr, vm.v_pp};
  const State starts[4][2] = {{State::R, State::R},
                              {State::R, State::P},
                              {State::P, State::R},
                              {State::P, State::P}};
  for (int i = 0; i < 4; ++i) {
    SimConfig cfg = quick(20000, 1000 + i);
    cfg.start1 = starts[i][0];
    cfg.start2 = starts[i][1];
    cfg.pin_player1 = starts[i][0];
    SimResult res = simulate(gp, ms, player, player, cfg);
    CHECK(std::abs(res.mean_payoff - analytic[i]) <= 4 * res.std_error);
  }
}

TEST_CASE("one-shot deviation estimates match their class payoffs") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto st = make_ntpd(gp, ms, {cf.eps, cf.eps_hat});

  SimConfig cfg = quick(30000, 77);
  SimResult base = simulate_unilateral(gp, ms, st, {0, 0, State::R}, cfg);
  CHECK(std::abs(base.mean_payoff - cf.v_r) <= 4 * base.std_error);

  SimResult dc_p = simulate_unilateral(gp, ms, st, {1, 0, State::P}, cfg);
  CHECK(std::abs(dc_p.mean_payoff - cf.v_p) <= 4 * dc_p.std_error);

  SimResult dd_r = simulate_unilateral(gp, ms, st, {1, 1, State::R}, cfg);
  CHECK(dd_r.mean_payoff <= cf.v_r + 4 * dd_r.std_error);
  double expected = deviation_payoff(gp, ms, cf, {1, 1, State::R});
  CHECK(std::abs(dd_r.mean_payoff - expected) <= 4 * dd_r.std_error);
}

TEST_CASE("EV product payoff factorizes across markets") {
  GameParams gp(0.1, 0.1, 0.9, 0.7);
  EVParams pars = ev_transition_solve(gp);
  auto player = StrategyPlayer::ev_product(gp, pars, 3);
  SimConfig cfg = quick(30000, 13);
  SimResult res = simulate(gp, MarketStructure(3, 0), player, player, cfg);
  CHECK(std::abs(res.mean_payoff - 3 * 0.9875) <= 4 * res.std_error);
}

TEST_CASE("high-p equilibrium play concentrates on the mutual reward state") {
  GameParams gp(0.1, 0.1, 0.9, 0.9);
  MarketStructure ms(6, 3);
  ClosedForms cf = ntpdM_closed_forms(gp, ms);
  auto player = StrategyPlayer::two_state(make_ntpd(gp, ms, {cf.eps, cf.eps_hat}));
  for (int i = 0; i < 4; ++i) {
    SimConfig cfg = quick(300, 40 + i);
    cfg.horizon = 2000;
    cfg.truncation_tol = 1.0;  // chain property, not a payoff estimate
    cfg.start1 = i < 2 ? State::R : State::P;
    cfg.start2 = (i % 2) ? State::P : State::R;
    SimResult res = simulate(gp, ms, player, player, cfg);
    CHECK(res.state_occupancy[0] > res.state_occupancy[1]);
    CHECK(res.state_occupancy[0] > res.state_occupancy[2]);
    CHECK(res.state_occupancy[0] > res.state_occupancy[3]);
  }
}

TEST_CASE("horizon too short for the tolerance is rejected") {
  GameParams gp(0.1, 0.1, 0.9, 0.95);
  MarketStructure ms(2, 1);
  auto player = StrategyPlayer::two_state(make_ntpd(gp, ms, {0.5, 0.2}));
  SimConfig cfg = quick(10, 1);
  cfg.horizon = 5;
  CHECK_THROWS_AS(simulate(gp, ms, player, player, cfg), std::invalid_argument);
}
