#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mmc/equilibrium.hpp"
#include "mmc/errors.hpp"
#include "mmc/lp.hpp"
#include "mmc/value.hpp"

using namespace mmc;

TEST_CASE("phase-1 simplex on tiny systems") {
  // x1 + x2 <= 1, x1 - x2 = 0.25: feasible.
  SimplexProblem a;
  a.init(2, 2);
  a.at(0, 0) = 1;
  a.at(0, 1) = 1;
  a.b[0] = 1;
  a.at(1, 0) = 1;
  a.at(1, 1) = -1;
  a.b[1] = 0.25;
  a.sense[1] = RowSense::EQ;
  CHECK(phase1_feasible(a));

  // x1 + x2 <= -1 with x >= 0: infeasible.
  SimplexProblem b;
  b.init(1, 2);
  b.at(0, 0) = 1;
  b.at(0, 1) = 1;
  b.b[0] = -1;
  CHECK_FALSE(phase1_feasible(b));

  // Equalities that contradict each other.
  SimplexProblem c;
  c.init(2, 1);
  c.at(0, 0) = 1;
  c.b[0] = 1;
  c.sense[0] = RowSense::EQ;
  c.at(1, 0) = 1;
  c.b[1] = 2;
  c.sense[1] = RowSense::EQ;
  CHECK_FALSE(phase1_feasible(c));

  // Degenerate rows (b = 0) terminate under Bland's rule.
  SimplexProblem d;
  d.init(2, 2);
  d.at(0, 0) = 1;
  d.at(0, 1) = -1;
  d.b[0] = 0;
  d.sense[0] = RowSense::EQ;
  d.at(1, 0) = 1;
  d.at(1, 1) = 1;
  d.b[1] = 2;
  d.sense[1] = RowSense::EQ;
  CHECK(phase1_feasible(d));
}

TEST_CASE("instance audit matches the construction counts") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  for (int m : {2, 3, 6}) {
    MarketStructure ms(m, m / 2 ? m / 2 : 1);
    ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
    LPInstance inst(gp, ms, cf.v_p, cf.v_p + 0.5, ntpd_prescriptions(ms));
    LPAudit audit = inst.audit();
    long long n = 1ll << m;
    CHECK(audit.alpha_vars == n);
    CHECK(audit.w_vars == n * n);
    CHECK(audit.incentive_rows == n);
    CHECK(audit.equality_rows == 2);
    CHECK(audit.band_rows == 2 * n * n);
    CHECK(audit.simplex_rows == 1);
    if (m <= 3) {
      SimplexProblem full = inst.full_problem();
      CHECK(static_cast<long long>(full.rows) ==
            audit.incentive_rows + audit.band_rows + audit.simplex_rows);
      CHECK(static_cast<long long>(full.cols) == audit.alpha_vars + audit.w_vars);
      long long eq = 0;
      for (auto s : full.sense)
        if (s == RowSense::EQ) ++eq;
      CHECK(eq == audit.equality_rows + audit.simplex_rows);
    }
  }
}

TEST_CASE("full and reduced formulations give the same verdicts") {
  GameParams gp(0.1, 0.1, 0.8, 0.8);
  for (int m : {2, 3}) {
    MarketStructure ms(m, 1);
    ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
    double hi = ms.m * (1.0 + gp.x);
    int agree = 0, feas = 0;
    for (int k = 0; k <= 12; ++k) {
      double v = cf.v_p + (hi - cf.v_p) * k / 12.0;
      LPInstance inst(gp, ms, cf.v_p, v, ntpd_prescriptions(ms));
      bool full = phase1_feasible(inst.full_problem());
      bool reduced = phase1_feasible(inst.reduced_problem());
      CHECK(full == reduced);
      agree += full == reduced;
      feas += reduced;
    }
    CHECK(agree == 13);
    CHECK(feas > 0);  // the grid crosses the feasible interval
  }
}

TEST_CASE("the certified strategy witnesses its own payoff") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  MarketStructure ms(6, 3);
  EquilibriumReport rep = certify_ntpd(gp, ms);
  REQUIRE(rep.certified);
  const ClosedForms cf = rep.forms;
  auto st = make_ntpd(gp, ms, {cf.eps, cf.eps_hat});

  // alpha concentrated on the reward action; continuations follow the
  // opponent's transition out of R.
  const int n = 1 << ms.m;
  std::vector<double> alpha(n, 0.0);
  alpha[ntpd_prescriptions(ms).f_r] = 1.0;
  std::vector<double> t_cont(n);
  for (int omega = 0; omega < n; ++omega) {
    double tau = st.switch_prob(State::R, static_cast<uint32_t>(omega));
    t_cont[omega] = cf.v_r - tau * (cf.v_r - cf.v_p);
    CHECK(t_cont[omega] >= cf.v_p - 1e-12);
    CHECK(t_cont[omega] <= cf.v_r + 1e-12);
  }
  LPInstance inst(gp, ms, cf.v_p, cf.v_r, ntpd_prescriptions(ms));
  for (int ai = 0; ai < n; ++ai) {
    double e = inst.incentive_value(static_cast<uint32_t>(ai), alpha, t_cont);
    CHECK(e <= cf.v_r + 1e-9);
    // The incentive value of any vector equals its one-shot deviation payoff.
    DeviationClass dev{std::popcount(static_cast<uint32_t>(ai) & ms.a_mask()),
                       std::popcount(static_cast<uint32_t>(ai) & ms.b_mask()),
                       State::R};
    CHECK(e == doctest::Approx(deviation_payoff(gp, ms, cf, dev)).epsilon(1e-10));
  }
  double e_r = inst.incentive_value(ntpd_prescriptions(ms).f_r, alpha, t_cont);
  double e_p = inst.incentive_value(ntpd_prescriptions(ms).f_p, alpha, t_cont);
  CHECK(std::abs(e_r - cf.v_r) <= 1e-9);
  CHECK(std::abs(e_p - cf.v_r) <= 1e-9);

  // And the solver agrees that v = V_R is feasible.
  CHECK(feasible_at(cf.v_r, cf.v_p, gp, ms, ntpd_prescriptions(ms)).feasible);
}

TEST_CASE("bracket endpoints behave as expected") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  auto pres = ntpd_prescriptions(ms);
  // Continuations pinned at V_P cannot satisfy both equality rows: the two
  // prescribed actions earn different stage payoffs against every opponent
  // action, so v = V_P is infeasible.
  CHECK_FALSE(feasible_at(cf.v_p, cf.v_p, gp, ms, pres).feasible);
  CHECK_FALSE(feasible_at(ms.m * (1.0 + gp.x), cf.v_p, gp, ms, pres).feasible);
  CHECK(feasible_at(cf.v_r, cf.v_p, gp, ms, pres).feasible);
}

TEST_CASE("upper bound by bisection matches an independent solver") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  MarketStructure ms(2, 1);
  ClosedForms cf = ntpd2_closed_forms(gp);
  BoundOptions opt;
  opt.feasible_hint = cf.v_r;
  BoundResult res = upper_bound(cf.v_p, gp, ms, ntpd_prescriptions(ms), opt);
  CHECK(res.found);
  CHECK_FALSE(res.lower_bracket_feasible);
  CHECK(res.upper_bracket_infeasible);
  // Reference value computed with an interior-point solver on the same LP.
  CHECK(res.v_star == doctest::Approx(1.95).epsilon(2e-4));
  CHECK(res.v_star >= cf.v_r - 1e-5);
  CHECK(res.iterations > 10);

  // Feasibility is an interval in v: feasible below v*, infeasible above.
  auto pres = ntpd_prescriptions(ms);
  CHECK(feasible_at(res.v_star - 0.01, cf.v_p, gp, ms, pres).feasible);
  CHECK(feasible_at(res.v_star - 0.10, cf.v_p, gp, ms, pres).feasible);
  CHECK_FALSE(feasible_at(res.v_star + 0.001, cf.v_p, gp, ms, pres).feasible);
}

TEST_CASE("six-market bound matches the reference solver") {
  GameParams gp(0.1, 0.1, 0.8, 0.8);
  MarketStructure ms(6, 3);
  ClosedForms cf = ntpdM_closed_forms(gp, ms);
  BoundOptions opt;
  opt.feasible_hint = cf.v_r;
  BoundResult res = upper_bound(cf.v_p, gp, ms, ntpd_prescriptions(ms), opt);
  CHECK(res.found);
  CHECK(res.v_star == doctest::Approx(5.944444).epsilon(2e-4));
}

TEST_CASE("efficiency is gated on certification") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  MarketStructure ms(6, 3);
  double eff = efficiency(gp, ms);
  CHECK(eff >= 0.90);
  CHECK(eff <= 1.0 + 1e-4);

  CHECK_THROWS_AS(efficiency(GameParams(0.1, 0.1, 0.95, 0.8), ms), NotAnEquilibrium);
}

TEST_CASE("dimension cap") {
  GameParams gp(0.1, 0.1, 0.75, 0.8);
  MarketStructure ms(8, 4);
  ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
  CHECK_THROWS_AS(feasible_at(cf.v_p + 0.5, cf.v_p, gp, ms, ntpd_prescriptions(ms)),
                  DimensionCap);
  // The cap is an override, not a hard limit.
  CHECK_NOTHROW(feasible_at(cf.v_p + 0.5, cf.v_p, gp, ms, ntpd_prescriptions(ms), 8));
}
