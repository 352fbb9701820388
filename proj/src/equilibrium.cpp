#include "mmc/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "mmc/errors.hpp"

namespace mmc {

ConditionCheck check_ev_condition(const GameParams& gp) {
  const double mx = std::max(gp.x, gp.y);
  const double slack =
      gp.delta * (2.0 * gp.p - 1.0 - gp.s * (gp.x + gp.y) + mx) - mx;
  return {slack >= 0.0, slack};
}

ConditionCheck check_ntpd2_condition(const GameParams& gp) {
  const double mx = std::max(gp.x, gp.y);
  const double slack =
      gp.delta * (2.0 * gp.p - 1.0 - gp.s * gp.y + gp.p * mx) - (gp.x + mx);
  return {slack >= 0.0, slack};
}

NtpdConditions check_ntpdM_conditions(const GameParams& gp,
                                      const MarketStructure& ms) {
  ms.require_partition();
  const double p = gp.p, s = gp.s, x = gp.x, y = gp.y, d = gp.delta;
  const double ma = ms.m_a, mb = ms.m_b;
  const double p_mb = std::pow(p, ms.m_b), s_mb = std::pow(s, ms.m_b);
  const double s_ma = std::pow(s, ms.m_a), s_ma1 = std::pow(s, ms.m_a - 1);
  const double pw = p_mb - s_mb;

  const double slack1 =
      d * (x * (1.0 - s_ma) +
           s_ma1 * (mb * (p - s) - x * (ma - mb) * p - s_mb * (p - s) * mb * y / pw)) -
      x * (1.0 + s_ma1 * mb);
  const double slack2 =
      d * (pw * (mb * (p - s) + (ma - mb) * x * (s - s_ma)) +
           mb * y * (p - s) * (1.0 - s_ma - s_mb)) -
      (ma * x * pw + mb * y * (p - s));
  return {{slack1 >= 0.0, slack1}, {slack2 >= 0.0, slack2}};
}

double deviation_payoff(const GameParams& gp, const MarketStructure& ms,
                        const ClosedForms& cf, DeviationClass dev) {
  const double p = gp.p, s = gp.s, d = gp.delta;
  const double mb = ms.m_b, ma = ms.m_a, m = ms.m;
  const double da = dev.d_a, db = dev.d_b;
  const double gap = cf.v_r - cf.v_p;
  if (dev.opp_state == State::R) {
    // Opponent's switch probability after seeing the deviating vector.
    const double q = ((mb - db) * s + db * p) * cf.eps_hat +
                     std::pow(p, dev.d_a) * std::pow(s, ms.m_a - dev.d_a) *
                         (1.0 - mb * cf.eps_hat);
    return (1.0 - d) * (m + da * gp.x + db * gp.x) + d * cf.v_r - d * gap * q;
  }
  const double q = ((ma - da) * p + da * s) * cf.eps_hat +
                   std::pow(s, dev.d_b) * std::pow(p, ms.m_b - dev.d_b) * cf.eps *
                       (1.0 - ma * cf.eps_hat);
  return (1.0 - d) * (ma + da * gp.x - (mb - db) * gp.y) + d * cf.v_p +
         d * gap * q;
}

double deviation_payoff_bruteforce(const GameParams& gp, const MarketStructure& ms,
                                   const TwoStateStrategy& st, double v_r,
                                   double v_p, uint32_t action_mask,
                                   State opp_state) {
  const double q = opponent_switch_prob(gp, st, opp_state, action_mask);
  const double stay = opp_state == State::R ? v_r : v_p;
  const double moved = opp_state == State::R ? v_p : v_r;
  const double g = stage_payoff_vector(gp, action_mask, st.action_mask(opp_state), ms.m);
  return (1.0 - gp.delta) * g + gp.delta * ((1.0 - q) * stay + q * moved);
}

EquilibriumReport certify_ntpd(const GameParams& gp, const MarketStructure& ms) {
  ms.require_partition();
  EquilibriumReport rep;
  rep.ev_condition = check_ev_condition(gp);
  if (ms.m == 2) rep.ntpd2_condition = check_ntpd2_condition(gp);
  rep.conditions = check_ntpdM_conditions(gp, ms);
  rep.forms = ntpdM_closed_forms_unchecked(gp, ms);

  std::optional<TwoStateStrategy> strategy;
  try {
    strategy = make_ntpd(gp, ms, NTPDParams{rep.forms.eps, rep.forms.eps_hat});
    rep.constructible = true;
  } catch (const std::invalid_argument& e) {
    rep.construction_error = e.what();
    rep.certified = false;
    return rep;
  }

  rep.values = solve_value_equations(gp, ms, *strategy);
  rep.identity_r = std::abs(rep.values.v_rr - rep.values.v_pr);
  rep.identity_p = std::abs(rep.values.v_rp - rep.values.v_pp);

  rep.min_margin = 0.0;
  for (State st : {State::R, State::P}) {
    const double base = st == State::R ? rep.forms.v_r : rep.forms.v_p;
    for (int da = 0; da <= ms.m_a; ++da)
      for (int db = 0; db <= ms.m_b; ++db) {
        DeviationClass dev{da, db, st};
        double margin = base - deviation_payoff(gp, ms, rep.forms, dev);
        rep.margins.push_back({dev, margin});
        rep.min_margin = std::min(rep.min_margin, margin);
      }
  }

  if (ms.m <= 10) {
    rep.class_equivalence_checked = true;
    double err = 0.0;
    for (State st : {State::R, State::P}) {
      for (uint32_t mask = 0; mask < (1u << ms.m); ++mask) {
        DeviationClass dev{std::popcount(mask & ms.a_mask()),
                           std::popcount(mask & ms.b_mask()), st};
        double cls = deviation_payoff(gp, ms, rep.forms, dev);
        double bf = deviation_payoff_bruteforce(gp, ms, *strategy, rep.forms.v_r,
                                                rep.forms.v_p, mask, st);
        err = std::max(err, std::abs(cls - bf));
      }
    }
    rep.class_equivalence_err = err;
    rep.class_equivalence_ok = err <= 1e-9;
  }

  // Equality-binding deviations sit exactly at zero margin, hence the -1e-9.
  rep.certified = rep.conditions.first.holds && rep.conditions.second.holds &&
                  rep.forms.v_r > rep.forms.v_p && rep.identity_r <= 1e-9 &&
                  rep.identity_p <= 1e-9 && rep.min_margin >= -1e-9 &&
                  (!rep.class_equivalence_checked || rep.class_equivalence_ok);
  return rep;
}

TwoMarketComparison check_two_market_dominance(const std::vector<GameParams>& grid) {
  TwoMarketComparison res;
  for (const auto& gp : grid) {
    ++res.points_checked;
    if (!check_ntpd2_condition(gp).holds) continue;
    ++res.ntpd_points;
    bool ok = check_ev_condition(gp).holds;
    if (ok) {
      double ev2 = 2.0 * ev_closed_payoff(gp);
      double ntpd = ntpd2_closed_forms(gp).v_r;
      ok = ev2 >= ntpd - 1e-12;
    }
    if (!ok) {
      res.holds = false;
      if (!res.counterexample) res.counterexample = gp;
    }
  }
  return res;
}

LargeMarketComparison check_large_market_advantage(const GameParams& gp, const MarketStructure& ms,
                                  double tail_tol) {
  ms.require_partition();
  LargeMarketComparison res;
  const double p = gp.p, s = gp.s, x = gp.x, y = gp.y;
  if (std::pow(s, ms.m_a) > tail_tol || std::pow(s, ms.m_b) > tail_tol) {
    res.why_not = "market sets too small: s^{M_A} or s^{M_B} above tail tolerance";
    return res;
  }
  const double side = ms.m_a * p * x - (ms.m_b - 1) * (2.0 * p - 1.0 - s * x) - s * y;
  if (side < 0.0) {
    res.why_not = "side condition fails";
    return res;
  }
  const double patient_ntpd = ms.m_b * (2.0 * p - 1.0 - s * x) - ms.m_a * p * x;
  if (patient_ntpd <= 0.0) {
    res.why_not = "patient-limit NTPD condition fails";
    return res;
  }
  res.applicable = true;
  res.ev_payoff = ev_closed_payoff(gp);
  // NTPD payoff in the s^{M_A} -> 0 limit is delta-free.
  res.ntpd_per_market_limit =
      1.0 - (static_cast<double>(ms.m_b) / ms.m) * s * x / (p - s);
  const bool ev_patient = 2.0 * p - 1.0 - s * (x + y) > 0.0;
  res.holds = ev_patient && res.ntpd_per_market_limit > res.ev_payoff;
  return res;
}

std::optional<double> ntpd2_gap_at_lowest_delta(double x, double y, double p) {
  const double mx = std::max(x, y);
  const double coeff = 2.0 * p - 1.0 - (1.0 - p) * y + p * mx;
  if (coeff <= 0.0) return std::nullopt;
  double d_min = (x + mx) / coeff;
  d_min += 1e-12;  // keep the binding condition on the feasible side of rounding
  if (!(d_min > 0.0 && d_min < 1.0)) return std::nullopt;
  GameParams gp(x, y, p, d_min);
  if (!check_ntpd2_condition(gp).holds) return std::nullopt;
  return ntpd2_closed_forms(gp).v_r / 2.0 - ev_closed_payoff(gp);
}

}  // namespace mmc
