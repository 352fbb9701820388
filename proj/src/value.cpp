#include "mmc/value.hpp"

#include <cmath>

#include "mmc/equilibrium.hpp"
#include "mmc/errors.hpp"

namespace mmc {

double ev_closed_payoff(const GameParams& gp) {
  return 1.0 - gp.s * gp.x / (gp.p - gp.s);
}

double ev_closed_punish_payoff(const GameParams& gp) {
  return gp.s * gp.y / (gp.p - gp.s);
}

ClosedForms ntpd2_closed_forms(const GameParams& gp) {
  auto cond = check_ntpd2_condition(gp);
  if (!cond.holds)
    throw ConditionViolated("NTPD two-market condition fails, slack " +
                            std::to_string(cond.slack));
  const double p = gp.p, s = gp.s, x = gp.x, y = gp.y, d = gp.delta;
  ClosedForms cf{};
  cf.v_p = 1.0 + (p * x + s * y) / (p - s);
  cf.eps = (1.0 - d * p) * y / (d * (2.0 * p - 1.0 - s * y) - x);
  cf.eps_hat = (1.0 - d * p) * x / (d * (2.0 * p - 1.0 - p * x - s * y));
  cf.v_r = 2.0 - d * s * (2.0 * p - 1.0 - p * x - s * y) / ((2.0 * p - 1.0) * (1.0 - d * p));
  return cf;
}

ClosedForms ntpdM_closed_forms_unchecked(const GameParams& gp,
                                         const MarketStructure& ms) {
  ms.require_partition();
  const double p = gp.p, s = gp.s, x = gp.x, y = gp.y, d = gp.delta;
  const double ma = ms.m_a, mb = ms.m_b, m = ms.m;
  const double p_mb = std::pow(p, ms.m_b), s_mb = std::pow(s, ms.m_b);
  const double s_ma = std::pow(s, ms.m_a);
  // p > 1/2 > s makes p^{M_B} - s^{M_B} strictly positive.
  const double pw = p_mb - s_mb;
  if (!(pw > 0.0))
    throw std::logic_error("ntpdM_closed_forms: degenerate signal-power gap");

  ClosedForms cf{};
  cf.v_p = ma + p * ma * x / (p - s) + s_mb * mb * y / pw;
  cf.eps_hat = x * (1.0 - d * (1.0 - s_ma)) /
               (d * (mb * (p - s) - x * (ma * p + mb * s - mb * s_ma) -
                     s_mb * (p - s) * mb * y / pw));
  cf.eps = mb * y * (p - s) * cf.eps_hat / ((1.0 - ma * cf.eps_hat) * pw * x);
  cf.v_r = m - (d * s_ma * (p - s) * (m - cf.v_p) +
                (1.0 - d) * (s - s_ma) * mb * x) /
                   ((p - s) * (1.0 - d * (1.0 - s_ma)));
  return cf;
}

ClosedForms ntpdM_closed_forms(const GameParams& gp, const MarketStructure& ms) {
  auto conds = check_ntpdM_conditions(gp, ms);
  if (!conds.first.holds)
    throw ConditionViolated("NTPD transition-feasibility condition fails, slack " +
                            std::to_string(conds.first.slack));
  if (!conds.second.holds)
    throw ConditionViolated("NTPD mixing-feasibility condition fails, slack " +
                            std::to_string(conds.second.slack));
  return ntpdM_closed_forms_unchecked(gp, ms);
}

double opponent_switch_prob(const GameParams& gp, const TwoStateStrategy& st,
                            State opp_state, uint32_t own_mask) {
  const int m = st.structure().m;
  double total = 0.0;
  for (uint32_t bad = 0; bad < (1u << m); ++bad)
    total += signal_vector_prob(gp, own_mask, bad, m) * st.switch_prob(opp_state, bad);
  return total;
}

ValueMatrix solve_value_equations(const GameParams& gp, const MarketStructure& ms,
                                  const TwoStateStrategy& st) {
  const int m = ms.m;
  const double d = gp.delta;
  const uint32_t f_r = st.action_mask(State::R), f_p = st.action_mask(State::P);

  double out[2][2];
  for (State s1 : {State::R, State::P}) {
    const uint32_t own = st.action_mask(s1);
    const double q_r = opponent_switch_prob(gp, st, State::R, own);
    const double q_p = opponent_switch_prob(gp, st, State::P, own);
    const double g_r = stage_payoff_vector(gp, own, f_r, m);
    const double g_p = stage_payoff_vector(gp, own, f_p, m);
    // V_sR = (1-d) g_r + d [(1-q_r) V_sR + q_r V_sP]
    // V_sP = (1-d) g_p + d [q_p V_sR + (1-q_p) V_sP]
    const double a11 = 1.0 - d * (1.0 - q_r), a12 = -d * q_r;
    const double a21 = -d * q_p, a22 = 1.0 - d * (1.0 - q_p);
    const double b1 = (1.0 - d) * g_r, b2 = (1.0 - d) * g_p;
    const double det = a11 * a22 - a12 * a21;
    out[static_cast<int>(s1)][0] = (b1 * a22 - a12 * b2) / det;
    out[static_cast<int>(s1)][1] = (a11 * b2 - b1 * a21) / det;
  }

  ValueMatrix vm{};
  vm.v_rr = out[0][0];
  vm.v_rp = out[0][1];
  vm.v_pr = out[1][0];
  vm.v_pp = out[1][1];
  vm.v_r = vm.v_rr;
  vm.v_p = vm.v_pp;
  return vm;
}

EVParams ev_transition_solve(const GameParams& gp) {
  auto cond = check_ev_condition(gp);
  if (!cond.holds)
    throw ConditionViolated("EV condition fails, slack " + std::to_string(cond.slack));
  const double spread = 2.0 * gp.p - 1.0 - gp.s * (gp.x + gp.y);  // (p-s)(V_R - V_P)
  return EVParams{(1.0 - gp.delta) * gp.x / (gp.delta * spread),
                  (1.0 - gp.delta) * gp.y / (gp.delta * spread)};
}

}  // namespace mmc
