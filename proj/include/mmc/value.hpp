#pragma once

#include "mmc/game.hpp"
#include "mmc/strategy.hpp"

namespace mmc {

// Continuation payoffs V_{s1 s2}: player 1 repeats the action prescribed at
// s1 forever while player 2 starts at s2 and follows the automaton. v_r / v_p
// are the belief-free payoffs (v_rr and v_pp once the identities hold).
struct ValueMatrix {
  double v_rr, v_rp, v_pr, v_pp;
  double v_r, v_p;
};

// Strategy parameters and payoffs delivered by the closed forms. For NTPD,
// (eps, eps_hat); for EV, the pair is (eps_r, eps_p).
struct ClosedForms {
  double eps, eps_hat;
  double v_r, v_p;
};

// EV equilibrium payoff starting from the reward state: 1 - (1-p)x/(2p-1).
double ev_closed_payoff(const GameParams&);

// EV belief-free punish-state payoff (1-p)y/(2p-1).
double ev_closed_punish_payoff(const GameParams&);

// Closed forms for NTPD with two markets (M = 2, M_A = 1). Throws
// ConditionViolated when the two-market equilibrium condition fails.
ClosedForms ntpd2_closed_forms(const GameParams&);

// Closed forms for NTPD with an arbitrary partition. Throws ConditionViolated
// when either equilibrium condition fails.
ClosedForms ntpdM_closed_forms(const GameParams&, const MarketStructure&);

// Same algebra with no condition gate; used by certification and asymptotic
// probes where the conditions are checked (or known to fail) separately.
ClosedForms ntpdM_closed_forms_unchecked(const GameParams&, const MarketStructure&);

// Probability that a conforming opponent at `opp_state` switches states after
// one period in which player 1 plays `own_mask`, by exhaustive enumeration of
// the opponent's 2^M signal vectors.
double opponent_switch_prob(const GameParams&, const TwoStateStrategy&,
                            State opp_state, uint32_t own_mask);

// Solves the four value equations for a symmetric two-state strategy pair.
// For each fixed own state the pair (V_{s1 R}, V_{s1 P}) satisfies a 2x2
// linear system solved in closed form; the system is nonsingular for every
// delta < 1.
ValueMatrix solve_value_equations(const GameParams&, const MarketStructure&,
                                  const TwoStateStrategy&);

// EV transition probabilities that make the strategy pair belief-free. The
// two indifference identities
//   (1-delta) x = delta (p-s) eps_r (V_R - V_P)
//   (1-delta) y = delta (p-s) eps_p (V_R - V_P)
// are linear in (eps_r, eps_p) once V_R and V_P are pinned by the value
// equations; their feasibility region is exactly the EV equilibrium
// condition, which is re-derived rather than assumed. Throws
// ConditionViolated when that condition fails.
EVParams ev_transition_solve(const GameParams&);

}  // namespace mmc
