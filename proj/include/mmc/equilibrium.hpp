#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmc/game.hpp"
#include "mmc/strategy.hpp"
#include "mmc/value.hpp"

namespace mmc {

// Signed slack of an equilibrium condition; holds iff slack >= 0.
struct ConditionCheck {
  bool holds;
  double slack;
};

struct NtpdConditions {
  ConditionCheck first;   // feasibility of the transition increment eps_hat
  ConditionCheck second;  // feasibility of the mixing parameter eps
};

// One-shot deviation: defect in d_a markets of A and d_b markets of B for one
// period, then conform, against a conforming opponent currently at opp_state.
struct DeviationClass {
  int d_a, d_b;
  State opp_state;
};

struct DeviationMargin {
  DeviationClass dev;
  double margin;  // V_s - V(d_a, d_b, s)
};

// Certification record for an NTPD parameter point. `certified` requires the
// two closed-form conditions, the belief-free identities, every deviation
// margin >= -1e-9, and (for M <= 10) agreement of every concrete deviating
// action vector with its class payoff. Optimality is certified against
// one-shot deviations followed by conformity, which the indifference
// identities extend to arbitrary continuation strategies.
struct EquilibriumReport {
  ConditionCheck ev_condition;                   // single-market EV condition
  std::optional<ConditionCheck> ntpd2_condition; // present when M == 2
  NtpdConditions conditions;
  bool constructible = false;                    // transition probs all in [0,1]
  std::string construction_error;
  ClosedForms forms{};
  ValueMatrix values{};
  double identity_r = 0.0;  // |V_RR - V_PR|
  double identity_p = 0.0;  // |V_RP - V_PP|
  std::vector<DeviationMargin> margins;
  double min_margin = 0.0;
  bool class_equivalence_checked = false;
  bool class_equivalence_ok = false;
  double class_equivalence_err = 0.0;
  bool certified = false;
};

// EV equilibrium condition:
//   delta [2p - 1 - (1-p)(x+y) + max{x,y}] >= max{x,y}.
ConditionCheck check_ev_condition(const GameParams&);

// NTPD two-market condition (M = 2, M_A = 1):
//   delta [2p - 1 - (1-p)y + p max{x,y}] >= x + max{x,y}.
ConditionCheck check_ntpd2_condition(const GameParams&);

// The two NTPD equilibrium conditions for a general partition, evaluated
// exactly as stated.
NtpdConditions check_ntpdM_conditions(const GameParams&, const MarketStructure&);

// Closed-form payoff of a one-shot deviation followed by conformity.
// V(0, 0, s) equals V_s.
double deviation_payoff(const GameParams&, const MarketStructure&,
                        const ClosedForms&, DeviationClass);

// Same payoff for a concrete deviating action vector, by brute-force
// expectation over all 2^M opponent signal vectors. Independent of the
// closed-form route; any vector with the same (d_a, d_b) counts must agree.
double deviation_payoff_bruteforce(const GameParams&, const MarketStructure&,
                                   const TwoStateStrategy&, double v_r, double v_p,
                                   uint32_t action_mask, State opp_state);

// Full certification at one parameter point (see EquilibriumReport).
EquilibriumReport certify_ntpd(const GameParams&, const MarketStructure&);

// Grid check of the two-market comparison: wherever NTPD's condition holds,
// EV's condition holds and 2x the EV payoff weakly dominates NTPD's V_R.
struct TwoMarketComparison {
  long points_checked = 0;
  long ntpd_points = 0;
  bool holds = true;
  std::optional<GameParams> counterexample;
};
TwoMarketComparison check_two_market_dominance(const std::vector<GameParams>& grid);

// Large-market comparison in the s^{M_A} -> 0 regime. Not applicable unless
// both tail probabilities s^{M_A}, s^{M_B} are below `tail_tol`, the side
// condition M_A p x - (M_B - 1){2p - 1 - (1-p)x} >= (1-p)y holds, and the
// patient-limit NTPD condition M_B{2p - 1 - (1-p)x} > M_A p x holds. When
// applicable, checks that the patient-limit EV condition holds and that
// NTPD's limiting per-market payoff exceeds EV's.
struct LargeMarketComparison {
  bool applicable = false;
  std::string why_not;
  bool holds = false;
  double ntpd_per_market_limit = 0.0;
  double ev_payoff = 0.0;
};
LargeMarketComparison check_large_market_advantage(const GameParams&, const MarketStructure&,
                                  double tail_tol = 1e-6);

// Numeric probe: NTPD per-market payoff minus EV payoff for M = 2 at the
// lowest discount factor satisfying the two-market condition. Returns nullopt
// if no delta in (0, 1) satisfies it.
std::optional<double> ntpd2_gap_at_lowest_delta(double x, double y, double p);

}  // namespace mmc
