#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mmc/game.hpp"
#include "mmc/strategy.hpp"

namespace mmc {

// Pure actions prescribed at the two automaton states (bit set = D).
struct Prescriptions {
  uint32_t f_r, f_p;
};

inline Prescriptions ntpd_prescriptions(const MarketStructure& ms) {
  return {0u, ms.b_mask()};
}

struct LPAudit {
  long long alpha_vars, w_vars;
  long long incentive_rows, equality_rows, band_rows, simplex_rows;
};

struct SimplexStats {
  long long pivots = 0;
  size_t rows = 0, cols = 0;
};

enum class RowSense : uint8_t { LE, EQ };

// Dense LP in the form  A x (<=|=) b, x >= 0.
struct SimplexProblem {
  size_t rows = 0, cols = 0;
  std::vector<double> a;  // row-major
  std::vector<double> b;
  std::vector<RowSense> sense;

  void init(size_t r, size_t c) {
    rows = r;
    cols = c;
    a.assign(r * c, 0.0);
    b.assign(r, 0.0);
    sense.assign(r, RowSense::LE);
  }
  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double at(size_t r, size_t c) const { return a[r * cols + c]; }
};

// Phase-1 dense simplex feasibility test (Bland's rule, so deterministic and
// cycle-free). Returns true iff the artificial optimum is within feas_tol of
// zero.
bool phase1_feasible(const SimplexProblem&, SimplexStats* stats = nullptr,
                     double pivot_tol = 1e-9, double feas_tol = 1e-8);

// The payoff-bound linear program at a fixed candidate value v: player j
// mixes over action vectors with weights alpha(a_j), continuation payoffs
// enter through the products w(a_j, w_j) = alpha(a_j) z(a_j, w_j) with
// V_P alpha <= w <= v alpha, and every action vector a_i earns at most v with
// equality at the two prescribed actions.
class LPInstance {
 public:
  LPInstance(const GameParams&, const MarketStructure&, double v_p, double v,
             Prescriptions);

  LPAudit audit() const;
  int n_actions() const { return n_; }

  // Expected stage payoff of the deviator playing a_i against a_j.
  double stage_payoff(uint32_t a_i, uint32_t a_j) const;
  // Probability that the opponent observes bad-signal pattern omega when the
  // deviator plays a_i (the product of per-market marginals; the opponent's
  // own action does not move his signal about the deviator).
  double signal_prob(uint32_t a_i, uint32_t omega) const;
  // Incentive-row value E(a_i) at a candidate (alpha, continuation T),
  // where T(omega) is the alpha-average of z(., omega).
  double incentive_value(uint32_t a_i, const std::vector<double>& alpha,
                         const std::vector<double>& t_cont) const;

  // Full standard-form materialization: columns are the 2^M alpha variables
  // followed by the 4^M w variables; rows are the incentive block, both band
  // blocks and the simplex row. Dense, so only sensible for small M.
  SimplexProblem full_problem() const;

  // Exactly equivalent reduced problem. The w block enters the incentive rows
  // only through T(omega) = sum_a w(a, omega), and the bands pin T(omega) to
  // [V_P, v]; conversely any such T is realized by w = alpha * T. Variables
  // are alpha plus u with T = V_P + (v - V_P) u, u in [0, 1].
  SimplexProblem reduced_problem() const;

  double v() const { return v_; }
  double v_p() const { return v_p_; }
  const Prescriptions& prescriptions() const { return pres_; }

 private:
  GameParams gp_;
  MarketStructure ms_;
  double v_p_, v_;
  Prescriptions pres_;
  int n_;  // 2^M
};

struct FeasibleResult {
  bool feasible = false;
  SimplexStats stats;
};

// Builds the LP at candidate value v and reports feasibility. Requires
// v >= V_P; throws DimensionCap when M exceeds the cap (the instance grows
// as 4^M).
FeasibleResult feasible_at(double v, double v_p, const GameParams&,
                           const MarketStructure&, Prescriptions, int m_cap = 6);

struct BoundOptions {
  double tol = 1e-6;
  int m_cap = 6;
  // A value known to be feasible (for example a certified equilibrium payoff);
  // used to seed the bisection bracket when V_P itself is infeasible.
  std::optional<double> feasible_hint;
};

struct BoundResult {
  bool found = false;       // a feasible value was located
  double v_star = 0.0;      // largest feasible v (within tol)
  int iterations = 0;       // bisection steps
  SimplexStats lp_stats;    // accumulated over all feasibility solves
  bool lower_bracket_feasible = false;   // feasible exactly at v = V_P
  bool upper_bracket_infeasible = true;  // infeasible at v = M(1+x)
};

// Maximal v for which the LP is feasible, located by bisection to `tol` over
// [V_P, M(1+x)]. The feasible set in v is an interval (solutions at two
// values combine convexly), so bisection against its upper boundary is sound
// once any feasible point is known; V_P itself is usually infeasible because
// the two equality rows cannot both bind when every continuation is pinned
// at V_P.
BoundResult upper_bound(double v_p, const GameParams&, const MarketStructure&,
                        Prescriptions, const BoundOptions& = {});

// Ratio of NTPD's certified R-state payoff to the LP upper bound. Throws
// NotAnEquilibrium when certification fails at these parameters.
double efficiency(const GameParams&, const MarketStructure&, int m_cap = 6);

}  // namespace mmc
