#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "mmc/game.hpp"

namespace mmc {

enum class State : uint8_t { R = 0, P = 1 };

inline State other(State s) { return s == State::R ? State::P : State::R; }
inline const char* to_string(State s) { return s == State::R ? "R" : "P"; }

// Partition of M markets into A (the low m_a bit positions) and B (the rest).
struct MarketStructure {
  int m, m_a, m_b;

  MarketStructure(int markets, int markets_a)
      : m(markets), m_a(markets_a), m_b(markets - markets_a) {
    if (m < 1) throw std::invalid_argument("MarketStructure: M must be >= 1");
    if (m_a < 0 || m_a > m)
      throw std::invalid_argument("MarketStructure: need 0 <= M_A <= M");
  }

  // Bitmask views are limited to enumerable sizes; closed-form analysis of
  // larger structures never touches them.
  uint32_t all_mask() const { return (1u << require_enumerable()) - 1u; }
  uint32_t a_mask() const {
    require_enumerable();
    return (1u << m_a) - 1u;
  }
  uint32_t b_mask() const { return all_mask() ^ a_mask(); }

  int require_enumerable() const {
    if (m > 30)
      throw std::invalid_argument("MarketStructure: M too large for bitmask enumeration");
    return m;
  }

  // Requires 1 <= M_A < M (partial defection needs both sets nonempty).
  void require_partition() const {
    if (m_a < 1 || m_a >= m)
      throw std::invalid_argument("MarketStructure: NTPD needs 1 <= M_A < M");
  }
};

// EV transition parameters: punish after a bad signal with eps_r, forgive
// after a good signal with eps_p.
struct EVParams {
  double eps_r, eps_p;
};

// NTPD transition parameters.
struct NTPDParams {
  double eps, eps_hat;
};

namespace detail {
inline void check_prob(double v, const std::string& branch) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument("transition probability out of [0,1] on branch '" +
                                branch + "': " + std::to_string(v));
}
}  // namespace detail

// Two-state automaton strategy over M markets with pure action prescriptions
// per state and a mixed switch probability per observed signal vector.
// Instances: the single-market EV automaton and the NTPD automaton.
class TwoStateStrategy {
 public:
  enum class Kind { EV, NTPD };

  // Single-market EV automaton: cooperate at R, defect at P; after a bad
  // signal at R switch to P with eps_r; after a good signal at P switch back
  // with eps_p.
  static TwoStateStrategy ev(const GameParams&, EVParams pars) {
    detail::check_prob(pars.eps_r, "R after bad signal");
    detail::check_prob(pars.eps_p, "P after good signal");
    TwoStateStrategy st(MarketStructure(1, 0), Kind::EV);
    st.eps_r_ = pars.eps_r;
    st.eps_p_ = pars.eps_p;
    return st;
  }

  // NTPD automaton: cooperate everywhere at R; at P cooperate on A and defect
  // on B. Switch probabilities depend on the signal vector only through
  // (all-bad-in-A, #bad in B) at R and (all-good-in-B, #bad in A) at P.
  // Every branch probability is validated; out-of-range parameters are an
  // error, never clamped.
  static TwoStateStrategy ntpd(const GameParams&, const MarketStructure& ms,
                               NTPDParams pars) {
    ms.require_partition();
    ms.require_enumerable();
    const double e = pars.eps, h = pars.eps_hat;
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument("NTPD: eps out of [0,1]");
    if (!(h >= 0.0 && h <= 1.0))
      throw std::invalid_argument("NTPD: eps_hat out of [0,1]");
    // Extremes over k of each branch.
    detail::check_prob(1.0 - ms.m_b * h, "R, all of A bad, no bad in B");
    detail::check_prob(ms.m_b * h, "R, some good in A, all of B bad");
    detail::check_prob(e + h * (1.0 - e) * ms.m_a, "P, all of B good, no bad in A");
    detail::check_prob(e - h * e * ms.m_a, "P, all of B good, all of A bad");
    detail::check_prob(ms.m_a * h, "P, some bad in B, no bad in A");
    TwoStateStrategy st(ms, Kind::NTPD);
    st.eps_ = e;
    st.eps_hat_ = h;
    return st;
  }

  Kind kind() const { return kind_; }
  const MarketStructure& structure() const { return ms_; }
  static State initial_state() { return State::R; }

  // Prescribed action vector (bit set = D).
  uint32_t action_mask(State st) const {
    if (kind_ == Kind::EV) return st == State::R ? 0u : 1u;
    return st == State::R ? 0u : ms_.b_mask();
  }

  // Probability of switching to the other state after observing the bad-signal
  // pattern `bad_mask`.
  double switch_prob(State st, uint32_t bad_mask) const {
    if (kind_ == Kind::EV) {
      bool bad = bad_mask & 1u;
      return st == State::R ? (bad ? eps_r_ : 0.0) : (bad ? 0.0 : eps_p_);
    }
    const uint32_t a = ms_.a_mask(), b = ms_.b_mask();
    if (st == State::R) {
      int k = std::popcount(bad_mask & b);
      if ((bad_mask & a) == a) return 1.0 - (ms_.m_b - k) * eps_hat_;
      return k * eps_hat_;
    }
    int k = std::popcount(bad_mask & a);
    if ((bad_mask & b) == 0u)
      return eps_ + eps_hat_ * ((1.0 - eps_) * ms_.m_a - k);
    return (ms_.m_a - k) * eps_hat_;
  }

  double eps() const { return eps_; }
  double eps_hat() const { return eps_hat_; }
  double eps_r() const { return eps_r_; }
  double eps_p() const { return eps_p_; }

 private:
  TwoStateStrategy(MarketStructure ms, Kind k) : ms_(ms), kind_(k) {}
  MarketStructure ms_;
  Kind kind_;
  double eps_ = 0, eps_hat_ = 0;   // NTPD
  double eps_r_ = 0, eps_p_ = 0;   // EV
};

inline TwoStateStrategy make_ev(const GameParams& gp, EVParams pars) {
  return TwoStateStrategy::ev(gp, pars);
}

inline TwoStateStrategy make_ntpd(const GameParams& gp, const MarketStructure& ms,
                                  NTPDParams pars) {
  return TwoStateStrategy::ntpd(gp, ms, pars);
}

// M independent copies of the single-market EV automaton. The product machine
// has 2^M states but its payoff factorizes, so it is kept as per-market
// automata: bit m of a state mask is market m's state (set = P).
class EvProductStrategy {
 public:
  EvProductStrategy(const GameParams& gp, EVParams pars, int markets)
      : markets_(markets), pars_(pars) {
    if (markets < 1)
      throw std::invalid_argument("EvProductStrategy: M must be >= 1");
    MarketStructure(markets, 0).require_enumerable();
    detail::check_prob(pars.eps_r, "R after bad signal");
    detail::check_prob(pars.eps_p, "P after good signal");
    (void)gp;
  }

  int markets() const { return markets_; }
  EVParams params() const { return pars_; }

  // Bit m set = market m at P = defect there.
  uint32_t action_mask(uint32_t state_mask) const { return state_mask; }

  // Per-market switch probability given that market's state bit and signal.
  double market_switch_prob(int state_bit, int bad_bit) const {
    return state_bit ? (bad_bit ? 0.0 : pars_.eps_p)
                     : (bad_bit ? pars_.eps_r : 0.0);
  }

  // Probability that the joint state moves from `state_mask` to `next_mask`
  // after observing `bad_mask`; markets transition independently.
  double joint_transition_prob(uint32_t state_mask, uint32_t bad_mask,
                               uint32_t next_mask) const {
    double prob = 1.0;
    for (int m = 0; m < markets_; ++m) {
      double sw = market_switch_prob((state_mask >> m) & 1u, (bad_mask >> m) & 1u);
      bool switched = ((state_mask ^ next_mask) >> m) & 1u;
      prob *= switched ? sw : 1.0 - sw;
    }
    return prob;
  }

 private:
  int markets_;
  EVParams pars_;
};

inline EvProductStrategy make_ev_independent(const GameParams& gp, EVParams pars,
                                             int markets) {
  return EvProductStrategy(gp, pars, markets);
}

}  // namespace mmc
