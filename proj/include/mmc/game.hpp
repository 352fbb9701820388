#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmc {

enum class Action : uint8_t { C = 0, D = 1 };
enum class Signal : uint8_t { Good = 0, Bad = 1 };

struct ActionPair {
  Action a1, a2;
};

struct SignalPair {
  Signal w1, w2;
};

// Stage-game and monitoring parameters, shared by every market.
//   x     gain from unilateral defection
//   y     loss from being defected on
//   p     probability that a private signal matches the opponent's action
//   s     error probability, always exactly 1 - p
//   delta discount factor
// Construction rejects anything outside the prisoner's-dilemma region
// (x > 0, y > 0, 1 > x - y), p outside (1/2, 1), and delta outside (0, 1).
// Boundary values are rejected too: several closed forms divide by 2p - 1,
// 1 - delta*p and p^k - s^k.
struct GameParams {
  double x, y, p, s, delta;

  GameParams(double x_, double y_, double p_, double delta_)
      : x(x_), y(y_), p(p_), s(1.0 - p_), delta(delta_) {
    if (!(x > 0.0)) throw std::invalid_argument("GameParams: x must be > 0");
    if (!(y > 0.0)) throw std::invalid_argument("GameParams: y must be > 0");
    if (!(1.0 > x - y))
      throw std::invalid_argument("GameParams: need 1 > x - y");
    if (!(p > 0.5) || !(p < 1.0))
      throw std::invalid_argument("GameParams: p must lie strictly in (1/2, 1)");
    if (!(delta > 0.0) || !(delta < 1.0))
      throw std::invalid_argument("GameParams: delta must lie strictly in (0, 1)");
  }
};

// Marginal probability of observing `own_signal` when the opponent played
// `opponent_action` in that market. The matching signal ((C,g) or (D,b))
// arrives with probability p, the wrong one with probability s.
inline double signal_marginal(const GameParams& gp, Action opponent_action,
                              Signal own_signal) {
  bool right = (opponent_action == Action::C && own_signal == Signal::Good) ||
               (opponent_action == Action::D && own_signal == Signal::Bad);
  return right ? gp.p : gp.s;
}

// Joint distribution of the two private signals in one market, conditionally
// independent given the action pair. Player 1's signal reflects a2, player
// 2's reflects a1.
inline double joint_signal_prob(const GameParams& gp, ActionPair a,
                                SignalPair w) {
  return signal_marginal(gp, a.a2, w.w1) * signal_marginal(gp, a.a1, w.w2);
}

// All four joint signal probabilities, indexed by (w1, w2) with Bad = 1:
// index = w1 + 2*w2.
inline std::array<double, 4> joint_signal_dist(const GameParams& gp,
                                               ActionPair a) {
  std::array<double, 4> out{};
  for (int w1 = 0; w1 < 2; ++w1)
    for (int w2 = 0; w2 < 2; ++w2)
      out[w1 + 2 * w2] = joint_signal_prob(
          gp, a, SignalPair{static_cast<Signal>(w1), static_cast<Signal>(w2)});
  return out;
}

// Expected stage payoff of player 1:  (C,C) -> 1, (C,D) -> -y,
// (D,C) -> 1+x, (D,D) -> 0. Player 2's payoff is the swapped lookup.
inline double expected_stage_payoff(const GameParams& gp, ActionPair a) {
  if (a.a1 == Action::C)
    return a.a2 == Action::C ? 1.0 : -gp.y;
  return a.a2 == Action::C ? 1.0 + gp.x : 0.0;
}

// --- bitmask helpers over M markets ------------------------------------
// Action vectors: bit m set means D in market m. Signal vectors: bit m set
// means a bad signal in market m. Market set A occupies the low bits.

inline double stage_payoff_bit(const GameParams& gp, int own_defects,
                               int opp_defects) {
  if (!own_defects) return opp_defects ? -gp.y : 1.0;
  return opp_defects ? 0.0 : 1.0 + gp.x;
}

// Player 1's expected stage payoff summed over M markets.
inline double stage_payoff_vector(const GameParams& gp, uint32_t own_mask,
                                  uint32_t opp_mask, int markets) {
  double total = 0.0;
  for (int m = 0; m < markets; ++m)
    total += stage_payoff_bit(gp, (own_mask >> m) & 1u, (opp_mask >> m) & 1u);
  return total;
}

// Probability that a player facing action vector `opp_mask` observes exactly
// the bad-signal pattern `bad_mask` over `markets` markets. Signals are
// independent across markets; the bad signal is the right one where the
// opponent defected.
inline double signal_vector_prob(const GameParams& gp, uint32_t opp_mask,
                                 uint32_t bad_mask, int markets) {
  // Right signal <=> bad bit equals defect bit, so mismatches carry s.
  uint32_t all = (markets >= 32) ? 0xffffffffu : ((1u << markets) - 1u);
  int wrong = std::popcount((opp_mask ^ bad_mask) & all);
  double prob = 1.0;
  for (int i = 0; i < wrong; ++i) prob *= gp.s;
  for (int i = 0; i < markets - wrong; ++i) prob *= gp.p;
  return prob;
}

}  // namespace mmc
