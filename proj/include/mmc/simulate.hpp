#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmc/equilibrium.hpp"
#include "mmc/game.hpp"
#include "mmc/rng.hpp"
#include "mmc/strategy.hpp"

namespace mmc {

// A player's runtime automaton state: either a two-state strategy shared by
// all markets, or independent per-market EV automata.
class StrategyPlayer {
 public:
  static StrategyPlayer two_state(const TwoStateStrategy& st);
  static StrategyPlayer ev_product(const GameParams& gp, EVParams pars, int markets);

  int markets() const { return markets_; }
  void reset(State start);
  uint32_t actions() const;
  // Per-market state bits (set = P); a shared two-state automaton reports all
  // markets at its single state.
  uint32_t state_mask() const;
  void step(uint32_t bad_mask, Xoshiro256& rng);

 private:
  StrategyPlayer() = default;
  bool product_ = false;
  int markets_ = 1;
  std::optional<TwoStateStrategy> two_state_;
  std::optional<EvProductStrategy> ev_;
  State state_ = State::R;       // shared-automaton state
  uint32_t state_bits_ = 0;      // per-market states for the product machine
};

struct SimConfig {
  int horizon = 0;               // T; 0 means derive from truncation_tol
  long replications = 100000;
  uint64_t seed = 1;
  State start1 = State::R, start2 = State::R;
  double truncation_tol = 1e-4;  // bound on delta^T M/(1-delta)
  // When set, player 1 repeats the action prescribed at this state every
  // period (her automaton never moves). This matches the constant-action
  // definition of the continuation payoffs V_{s1 s2}, which differs from
  // conforming play when the pair is not belief-free.
  std::optional<State> pin_player1;
  int threads = 0;               // 0 = hardware default
};

struct SimResult {
  double mean_payoff = 0.0;   // player 1's normalized discounted average
  double std_error = 0.0;
  std::array<double, 4> state_occupancy{};  // joint (s1,s2): RR, RP, PR, PP
  int horizon = 0;
  long replications = 0;
};

// Smallest horizon T with delta^T M/(1-delta) <= tol.
int horizon_for_tolerance(const GameParams&, int markets, double tol);

// Plays the two automata against each other for `config.replications`
// independent runs of `horizon` periods. Per period and market the signal
// pair is drawn from the joint distribution given current actions, expected
// stage payoffs are accrued with weight (1-delta) delta^t, and both automata
// transition on their own signals. Reproducible given the seed; replications
// use independent streams and are reduced in index order.
SimResult simulate(const GameParams&, const MarketStructure&,
                   const StrategyPlayer& p1, const StrategyPlayer& p2,
                   const SimConfig&);

// Player 1 plays the deviating vector of `dev` in period 0 and conforms
// thereafter; the opponent starts at dev.opp_state. Estimates V(d_a, d_b, s).
SimResult simulate_unilateral(const GameParams&, const MarketStructure&,
                              const TwoStateStrategy&, DeviationClass dev,
                              const SimConfig&);

namespace detail {
// Single replication payoff; exposed so tests can verify stream independence.
double run_replication(const GameParams&, const MarketStructure&, StrategyPlayer p1,
                       StrategyPlayer p2, const SimConfig&, int horizon,
                       uint64_t rep_index, std::optional<uint32_t> first_period_mask,
                       std::array<long long, 4>* occupancy);
}  // namespace detail

}  // namespace mmc
