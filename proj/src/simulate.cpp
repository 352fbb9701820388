#include "mmc/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace mmc {

StrategyPlayer StrategyPlayer::two_state(const TwoStateStrategy& st) {
  StrategyPlayer p;
  p.product_ = false;
  p.markets_ = st.structure().m;
  p.two_state_ = st;
  return p;
}

StrategyPlayer StrategyPlayer::ev_product(const GameParams& gp, EVParams pars,
                                          int markets) {
  StrategyPlayer p;
  p.product_ = true;
  p.markets_ = markets;
  p.ev_ = make_ev_independent(gp, pars, markets);
  return p;
}

void StrategyPlayer::reset(State start) {
  state_ = start;
  state_bits_ = start == State::P ? ((markets_ >= 32) ? ~0u : (1u << markets_) - 1u) : 0u;
}

uint32_t StrategyPlayer::actions() const {
  if (product_) return ev_->action_mask(state_bits_);
  return two_state_->action_mask(state_);
}

uint32_t StrategyPlayer::state_mask() const {
  if (product_) return state_bits_;
  return state_ == State::P ? (1u << markets_) - 1u : 0u;
}

void StrategyPlayer::step(uint32_t bad_mask, Xoshiro256& rng) {
  if (product_) {
    for (int m = 0; m < markets_; ++m) {
      double sw = ev_->market_switch_prob((state_bits_ >> m) & 1u, (bad_mask >> m) & 1u);
      double u = rng.uniform();
      if (u < sw) state_bits_ ^= 1u << m;
    }
    return;
  }
  double sw = two_state_->switch_prob(state_, bad_mask);
  if (rng.uniform() < sw) state_ = other(state_);
}

int horizon_for_tolerance(const GameParams& gp, int markets, double tol) {
  int t = 1;
  double tail = gp.delta * markets / (1.0 - gp.delta);
  while (tail > tol) {
    tail *= gp.delta;
    ++t;
    if (t > 100000000) throw std::invalid_argument("horizon_for_tolerance: horizon explodes");
  }
  return t;
}

namespace detail {

double run_replication(const GameParams& gp, const MarketStructure& ms,
                       StrategyPlayer p1, StrategyPlayer p2, const SimConfig& cfg,
                       int horizon, uint64_t rep_index,
                       std::optional<uint32_t> first_period_mask,
                       std::array<long long, 4>* occupancy) {
  Xoshiro256 rng = replication_stream(cfg.seed, rep_index);
  p1.reset(cfg.start1);
  p2.reset(cfg.start2);
  const int m = ms.m;
  const bool pinned = cfg.pin_player1.has_value();
  const uint32_t pinned_mask =
      pinned ? p1.actions() : 0u;  // reset() above already used start1 == pin state

  double payoff = 0.0;
  double weight = 1.0 - gp.delta;
  for (int t = 0; t < horizon; ++t) {
    uint32_t a1 = pinned ? pinned_mask : p1.actions();
    if (t == 0 && first_period_mask) a1 = *first_period_mask;
    const uint32_t a2 = p2.actions();

    if (occupancy) {
      const uint32_t s1 = pinned ? (cfg.start1 == State::P ? ms.all_mask() : 0u)
                                 : p1.state_mask();
      const uint32_t s2 = p2.state_mask();
      for (int k = 0; k < m; ++k)
        ++(*occupancy)[((s1 >> k) & 1u) * 2 + ((s2 >> k) & 1u)];
    }

    payoff += weight * stage_payoff_vector(gp, a1, a2, m);
    weight *= gp.delta;

    // Signals: player 1's reflect a2, player 2's reflect a1. Bad arrives with
    // probability p where the other side defected, s where it cooperated.
    uint32_t bad1 = 0, bad2 = 0;
    for (int k = 0; k < m; ++k) {
      double beta = ((a2 >> k) & 1u) ? gp.p : gp.s;
      if (rng.uniform() < beta) bad1 |= 1u << k;
    }
    for (int k = 0; k < m; ++k) {
      double beta = ((a1 >> k) & 1u) ? gp.p : gp.s;
      if (rng.uniform() < beta) bad2 |= 1u << k;
    }
    if (!pinned) p1.step(bad1, rng);
    p2.step(bad2, rng);
  }
  return payoff;
}

}  // namespace detail

static SimResult run_sim(const GameParams& gp, const MarketStructure& ms,
                         const StrategyPlayer& p1, const StrategyPlayer& p2,
                         const SimConfig& cfg,
                         std::optional<uint32_t> first_period_mask) {
  if (cfg.replications < 1)
    throw std::invalid_argument("simulate: replications must be >= 1");
  if (p1.markets() != ms.m || p2.markets() != ms.m)
    throw std::invalid_argument("simulate: player market count mismatch");
  int horizon = cfg.horizon > 0 ? cfg.horizon
                                : horizon_for_tolerance(gp, ms.m, cfg.truncation_tol);
  const double tail = std::pow(gp.delta, horizon) * ms.m / (1.0 - gp.delta);
  if (tail > cfg.truncation_tol)
    throw std::invalid_argument("simulate: horizon too short for the requested truncation tolerance");

  const long n = cfg.replications;
  std::vector<double> payoffs(static_cast<size_t>(n));

  unsigned hw = std::thread::hardware_concurrency();
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(hw ? hw : 1);
  threads = static_cast<int>(std::min<long>(threads, n));

  std::vector<std::array<long long, 4>> occ(static_cast<size_t>(threads),
                                            std::array<long long, 4>{});
  auto worker = [&](int ti) {
    for (long i = ti; i < n; i += threads)
      payoffs[static_cast<size_t>(i)] = detail::run_replication(
          gp, ms, p1, p2, cfg, horizon, static_cast<uint64_t>(i),
          first_period_mask, &occ[static_cast<size_t>(ti)]);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int ti = 0; ti < threads; ++ti) pool.emplace_back(worker, ti);
    for (auto& th : pool) th.join();
  }

  SimResult res;
  res.horizon = horizon;
  res.replications = n;
  double sum = 0.0;
  for (double v : payoffs) sum += v;
  res.mean_payoff = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : payoffs) ss += (v - res.mean_payoff) * (v - res.mean_payoff);
  res.std_error = n > 1 ? std::sqrt(ss / (static_cast<double>(n) - 1.0) /
                                    static_cast<double>(n))
                        : 0.0;
  // Occupancy counts are integers, so the cross-thread sum is exact and
  // independent of the thread count.
  std::array<long long, 4> total{};
  for (const auto& o : occ)
    for (int k = 0; k < 4; ++k) total[k] += o[k];
  const double denom = static_cast<double>(n) * horizon * ms.m;
  for (int k = 0; k < 4; ++k) res.state_occupancy[k] = total[k] / denom;
  return res;
}

SimResult simulate(const GameParams& gp, const MarketStructure& ms,
                   const StrategyPlayer& p1, const StrategyPlayer& p2,
                   const SimConfig& cfg) {
  SimConfig c = cfg;
  if (c.pin_player1) c.start1 = *c.pin_player1;
  return run_sim(gp, ms, p1, p2, c, std::nullopt);
}

SimResult simulate_unilateral(const GameParams& gp, const MarketStructure& ms,
                              const TwoStateStrategy& st, DeviationClass dev,
                              const SimConfig& cfg) {
  if (dev.d_a < 0 || dev.d_a > ms.m_a || dev.d_b < 0 || dev.d_b > ms.m_b)
    throw std::invalid_argument("simulate_unilateral: deviation counts out of range");
  SimConfig c = cfg;
  c.start2 = dev.opp_state;
  c.pin_player1.reset();
  uint32_t mask = 0;
  for (int i = 0; i < dev.d_a; ++i) mask |= 1u << i;
  for (int i = 0; i < dev.d_b; ++i) mask |= 1u << (ms.m_a + i);
  auto player = StrategyPlayer::two_state(st);
  return run_sim(gp, ms, player, player, c, mask);
}

}  // namespace mmc
