#include "mmc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmc/equilibrium.hpp"
#include "mmc/errors.hpp"
#include "mmc/value.hpp"

namespace mmc {

bool phase1_feasible(const SimplexProblem& prob, SimplexStats* stats,
                     double pivot_tol, double feas_tol) {
  const size_t m = prob.rows, n0 = prob.cols;

  // Count auxiliary columns: rows are normalized to b >= 0 first; <= rows get
  // a slack, flipped <= rows (now >=) get surplus + artificial, = rows get an
  // artificial.
  size_t n_slack = 0, n_art = 0;
  std::vector<int> kind(m);  // 0: LE, 1: GE (flipped LE), 2: EQ
  for (size_t r = 0; r < m; ++r) {
    bool neg = prob.b[r] < 0.0;
    if (prob.sense[r] == RowSense::EQ) {
      kind[r] = 2;
      ++n_art;
    } else if (!neg) {
      kind[r] = 0;
      ++n_slack;
    } else {
      kind[r] = 1;
      ++n_slack;
      ++n_art;
    }
  }

  const size_t n = n0 + n_slack + n_art;
  const size_t w = n + 1;  // + rhs
  std::vector<double> tab(m * w, 0.0);
  std::vector<size_t> basis(m);
  std::vector<double> obj(w, 0.0);
  const size_t art0 = n0 + n_slack;

  size_t slack_at = n0, art_at = art0;
  for (size_t r = 0; r < m; ++r) {
    const double sgn = prob.b[r] < 0.0 ? -1.0 : 1.0;
    for (size_t c = 0; c < n0; ++c) tab[r * w + c] = sgn * prob.at(r, c);
    tab[r * w + n] = sgn * prob.b[r];
    if (kind[r] == 0) {
      tab[r * w + slack_at] = 1.0;
      basis[r] = slack_at++;
    } else if (kind[r] == 1) {
      tab[r * w + slack_at] = -1.0;  // surplus
      ++slack_at;
      tab[r * w + art_at] = 1.0;
      basis[r] = art_at++;
    } else {
      tab[r * w + art_at] = 1.0;
      basis[r] = art_at++;
    }
  }

  // Reduced costs of min(sum of artificials): subtract every artificial row.
  for (size_t r = 0; r < m; ++r) {
    if (basis[r] >= art0) {
      for (size_t c = 0; c < w; ++c) obj[c] -= tab[r * w + c];
      obj[basis[r]] += 1.0;  // its own cost coefficient
    }
  }

  if (stats) {
    stats->rows = m;
    stats->cols = n;
  }

  const long long pivot_cap = 400000;
  long long pivots = 0;
  while (true) {
    // Bland: smallest-index entering column with negative reduced cost.
    // Artificial columns never re-enter (their columns may be dropped once
    // they leave the basis without changing the auxiliary optimum).
    size_t enter = n;
    for (size_t c = 0; c < art0; ++c) {
      if (obj[c] < -pivot_tol) {
        enter = c;
        break;
      }
    }
    if (enter == n) break;

    size_t leave = m;
    double best = 0.0;
    for (size_t r = 0; r < m; ++r) {
      double coef = tab[r * w + enter];
      if (coef > pivot_tol) {
        double ratio = tab[r * w + n] / coef;
        if (leave == m || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == m)
      throw std::runtime_error("phase1_feasible: auxiliary objective unbounded");

    double piv = tab[leave * w + enter];
    double* lr = &tab[leave * w];
    for (size_t c = 0; c < w; ++c) lr[c] /= piv;
    for (size_t r = 0; r < m; ++r) {
      if (r == leave) continue;
      double f = tab[r * w + enter];
      if (std::abs(f) <= 1e-14) continue;
      double* rr = &tab[r * w];
      for (size_t c = 0; c < w; ++c) rr[c] -= f * lr[c];
    }
    double f = obj[enter];
    if (std::abs(f) > 0.0)
      for (size_t c = 0; c < w; ++c) obj[c] -= f * lr[c];
    basis[leave] = enter;

    if (++pivots > pivot_cap)
      throw std::runtime_error("phase1_feasible: pivot cap exceeded");
  }

  if (stats) stats->pivots += pivots;
  double infeas = 0.0;
  for (size_t r = 0; r < m; ++r)
    if (basis[r] >= art0) infeas += tab[r * w + n];
  return infeas <= feas_tol;
}

LPInstance::LPInstance(const GameParams& gp, const MarketStructure& ms, double v_p,
                       double v, Prescriptions pres)
    : gp_(gp), ms_(ms), v_p_(v_p), v_(v), pres_(pres), n_(1 << ms.m) {
  if (!(v_p <= v))
    throw std::invalid_argument("LPInstance: requires V_P <= v");
}

LPAudit LPInstance::audit() const {
  LPAudit a{};
  a.alpha_vars = n_;
  a.w_vars = static_cast<long long>(n_) * n_;
  a.incentive_rows = n_;
  a.equality_rows = 2;
  a.band_rows = 2ll * n_ * n_;
  a.simplex_rows = 1;
  return a;
}

double LPInstance::stage_payoff(uint32_t a_i, uint32_t a_j) const {
  return stage_payoff_vector(gp_, a_i, a_j, ms_.m);
}

double LPInstance::signal_prob(uint32_t a_i, uint32_t omega) const {
  return signal_vector_prob(gp_, a_i, omega, ms_.m);
}

double LPInstance::incentive_value(uint32_t a_i, const std::vector<double>& alpha,
                                   const std::vector<double>& t_cont) const {
  double g = 0.0, cont = 0.0;
  for (int a = 0; a < n_; ++a) g += alpha[static_cast<size_t>(a)] * stage_payoff(a_i, a);
  for (int o = 0; o < n_; ++o) cont += signal_prob(a_i, o) * t_cont[static_cast<size_t>(o)];
  return (1.0 - gp_.delta) * g + gp_.delta * cont;
}

SimplexProblem LPInstance::full_problem() const {
  if (ms_.m > 5)
    throw std::invalid_argument("LPInstance::full_problem: dense materialization is quadratic in 4^M; use the reduced problem");
  const size_t n = static_cast<size_t>(n_);
  const size_t nw = n * n;
  SimplexProblem prob;
  prob.init(n + 2 * nw + 1, n + nw);
  size_t row = 0;
  // Incentive rows, equalities at the prescribed actions.
  for (size_t ai = 0; ai < n; ++ai, ++row) {
    for (size_t a = 0; a < n; ++a)
      prob.at(row, a) = (1.0 - gp_.delta) * stage_payoff(ai, a);
    for (size_t a = 0; a < n; ++a)
      for (size_t o = 0; o < n; ++o)
        prob.at(row, n + a * n + o) = gp_.delta * signal_prob(ai, o);
    prob.b[row] = v_;
    prob.sense[row] =
        (ai == pres_.f_r || ai == pres_.f_p) ? RowSense::EQ : RowSense::LE;
  }
  // Band rows: w <= v alpha and V_P alpha <= w.
  for (size_t a = 0; a < n; ++a)
    for (size_t o = 0; o < n; ++o, ++row) {
      prob.at(row, n + a * n + o) = 1.0;
      prob.at(row, a) = -v_;
    }
  for (size_t a = 0; a < n; ++a)
    for (size_t o = 0; o < n; ++o, ++row) {
      prob.at(row, a) = v_p_;
      prob.at(row, n + a * n + o) = -1.0;
    }
  // Simplex row.
  for (size_t a = 0; a < n; ++a) prob.at(row, a) = 1.0;
  prob.b[row] = 1.0;
  prob.sense[row] = RowSense::EQ;
  return prob;
}

SimplexProblem LPInstance::reduced_problem() const {
  const size_t n = static_cast<size_t>(n_);
  SimplexProblem prob;
  prob.init(n + n + 1, 2 * n);
  const double scale = v_ - v_p_;
  size_t row = 0;
  for (size_t ai = 0; ai < n; ++ai, ++row) {
    for (size_t a = 0; a < n; ++a)
      prob.at(row, a) = (1.0 - gp_.delta) * stage_payoff(ai, a);
    for (size_t o = 0; o < n; ++o)
      prob.at(row, n + o) = gp_.delta * scale * signal_prob(ai, o);
    prob.b[row] = v_ - gp_.delta * v_p_;
    prob.sense[row] =
        (ai == pres_.f_r || ai == pres_.f_p) ? RowSense::EQ : RowSense::LE;
  }
  for (size_t o = 0; o < n; ++o, ++row) {
    prob.at(row, n + o) = 1.0;
    prob.b[row] = 1.0;
  }
  for (size_t a = 0; a < n; ++a) prob.at(row, a) = 1.0;
  prob.b[row] = 1.0;
  prob.sense[row] = RowSense::EQ;
  return prob;
}

FeasibleResult feasible_at(double v, double v_p, const GameParams& gp,
                           const MarketStructure& ms, Prescriptions pres,
                           int m_cap) {
  if (ms.m > m_cap)
    throw DimensionCap("feasible_at: M = " + std::to_string(ms.m) +
                       " exceeds the cap of " + std::to_string(m_cap));
  LPInstance inst(gp, ms, v_p, v, pres);
  FeasibleResult res;
  res.feasible = phase1_feasible(inst.reduced_problem(), &res.stats);
  return res;
}

BoundResult upper_bound(double v_p, const GameParams& gp, const MarketStructure& ms,
                        Prescriptions pres, const BoundOptions& opt) {
  BoundResult out;
  const double hi0 = ms.m * (1.0 + gp.x);
  auto probe = [&](double v) {
    auto r = feasible_at(v, v_p, gp, ms, pres, opt.m_cap);
    out.lp_stats.pivots += r.stats.pivots;
    out.lp_stats.rows = std::max(out.lp_stats.rows, r.stats.rows);
    out.lp_stats.cols = std::max(out.lp_stats.cols, r.stats.cols);
    return r.feasible;
  };

  out.upper_bracket_infeasible = !probe(hi0);
  if (!out.upper_bracket_infeasible) {
    // Cannot happen for v above the maximal discounted payoff; reported anyway.
    out.found = true;
    out.v_star = hi0;
    return out;
  }

  double lo = v_p;
  out.lower_bracket_feasible = probe(v_p);
  if (!out.lower_bracket_feasible) {
    bool seeded = false;
    if (opt.feasible_hint && *opt.feasible_hint > v_p && *opt.feasible_hint < hi0 &&
        probe(*opt.feasible_hint)) {
      lo = *opt.feasible_hint;
      seeded = true;
    }
    if (!seeded) {
      for (int k = 1; k < 64 && !seeded; ++k) {
        double cand = v_p + (hi0 - v_p) * k / 64.0;
        if (probe(cand)) {
          lo = cand;
          seeded = true;
        }
      }
    }
    if (!seeded) return out;  // found == false
  }

  double hi = hi0;
  while (hi - lo > opt.tol) {
    double mid = 0.5 * (lo + hi);
    if (probe(mid))
      lo = mid;
    else
      hi = mid;
    ++out.iterations;
  }
  out.found = true;
  out.v_star = lo;
  return out;
}

double efficiency(const GameParams& gp, const MarketStructure& ms, int m_cap) {
  EquilibriumReport rep = certify_ntpd(gp, ms);
  if (!rep.certified)
    throw NotAnEquilibrium("efficiency: NTPD is not a certified equilibrium at these parameters");
  BoundOptions opt;
  opt.m_cap = m_cap;
  opt.feasible_hint = rep.forms.v_r;
  BoundResult bound = upper_bound(rep.forms.v_p, gp, ms, ntpd_prescriptions(ms), opt);
  if (!bound.found)
    throw std::runtime_error("efficiency: no feasible value located for the bound");
  return rep.forms.v_r / bound.v_star;
}

}  // namespace mmc
