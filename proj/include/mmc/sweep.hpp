#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmc/game.hpp"
#include "mmc/strategy.hpp"

namespace mmc {

enum class SweepMode { payoffs, conditions, efficiency, montecarlo, certify };

// Declarative description of one sweep / figure run. Field names double as
// the keys of the `--config` key-value file.
struct SweepSpec {
  double p_start = 0.51, p_stop = 0.99, p_step = 0.01;
  std::vector<double> deltas = {0.7};
  double x = 0.1, y = 0.1;
  int markets = 6, ma = 3;
  std::vector<int> markets_list;  // per-M curves (figure4); empty = {markets}
  SweepMode mode = SweepMode::payoffs;
  uint64_t seed = 987654321;
  long replications = 100000;
  double truncation_tol = 1e-4;
  int m_cap = 6;
  bool conforming = false;  // Monte Carlo: let player 1's automaton move too
  std::string out_csv, out_svg;

  std::vector<double> p_grid() const;
  void validate() const;  // throws std::invalid_argument on a bad spec

  static SweepSpec figure3_defaults();
  static SweepSpec figure4_defaults();
};

// One record per (grid point x strategy). Missing metrics stay empty in the
// CSV; nothing is fabricated.
struct SweepRow {
  double p = 0.0, delta = 0.0;
  std::string strategy;
  int markets = 0, ma = 0;
  std::optional<double> per_market_payoff;
  std::optional<bool> is_equilibrium;
  std::optional<double> eps, eps_hat;
  std::optional<double> cond1_slack, cond2_slack;
  std::optional<double> total_payoff, lp_upper_bound, efficiency_ratio;
  std::optional<double> mc_mean, mc_std_error, analytic_value;
  std::optional<double> occ_rr, occ_rp, occ_pr, occ_pp;
  std::optional<double> horizon;
  std::string start_states;  // Monte Carlo rows: e.g. "RP"
};

struct FigureOutput {
  std::vector<SweepRow> rows;
  std::string csv;
  std::string svg;
};

// Equilibrium payoffs of EV and NTPD over the p-grid, one pair of rows per
// (delta, p). CSV columns:
//   p, delta, strategy, per_market_payoff, is_equilibrium, eps, eps_hat,
//   cond1_slack, cond2_slack
// For EV rows eps/eps_hat carry (eps_R, eps_P) and cond1_slack the EV
// condition slack; payoffs appear only where the strategy is an equilibrium.
FigureOutput run_figure3(const SweepSpec&);

// NTPD efficiency against the LP payoff bound per market count. CSV columns:
//   p, delta, M, M_A, ntpd_payoff, lp_upper_bound, efficiency, is_equilibrium
FigureOutput run_figure4(const SweepSpec&);

// Machine-readable certification reports (JSON array, one object per grid
// point, including every deviation margin).
std::string run_certify_json(const SweepSpec&);

// Monte Carlo cross-check at a single parameter point: one row per start-state
// pair, with the analytic continuation value alongside the estimate.
FigureOutput run_montecarlo(const SweepSpec&, const std::string& strategy_name);

// LP payoff bound over the p-grid (no certification gate).
FigureOutput run_bound(const SweepSpec&);

// Writes csv/svg members to the paths in the spec (empty path = skip).
void write_output_files(const FigureOutput&, const SweepSpec&);

// %.12g rendering used for every CSV number.
std::string format_g12(double v);
std::string csv_field(const std::string& raw);

// Key-value spec file: one `key = value` per line, '#' comments, keys named
// after SweepSpec fields. Returns entries in file order; unknown keys are the
// caller's problem.
std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path);

// Applies one spec-file entry; returns false for keys SweepSpec does not own
// (the CLI layer handles those). Throws std::invalid_argument on bad values.
bool apply_spec_key(SweepSpec&, const std::string& key, const std::string& value);

}  // namespace mmc
