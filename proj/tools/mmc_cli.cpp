// Command-line driver for parameter sweeps, figure reproduction,
// certification reports, Monte Carlo cross-checks and LP payoff bounds.
//
// Exit codes: 0 success, 1 invalid spec, 2 I/O failure, 3 dimension cap
// exceeded.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "mmc/errors.hpp"
#include "mmc/svg.hpp"
#include "mmc/sweep.hpp"

namespace {

struct CliOptions {
  mmc::SweepSpec spec;
  std::string strategy = "ntpd";
  std::string out_json;
  std::string config_path;
  CLI::App* cmd = nullptr;
};

void add_common(CLI::App* cmd, CliOptions& o) {
  o.cmd = cmd;
  cmd->add_option("--p-start", o.spec.p_start, "grid start for p");
  cmd->add_option("--p-stop", o.spec.p_stop, "grid stop for p");
  cmd->add_option("--p-step", o.spec.p_step, "grid step for p");
  cmd->add_option("--delta", o.spec.deltas, "discount factor(s)");
  cmd->add_option("--x", o.spec.x, "gain from unilateral defection");
  cmd->add_option("--y", o.spec.y, "loss from being defected on");
  cmd->add_option("--markets", o.spec.markets, "number of markets M");
  cmd->add_option("--ma", o.spec.ma, "size of market set A");
  cmd->add_option("--seed", o.spec.seed, "master RNG seed");
  cmd->add_option("--replications", o.spec.replications, "Monte Carlo replications");
  cmd->add_option("--m-cap", o.spec.m_cap, "LP dimension cap on M");
  cmd->add_option("--out", o.spec.out_csv, "output CSV path");
  cmd->add_option("--out-svg", o.spec.out_svg, "output SVG path");
  cmd->add_option("--config", o.config_path,
                  "key=value spec file mirroring the sweep fields (flags win)");
}

// Flag names that shadow each spec-file key; a key is skipped when its flag
// was given explicitly.
const std::map<std::string, std::string> kKeyToFlag = {
    {"p_start", "--p-start"},   {"p_stop", "--p-stop"},
    {"p_step", "--p-step"},     {"delta", "--delta"},
    {"x", "--x"},               {"y", "--y"},
    {"markets", "--markets"},   {"ma", "--ma"},
    {"m_cap", "--m-cap"},       {"seed", "--seed"},
    {"replications", "--replications"},
    {"truncation_tol", ""},     {"conforming", "--conforming"},
    {"out", "--out"},           {"out_svg", "--out-svg"},
    {"markets_list", "--markets-list"},
    {"strategy", "--strategy"}, {"out_json", "--out-json"}};

void apply_config(CliOptions& o) {
  if (o.config_path.empty()) return;
  for (const auto& [key, value] : mmc::parse_kv_file(o.config_path)) {
    auto known = kKeyToFlag.find(key);
    if (known == kKeyToFlag.end())
      throw std::invalid_argument("spec file: unknown key '" + key + "'");
    const std::string& flag = known->second;
    if (!flag.empty() && o.cmd->get_option_no_throw(flag) &&
        o.cmd->count(flag) > 0)
      continue;  // explicit flag wins over the file
    if (mmc::apply_spec_key(o.spec, key, value)) continue;
    if (key == "strategy")
      o.strategy = value;
    else if (key == "out_json")
      o.out_json = value;
  }
}

int dispatch(const std::string& mode, CliOptions& o) {
  using namespace mmc;
  apply_config(o);
  if (mode == "figure3") {
    o.spec.mode = SweepMode::payoffs;
    if (o.spec.out_csv.empty()) o.spec.out_csv = "figure3.csv";
    if (o.spec.out_svg.empty()) o.spec.out_svg = "figure3.svg";
    FigureOutput fig = run_figure3(o.spec);
    write_output_files(fig, o.spec);
    std::cerr << "figure3: " << fig.rows.size() << " rows -> " << o.spec.out_csv
              << ", " << o.spec.out_svg << "\n";
  } else if (mode == "figure4") {
    o.spec.mode = SweepMode::efficiency;
    if (o.spec.markets_list.empty() && o.spec.markets == 6 && o.spec.ma == 3)
      o.spec.markets_list = {2, 4, 6};
    if (o.spec.out_csv.empty()) o.spec.out_csv = "figure4.csv";
    if (o.spec.out_svg.empty()) o.spec.out_svg = "figure4.svg";
    FigureOutput fig = run_figure4(o.spec);
    write_output_files(fig, o.spec);
    std::cerr << "figure4: " << fig.rows.size() << " rows -> " << o.spec.out_csv
              << ", " << o.spec.out_svg << "\n";
  } else if (mode == "certify") {
    o.spec.mode = SweepMode::certify;
    std::string text = run_certify_json(o.spec);
    if (o.out_json.empty()) o.out_json = "certify.json";
    write_text_file(o.out_json, text);
    std::cerr << "certify -> " << o.out_json << "\n";
  } else if (mode == "simulate") {
    o.spec.mode = SweepMode::montecarlo;
    if (o.spec.out_csv.empty()) o.spec.out_csv = "simulate.csv";
    FigureOutput fig = run_montecarlo(o.spec, o.strategy);
    write_output_files(fig, o.spec);
    std::cerr << "simulate: " << fig.rows.size() << " rows -> " << o.spec.out_csv << "\n";
  } else if (mode == "bound") {
    o.spec.mode = SweepMode::efficiency;
    if (o.spec.out_csv.empty()) o.spec.out_csv = "bound.csv";
    FigureOutput fig = run_bound(o.spec);
    write_output_files(fig, o.spec);
    std::cerr << "bound: " << fig.rows.size() << " rows -> " << o.spec.out_csv << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"belief-free equilibrium analysis of repeated multimarket prisoner's dilemmas"};
  app.require_subcommand(1);

  CliOptions fig3, fig4, cert, sim, bnd;
  auto* c3 = app.add_subcommand("figure3", "per-market equilibrium payoffs of EV and NTPD");
  add_common(c3, fig3);
  c3->add_option("--markets-list", fig3.spec.markets_list, "market counts (unused here)")
      ->group("");

  auto* c4 = app.add_subcommand("figure4", "NTPD efficiency against the LP payoff bound");
  add_common(c4, fig4);
  c4->add_option("--markets-list", fig4.spec.markets_list,
                 "market counts, each with ma = m/2 (default 2 4 6)");

  auto* cc = app.add_subcommand("certify", "equilibrium certification reports (JSON)");
  add_common(cc, cert);
  cc->add_option("--out-json", cert.out_json, "output JSON path");

  auto* cs = app.add_subcommand("simulate", "Monte Carlo cross-check at one point");
  add_common(cs, sim);
  cs->add_option("--strategy", sim.strategy, "ev or ntpd");
  cs->add_flag("--conforming", sim.spec.conforming,
               "let player 1's automaton move (default pins her action)");

  auto* cb = app.add_subcommand("bound", "LP payoff upper bound over the p grid");
  add_common(cb, bnd);

  // Per-subcommand defaults (the bound variables keep their addresses).
  fig3.spec = mmc::SweepSpec::figure3_defaults();
  fig4.spec = mmc::SweepSpec::figure4_defaults();
  fig4.spec.markets_list.clear();  // restored in dispatch unless overridden
  sim.spec.p_stop = sim.spec.p_start = 0.74;
  sim.spec.deltas = {0.7};
  cert.spec.deltas = {0.7};
  bnd.spec.deltas = {0.8};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c3->parsed()) return dispatch("figure3", fig3);
    if (c4->parsed()) return dispatch("figure4", fig4);
    if (cc->parsed()) return dispatch("certify", cert);
    if (cs->parsed()) return dispatch("simulate", sim);
    if (cb->parsed()) return dispatch("bound", bnd);
  } catch (const mmc::DimensionCap& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mmc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
