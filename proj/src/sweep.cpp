#include "mmc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mmc/equilibrium.hpp"
#include "mmc/errors.hpp"
#include "mmc/lp.hpp"
#include "mmc/simulate.hpp"
#include "mmc/svg.hpp"
#include "mmc/value.hpp"

namespace mmc {

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

namespace {

std::string opt_num(const std::optional<double>& v) {
  return v ? format_g12(*v) : std::string();
}

std::string opt_bool(const std::optional<bool>& v) {
  return v ? (*v ? "true" : "false") : std::string();
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\n";
}

// Grid points evaluated concurrently; results land in input order.
template <typename Fn>
void parallel_index_for(size_t count, Fn&& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  size_t workers = std::min<size_t>(count, hw ? hw : 1);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futs;
  futs.reserve(workers);
  for (size_t t = 0; t < workers; ++t)
    futs.push_back(std::async(std::launch::async, [&, t] {
      for (size_t i = t; i < count; i += workers) fn(i);
    }));
  for (auto& f : futs) f.get();
}

}  // namespace

std::vector<double> SweepSpec::p_grid() const {
  long long n = std::llround((p_stop - p_start) / p_step);
  std::vector<double> grid;
  for (long long i = 0; i <= n; ++i) {
    double p = p_start + static_cast<double>(i) * p_step;
    if (p > p_stop + 0.25 * p_step) break;
    grid.push_back(p);
  }
  return grid;
}

void SweepSpec::validate() const {
  if (!(p_step > 0)) throw std::invalid_argument("spec: p_step must be > 0");
  // p_start > p_stop is an empty grid, which is fine.
  if (!(p_start > 0.5 && p_stop < 1.0))
    throw std::invalid_argument("spec: p grid must lie inside (1/2, 1)");
  if (!(x > 0 && y > 0 && 1 > x - y))
    throw std::invalid_argument("spec: stage payoffs must satisfy x > 0, y > 0, 1 > x - y");
  if (deltas.empty()) throw std::invalid_argument("spec: at least one delta required");
  for (double d : deltas)
    if (!(d > 0 && d < 1)) throw std::invalid_argument("spec: delta must lie in (0, 1)");
  if (markets < 1) throw std::invalid_argument("spec: markets must be >= 1");
  auto check_partition = [](int m, int m_a) {
    if (m < 2 || m_a < 1 || m_a >= m)
      throw std::invalid_argument("spec: NTPD needs markets >= 2 and 1 <= ma < markets");
  };
  if (mode != SweepMode::montecarlo || markets_list.empty()) {
    if (mode != SweepMode::montecarlo) check_partition(markets, ma);
  }
  for (int m : markets_list) {
    if (m % 2 != 0)
      throw std::invalid_argument("spec: markets_list entries must be even (ma = m/2)");
    check_partition(m, m / 2);
  }
  if (replications < 1) throw std::invalid_argument("spec: replications must be >= 1");
  if (p_grid().size() > 200000) throw std::invalid_argument("spec: grid too large");
}

SweepSpec SweepSpec::figure3_defaults() {
  SweepSpec s;
  s.mode = SweepMode::payoffs;
  s.p_start = 0.51;
  s.p_stop = 0.99;
  s.p_step = 0.01;
  s.deltas = {0.7, 0.8, 0.9};
  s.x = s.y = 0.1;
  s.markets = 6;
  s.ma = 3;
  return s;
}

SweepSpec SweepSpec::figure4_defaults() {
  SweepSpec s;
  s.mode = SweepMode::efficiency;
  s.p_start = 0.51;
  s.p_stop = 0.99;
  s.p_step = 0.01;
  s.deltas = {0.8};
  s.x = s.y = 0.1;
  s.markets = 6;
  s.ma = 3;
  s.markets_list = {2, 4, 6};
  return s;
}

static std::string spec_comment(const SweepSpec& spec, const std::string& mode) {
  std::ostringstream os;
  os << "# mode=" << mode << " p_step=" << format_g12(spec.p_step)
     << " p_start=" << format_g12(spec.p_start) << " p_stop=" << format_g12(spec.p_stop)
     << " x=" << format_g12(spec.x) << " y=" << format_g12(spec.y);
  return os.str();
}

FigureOutput run_figure3(const SweepSpec& spec) {
  spec.validate();
  FigureOutput out;
  const MarketStructure ms(spec.markets, spec.ma);
  const auto grid = spec.p_grid();

  for (double delta : spec.deltas) {
    for (double p : grid) {
      GameParams gp(spec.x, spec.y, p, delta);

      SweepRow ev;
      ev.p = p;
      ev.delta = delta;
      ev.strategy = "EV";
      ev.markets = spec.markets;
      ev.ma = spec.ma;
      auto evc = check_ev_condition(gp);
      ev.cond1_slack = evc.slack;
      ev.is_equilibrium = evc.holds;
      if (evc.holds) {
        ev.per_market_payoff = ev_closed_payoff(gp);
        EVParams pars = ev_transition_solve(gp);
        ev.eps = pars.eps_r;
        ev.eps_hat = pars.eps_p;
      }
      out.rows.push_back(std::move(ev));

      SweepRow nt;
      nt.p = p;
      nt.delta = delta;
      nt.strategy = "NTPD";
      nt.markets = spec.markets;
      nt.ma = spec.ma;
      auto conds = check_ntpdM_conditions(gp, ms);
      nt.cond1_slack = conds.first.slack;
      nt.cond2_slack = conds.second.slack;
      nt.is_equilibrium = conds.first.holds && conds.second.holds;
      if (*nt.is_equilibrium) {
        ClosedForms cf = ntpdM_closed_forms(gp, ms);
        nt.per_market_payoff = cf.v_r / spec.markets;
        nt.eps = cf.eps;
        nt.eps_hat = cf.eps_hat;
      }
      out.rows.push_back(std::move(nt));
    }
  }

  std::ostringstream csv;
  csv << spec_comment(spec, "figure3") << " markets=" << spec.markets
      << " ma=" << spec.ma << "\n";
  csv << "p,delta,strategy,per_market_payoff,is_equilibrium,eps,eps_hat,"
         "cond1_slack,cond2_slack\n";
  for (const auto& r : out.rows)
    csv << join({format_g12(r.p), format_g12(r.delta), r.strategy,
                 opt_num(r.per_market_payoff), opt_bool(r.is_equilibrium),
                 opt_num(r.eps), opt_num(r.eps_hat), opt_num(r.cond1_slack),
                 opt_num(r.cond2_slack)});
  out.csv = csv.str();

  std::vector<PlotSeries> series;
  PlotSeries evs;
  evs.label = "EV (delta=" + format_g12(spec.deltas.front()) + ")";
  for (const auto& r : out.rows)
    if (r.strategy == "EV" && r.delta == spec.deltas.front() && r.per_market_payoff)
      evs.points.push_back({r.p, *r.per_market_payoff});
  series.push_back(std::move(evs));
  for (double delta : spec.deltas) {
    PlotSeries sr;
    sr.label = "NTPD (delta=" + format_g12(delta) + ")";
    for (const auto& r : out.rows)
      if (r.strategy == "NTPD" && r.delta == delta && r.per_market_payoff)
        sr.points.push_back({r.p, *r.per_market_payoff});
    series.push_back(std::move(sr));
  }
  out.svg = render_line_plot("Per-market equilibrium payoffs", "signal correctness p",
                             "average payoff per market", series, 1.5 * spec.p_step);
  return out;
}

FigureOutput run_figure4(const SweepSpec& spec) {
  spec.validate();
  FigureOutput out;
  const auto grid = spec.p_grid();
  std::vector<int> markets = spec.markets_list;
  if (markets.empty()) markets = {spec.markets};

  struct Point {
    double delta, p;
    int m, m_a;
  };
  std::vector<Point> points;
  for (double delta : spec.deltas)
    for (int m : markets) {
      int m_a = spec.markets_list.empty() ? spec.ma : m / 2;
      for (double p : grid) points.push_back({delta, p, m, m_a});
    }

  std::vector<SweepRow> rows(points.size());
  parallel_index_for(points.size(), [&](size_t i) {
    const Point& pt = points[i];
    GameParams gp(spec.x, spec.y, pt.p, pt.delta);
    MarketStructure ms(pt.m, pt.m_a);
    SweepRow row;
    row.p = pt.p;
    row.delta = pt.delta;
    row.strategy = "NTPD";
    row.markets = pt.m;
    row.ma = pt.m_a;
    auto conds = check_ntpdM_conditions(gp, ms);
    bool eq = conds.first.holds && conds.second.holds;
    if (eq) {
      EquilibriumReport rep = certify_ntpd(gp, ms);
      eq = rep.certified;
      if (rep.certified) {
        BoundOptions opt;
        opt.m_cap = spec.m_cap;
        opt.feasible_hint = rep.forms.v_r;
        BoundResult bound =
            upper_bound(rep.forms.v_p, gp, ms, ntpd_prescriptions(ms), opt);
        if (bound.found) {
          row.total_payoff = rep.forms.v_r;
          row.lp_upper_bound = bound.v_star;
          row.efficiency_ratio = rep.forms.v_r / bound.v_star;
        }
      }
    }
    row.is_equilibrium = eq;
    rows[i] = std::move(row);
  });
  out.rows = std::move(rows);

  std::ostringstream csv;
  csv << spec_comment(spec, "figure4") << " m_cap=" << spec.m_cap << "\n";
  csv << "p,delta,M,M_A,ntpd_payoff,lp_upper_bound,efficiency,is_equilibrium\n";
  for (const auto& r : out.rows)
    csv << join({format_g12(r.p), format_g12(r.delta), std::to_string(r.markets),
                 std::to_string(r.ma), opt_num(r.total_payoff),
                 opt_num(r.lp_upper_bound), opt_num(r.efficiency_ratio),
                 opt_bool(r.is_equilibrium)});
  out.csv = csv.str();

  std::vector<PlotSeries> series;
  for (double delta : spec.deltas)
    for (int m : markets) {
      PlotSeries sr;
      sr.label = "M=" + std::to_string(m) + " (delta=" + format_g12(delta) + ")";
      for (const auto& r : out.rows)
        if (r.markets == m && r.delta == delta && r.efficiency_ratio)
          sr.points.push_back({r.p, *r.efficiency_ratio});
      series.push_back(std::move(sr));
    }
  out.svg = render_line_plot("NTPD efficiency against the payoff bound",
                             "signal correctness p", "efficiency", series,
                             1.5 * spec.p_step);
  return out;
}

std::string run_certify_json(const SweepSpec& spec) {
  spec.validate();
  using json = nlohmann::ordered_json;
  json arr = json::array();
  MarketStructure ms(spec.markets, spec.ma);
  for (double delta : spec.deltas) {
    for (double p : spec.p_grid()) {
      GameParams gp(spec.x, spec.y, p, delta);
      EquilibriumReport rep = certify_ntpd(gp, ms);
      json obj;
      obj["p"] = p;
      obj["delta"] = delta;
      obj["x"] = spec.x;
      obj["y"] = spec.y;
      obj["markets"] = spec.markets;
      obj["ma"] = spec.ma;
      obj["conditions"] = {
          {"ev", {{"holds", rep.ev_condition.holds}, {"slack", rep.ev_condition.slack}}},
          {"ntpd_first",
           {{"holds", rep.conditions.first.holds}, {"slack", rep.conditions.first.slack}}},
          {"ntpd_second",
           {{"holds", rep.conditions.second.holds}, {"slack", rep.conditions.second.slack}}}};
      if (rep.ntpd2_condition)
        obj["conditions"]["ntpd_two_market"] = {{"holds", rep.ntpd2_condition->holds},
                                                {"slack", rep.ntpd2_condition->slack}};
      obj["constructible"] = rep.constructible;
      if (!rep.constructible) {
        obj["construction_error"] = rep.construction_error;
      } else {
        obj["eps"] = rep.forms.eps;
        obj["eps_hat"] = rep.forms.eps_hat;
        obj["v_r"] = rep.forms.v_r;
        obj["v_p"] = rep.forms.v_p;
        obj["value_matrix"] = {{"v_rr", rep.values.v_rr},
                               {"v_rp", rep.values.v_rp},
                               {"v_pr", rep.values.v_pr},
                               {"v_pp", rep.values.v_pp}};
        obj["identity_r"] = rep.identity_r;
        obj["identity_p"] = rep.identity_p;
        json margins = json::array();
        for (const auto& mr : rep.margins)
          margins.push_back({{"d_a", mr.dev.d_a},
                             {"d_b", mr.dev.d_b},
                             {"opp_state", to_string(mr.dev.opp_state)},
                             {"margin", mr.margin}});
        obj["deviation_margins"] = margins;
        obj["min_margin"] = rep.min_margin;
        if (rep.class_equivalence_checked) {
          obj["class_equivalence_ok"] = rep.class_equivalence_ok;
          obj["class_equivalence_err"] = rep.class_equivalence_err;
        }
      }
      obj["certified"] = rep.certified;
      obj["certificate_scope"] =
          "one-shot deviations followed by conformity; the belief-free "
          "indifference identities extend optimality to arbitrary "
          "continuation strategies, including infinite-state ones";
      arr.push_back(std::move(obj));
    }
  }
  return arr.dump(2) + "\n";
}

FigureOutput run_montecarlo(const SweepSpec& spec, const std::string& strategy_name) {
  spec.validate();
  FigureOutput out;
  const double p = spec.p_start, delta = spec.deltas.front();
  GameParams gp(spec.x, spec.y, p, delta);

  StrategyPlayer p1 = StrategyPlayer::two_state(TwoStateStrategy::ev(gp, {0, 0}));
  ValueMatrix vm{};
  MarketStructure ms(spec.markets, std::min(spec.ma, spec.markets - 1));
  double scale = 1.0;
  std::optional<TwoStateStrategy> strategy;
  if (strategy_name == "ntpd") {
    ms = MarketStructure(spec.markets, spec.ma);
    ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
    strategy = make_ntpd(gp, ms, NTPDParams{cf.eps, cf.eps_hat});
    vm = solve_value_equations(gp, ms, *strategy);
    p1 = StrategyPlayer::two_state(*strategy);
  } else if (strategy_name == "ev") {
    EVParams pars = ev_transition_solve(gp);
    vm = solve_value_equations(gp, MarketStructure(1, 0), TwoStateStrategy::ev(gp, pars));
    scale = spec.markets;
    ms = MarketStructure(spec.markets, 0);
    p1 = StrategyPlayer::ev_product(gp, pars, spec.markets);
  } else {
    throw std::invalid_argument("simulate: strategy must be 'ev' or 'ntpd'");
  }

  const State starts[4][2] = {{State::R, State::R},
                              {State::R, State::P},
                              {State::P, State::R},
                              {State::P, State::P}};
  const double analytic[4] = {vm.v_rr * scale, vm.v_rp * scale, vm.v_pr * scale,
                              vm.v_pp * scale};
  for (int i = 0; i < 4; ++i) {
    SimConfig cfg;
    cfg.replications = spec.replications;
    uint64_t mixed = spec.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    cfg.seed = splitmix64(mixed);
    cfg.start1 = starts[i][0];
    cfg.start2 = starts[i][1];
    cfg.truncation_tol = spec.truncation_tol;
    if (!spec.conforming) cfg.pin_player1 = starts[i][0];
    SimResult res = simulate(gp, ms, p1, p1, cfg);

    SweepRow row;
    row.p = p;
    row.delta = delta;
    row.strategy = strategy_name == "ev" ? "EV" : "NTPD";
    row.markets = spec.markets;
    row.ma = strategy_name == "ev" ? 0 : spec.ma;
    row.start_states = std::string(to_string(starts[i][0])) + to_string(starts[i][1]);
    row.mc_mean = res.mean_payoff;
    row.mc_std_error = res.std_error;
    row.analytic_value = analytic[i];
    row.occ_rr = res.state_occupancy[0];
    row.occ_rp = res.state_occupancy[1];
    row.occ_pr = res.state_occupancy[2];
    row.occ_pp = res.state_occupancy[3];
    row.horizon = static_cast<double>(res.horizon);
    out.rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << spec_comment(spec, "montecarlo") << " markets=" << spec.markets
      << " ma=" << spec.ma << " strategy=" << strategy_name
      << " replications=" << spec.replications << " seed=" << spec.seed
      << " pinned=" << (spec.conforming ? "false" : "true") << "\n";
  csv << "p,delta,strategy,start_states,mean_payoff,std_error,analytic_value,"
         "occ_rr,occ_rp,occ_pr,occ_pp,horizon\n";
  for (const auto& r : out.rows)
    csv << join({format_g12(r.p), format_g12(r.delta), r.strategy, r.start_states,
                 opt_num(r.mc_mean), opt_num(r.mc_std_error), opt_num(r.analytic_value),
                 opt_num(r.occ_rr), opt_num(r.occ_rp), opt_num(r.occ_pr),
                 opt_num(r.occ_pp), opt_num(r.horizon)});
  out.csv = csv.str();
  return out;
}

FigureOutput run_bound(const SweepSpec& spec) {
  spec.validate();
  FigureOutput out;
  MarketStructure ms(spec.markets, spec.ma);
  for (double delta : spec.deltas) {
    for (double p : spec.p_grid()) {
      GameParams gp(spec.x, spec.y, p, delta);
      ClosedForms cf = ntpdM_closed_forms_unchecked(gp, ms);
      BoundOptions opt;
      opt.m_cap = spec.m_cap;
      opt.feasible_hint = cf.v_r;
      BoundResult bound = upper_bound(cf.v_p, gp, ms, ntpd_prescriptions(ms), opt);
      SweepRow row;
      row.p = p;
      row.delta = delta;
      row.strategy = "NTPD";
      row.markets = spec.markets;
      row.ma = spec.ma;
      row.analytic_value = cf.v_p;
      if (bound.found) {
        row.lp_upper_bound = bound.v_star;
        row.total_payoff = cf.v_r;
        row.efficiency_ratio = cf.v_r / bound.v_star;
      }
      out.rows.push_back(std::move(row));
    }
  }
  std::ostringstream csv;
  csv << spec_comment(spec, "bound") << " markets=" << spec.markets
      << " ma=" << spec.ma << " m_cap=" << spec.m_cap << "\n";
  csv << "p,delta,M,M_A,v_p,ntpd_v_r,lp_upper_bound,efficiency\n";
  for (const auto& r : out.rows)
    csv << join({format_g12(r.p), format_g12(r.delta), std::to_string(r.markets),
                 std::to_string(r.ma), opt_num(r.analytic_value),
                 opt_num(r.total_payoff), opt_num(r.lp_upper_bound),
                 opt_num(r.efficiency_ratio)});
  out.csv = csv.str();
  return out;
}

void write_output_files(const FigureOutput& fig, const SweepSpec& spec) {
  if (!spec.out_csv.empty()) write_text_file(spec.out_csv, fig.csv);
  if (!spec.out_svg.empty() && !fig.svg.empty()) write_text_file(spec.out_svg, fig.svg);
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("spec file: bad number for " + key + ": '" + v + "'");
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read spec file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("spec file: line " + std::to_string(lineno) +
                                  " is not key=value");
    entries.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return entries;
}

bool apply_spec_key(SweepSpec& spec, const std::string& key, const std::string& value) {
  if (key == "p_start") spec.p_start = parse_double(key, value);
  else if (key == "p_stop") spec.p_stop = parse_double(key, value);
  else if (key == "p_step") spec.p_step = parse_double(key, value);
  else if (key == "x") spec.x = parse_double(key, value);
  else if (key == "y") spec.y = parse_double(key, value);
  else if (key == "markets") spec.markets = static_cast<int>(parse_double(key, value));
  else if (key == "ma") spec.ma = static_cast<int>(parse_double(key, value));
  else if (key == "m_cap") spec.m_cap = static_cast<int>(parse_double(key, value));
  else if (key == "seed") spec.seed = static_cast<uint64_t>(parse_double(key, value));
  else if (key == "replications") spec.replications = static_cast<long>(parse_double(key, value));
  else if (key == "truncation_tol") spec.truncation_tol = parse_double(key, value);
  else if (key == "conforming") spec.conforming = (value == "true" || value == "1");
  else if (key == "out") spec.out_csv = value;
  else if (key == "out_svg") spec.out_svg = value;
  else if (key == "delta") {
    spec.deltas.clear();
    for (const auto& tok : split_list(value)) spec.deltas.push_back(parse_double(key, tok));
  } else if (key == "markets_list") {
    spec.markets_list.clear();
    for (const auto& tok : split_list(value))
      spec.markets_list.push_back(static_cast<int>(parse_double(key, tok)));
  } else {
    return false;
  }
  return true;
}

}  // namespace mmc
