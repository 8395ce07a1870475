#include "tcbind/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcbind/analytics.hpp"
#include "tcbind/applications.hpp"
#include "tcbind/gap_solver.hpp"
#include "tcbind/model.hpp"
#include "tcbind/simulator.hpp"

#ifndef TCBIND_VERSION
#define TCBIND_VERSION "0.0.0"
#endif

namespace tcbind::cli {

namespace {

using json = nlohmann::ordered_json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "command", "mu",          "sigma",       "r",          "gamma",       "epsilon",
      "pi_max",  "mu_bar",      "esr",         "r_old",      "pi_max_old",  "pi_max_new",
      "horizon", "dt",          "paths",       "seed",       "scheme",      "safe_units",
      "risky_units", "ask_price", "trace_stride", "eps_grid", "pi_max_grid"};
  return keys;
}

Error invalid(const std::string& what) { return Error(ErrorKind::InvalidParameter, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw invalid(key + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw invalid(key + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t to_count(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw invalid(key + ": not a nonnegative integer: '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw invalid(key + ": out of range: '" + text + "'");
  }
}

std::string num(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Shortest representation that reads back to the same double.
std::string exact(double v) {
  for (int digits = 15; digits < 17; ++digits) {
    const std::string s = num(v, digits);
    if (std::strtod(s.c_str(), nullptr) == v) return s;
  }
  return num(v, 17);
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

json json_num(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

// Resolved parameters in echo order.
class Params {
 public:
  explicit Params(ParamMap raw) : raw_(std::move(raw)) {}

  bool has(const std::string& k) const { return raw_.count(k) > 0; }
  void set(const std::string& k, const std::string& v) { raw_[k] = v; }

  double real(const std::string& k) {
    auto it = raw_.find(k);
    if (it == raw_.end()) throw invalid("missing parameter '" + k + "'");
    const double v = to_double(k, trim(it->second));
    echo(k, exact(v));
    return v;
  }
  double real(const std::string& k, double fallback) {
    if (!has(k)) {
      echo(k, exact(fallback));
      return fallback;
    }
    return real(k);
  }
  std::uint64_t count(const std::string& k, std::uint64_t fallback) {
    const std::uint64_t v = has(k) ? to_count(k, trim(raw_.at(k))) : fallback;
    echo(k, std::to_string(v));
    return v;
  }
  std::string text(const std::string& k, const std::string& fallback) {
    const std::string v = has(k) ? trim(raw_.at(k)) : fallback;
    echo(k, v);
    return v;
  }

  const std::vector<std::pair<std::string, std::string>>& echoed() const { return echo_; }

 private:
  void echo(const std::string& k, const std::string& v) {
    for (auto& e : echo_) {
      if (e.first == k) {
        e.second = v;
        return;
      }
    }
    echo_.emplace_back(k, v);
  }

  ParamMap raw_;
  std::vector<std::pair<std::string, std::string>> echo_;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  Table table;
  json extra = json::object();
};

void write_csv(std::ostream& os, const Report& r) {
  os << "# tcbind " << version() << "\n";
  os << "# command=" << r.command << "\n";
  for (const auto& [k, v] : r.params) os << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) {
    os << (i ? "," : "") << r.table.columns[i];
  }
  os << "\n";
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

void write_json(std::ostream& os, const Report& r) {
  json doc;
  doc["tool"] = "tcbind";
  doc["version"] = version();
  doc["command"] = r.command;
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  doc["params"] = params;
  json rows = json::array();
  for (const auto& row : r.table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string& cell = row[i];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (!cell.empty() && end == cell.c_str() + cell.size() && std::isfinite(v)) {
        obj[r.table.columns[i]] = v;
      } else {
        obj[r.table.columns[i]] = cell;
      }
    }
    rows.push_back(obj);
  }
  doc["rows"] = rows;
  for (const auto& [k, v] : r.extra.items()) doc[k] = v;
  os << doc.dump(2) << "\n";
}

MarketSpec market_from(Params& p) {
  MarketParams m;
  m.mu = p.real("mu");
  m.sigma = p.real("sigma");
  m.r = p.real("r", 0.0);
  m.gamma = p.real("gamma");
  m.epsilon = p.real("epsilon", 0.0);
  m.pi_max = p.real("pi_max");
  return MarketSpec(m);
}

apps::MarketContext context_from(Params& p) {
  apps::MarketContext c;
  c.mu_bar = p.real("mu_bar");
  c.sigma = p.real("sigma");
  c.gamma = p.real("gamma");
  c.epsilon = p.real("epsilon", 0.0);
  return c;
}

Report cmd_solve(Params& p) {
  const MarketSpec spec = market_from(p);
  const GapSolution g = solve_gap(spec);
  const FrictionAnalytics a = analyze(spec, g);
  const AsymptoticAnalytics s = asymptotics(spec);

  Report r;
  r.table.columns = {"quantity", "exact", "leading"};
  auto row = [&](const std::string& name, double ex, std::optional<double> lead) {
    r.table.rows.push_back({name, num(ex), lead ? num(*lead) : ""});
  };
  row("lambda", g.lambda, s.lambda);
  row("pi_minus", g.pi_minus, s.pi_minus);
  row("pi_plus", g.pi_plus, std::nullopt);
  row("w_plus", g.w_plus, std::nullopt);
  row("l", g.l, std::nullopt);
  row("u", g.u, std::nullopt);
  row("log_ul", g.log_ul, std::nullopt);
  row("beta", g.beta, std::nullopt);
  row("esr", a.esr, s.esr);
  row("esr_frictionless", a.esr_frictionless_constrained, s.esr_frictionless);
  row("lip", a.lip, s.lip);
  row("lip_c", a.lip_c, s.lip_c);
  row("lip_t", a.lip_t, s.lip_t);
  row("sht", a.sht, s.sht);
  row("wet", a.wet, s.wet);
  row("mismatch", g.mismatch_at_root, std::nullopt);
  row("iterations", static_cast<double>(g.iterations), std::nullopt);
  r.table.rows.push_back({"branch", std::string(riccati::to_string(g.branch)), ""});
  return r;
}

Report cmd_sweep(Params& p) {
  MarketParams base;
  base.mu = p.real("mu");
  base.sigma = p.real("sigma");
  base.r = p.real("r", 0.0);
  base.gamma = p.real("gamma");
  const std::vector<double> eps = parse_eps_grid(p.text("eps_grid", "1e-4:1e-1:7"));
  std::vector<double> caps;
  if (p.has("pi_max_grid")) {
    caps = parse_list(p.text("pi_max_grid", ""));
  } else {
    caps = {p.real("pi_max")};
  }

  Report r;
  r.table.columns = {"pi_max",  "epsilon", "status",      "lambda",      "lambda_leading",
                     "width",   "width_leading", "sht",   "sht_leading", "wet",
                     "wet_leading", "lip", "lip_leading", "lip_t",       "lip_t_leading",
                     "esr",     "esr_leading"};
  const std::size_t n = caps.size() * eps.size();
  r.table.rows.resize(n);
  const auto total = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    MarketParams m = base;
    m.pi_max = caps[idx / eps.size()];
    m.epsilon = eps[idx % eps.size()];
    std::vector<std::string>& row = r.table.rows[idx];
    row = {num(m.pi_max), num(m.epsilon)};
    try {
      const MarketSpec spec(m);
      const GapSolution g = solve_gap(spec);
      const FrictionAnalytics a = analyze(spec, g);
      const AsymptoticAnalytics s = asymptotics(spec);
      const double width_leading = s.pi_minus_coefficient * std::sqrt(m.epsilon);
      for (double v : {g.lambda, s.lambda, g.pi_plus - g.pi_minus, width_leading, a.sht, s.sht,
                       a.wet, s.wet, a.lip, s.lip, a.lip_t, s.lip_t, a.esr, s.esr}) {
        row.push_back(num(v));
      }
      row.insert(row.begin() + 2, "ok");
    } catch (const Error& e) {
      row.push_back(std::string(to_string(e.kind())));
      row.resize(r.table.columns.size(), "");
    }
  }
  return r;
}

sim::SimConfig sim_config_from(Params& p) {
  sim::SimConfig c;
  c.horizon_years = p.real("horizon", c.horizon_years);
  c.dt = p.real("dt", c.dt);
  c.n_paths = p.count("paths", c.n_paths);
  c.seed = p.count("seed", c.seed);
  const std::string scheme = p.text("scheme", "bridge");
  if (scheme == "bridge") {
    c.scheme = sim::ReflectionScheme::BridgeExtremum;
  } else if (scheme == "projection") {
    c.scheme = sim::ReflectionScheme::Projection;
  } else {
    throw invalid("scheme must be 'bridge' or 'projection'");
  }
  c.endowment.safe_units = p.real("safe_units", c.endowment.safe_units);
  c.endowment.risky_units = p.real("risky_units", c.endowment.risky_units);
  c.endowment.ask_price = p.real("ask_price", c.endowment.ask_price);
  return c;
}

Report cmd_simulate(Params& p, int threads, const std::string& trace_path) {
  const MarketSpec spec = market_from(p);
  sim::SimConfig cfg = sim_config_from(p);
  cfg.threads = threads;
  const std::size_t stride = p.count("trace_stride", 1000);
  sim::validate(cfg);
  const GapSolution g = solve_gap(spec);
  const sim::SimulationResult res = sim::run(spec, g, cfg);

  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    if (!tf) throw invalid("cannot open trace file " + trace_path);
    tf << "# tcbind " << version() << " trace of path 0\n";
    tf << "t,y,ask,shadow,phi,phi0,local_lower,local_upper\n";
    const sim::PathModel model(spec, g);
    const sim::TraceSink sink = [&tf](const sim::PathState& s) {
      tf << num(s.t) << ',' << num(s.y) << ',' << num(s.ask) << ',' << num(s.shadow) << ','
         << num(s.phi) << ',' << num(s.phi0) << ',' << num(s.local_lower) << ','
         << num(s.local_upper) << '\n';
    };
    sim::simulate_path(model, cfg, 0, &sink, std::max<std::size_t>(stride, 1));
  }

  Report r;
  r.table.columns = {"quantity", "closed_form", "mc_mean", "mc_std_error"};
  const double nan = std::nan("");
  auto row = [&](const std::string& name, double cf, double mean, double se) {
    r.table.rows.push_back({name, std::isnan(cf) ? "" : num(cf), std::isnan(mean) ? "" : num(mean),
                            std::isnan(se) ? "" : num(se)});
  };
  row("sht", share_turnover(spec, g), res.sht.mean, res.sht.std_error);
  row("wet", wealth_turnover(spec, g), res.wet.mean, res.wet.std_error);
  row("log_growth", nan, res.log_growth.mean, res.log_growth.std_error);
  row("spread_violations", nan, static_cast<double>(res.spread_violations), nan);
  row("constraint_violations", nan, static_cast<double>(res.constraint_violations), nan);
  row("max_spread_excess", nan, res.max_spread_excess, nan);
  row("max_weight_excess", nan, res.max_weight_excess, nan);
  row("mislocalized_trade_fraction", nan, res.mislocalized_trade_fraction, nan);
  row("lambda", g.lambda, nan, nan);
  return r;
}

Report cmd_broker(Params& p) {
  const apps::MarketContext ctx = context_from(p);
  std::optional<double> esr;
  if (p.has("esr")) esr = p.real("esr");
  std::vector<double> caps;
  if (p.has("pi_max_grid")) {
    caps = parse_list(p.text("pi_max_grid", ""));
  } else {
    caps = {p.real("pi_max")};
  }
  std::optional<double> fixed_r;
  if (!esr) fixed_r = p.real("r");

  Report r;
  r.table.columns = {"pi_max", "r", "esr_frictionless", "esr_exact", "esr_leading",
                     "loss_leading", "lambda"};
  for (double pm : caps) {
    const double rate =
        fixed_r ? *fixed_r : apps::iso_rate(*esr, pm, ctx.mu_bar, ctx.gamma, ctx.sigma);
    const apps::BrokerEvaluation e = apps::evaluate_broker({rate, pm, ctx});
    r.table.rows.push_back({num(pm), num(rate), num(e.esr_frictionless), num(e.esr_exact),
                            num(e.esr_leading), num(e.esr_frictionless - e.esr_leading),
                            num(e.gap.lambda)});
  }
  if (esr) {
    r.extra["critical_leverage"] = json_num(apps::critical_leverage(*esr, ctx.mu_bar, ctx.gamma,
                                                                    ctx.sigma));
  }
  return r;
}

Report cmd_deposit(Params& p) {
  apps::DepositScenario s;
  s.market = context_from(p);
  s.pi_max_old = p.real("pi_max_old");
  s.pi_max_new = p.real("pi_max_new");
  if (p.has("r_old")) {
    s.r_old = p.real("r_old");
  } else {
    s.r_old = apps::iso_rate(p.real("esr"), s.pi_max_old, s.market.mu_bar, s.market.gamma,
                             s.market.sigma);
  }
  const apps::DepositResult d = apps::deposit_rate(s);
  Report r;
  r.table.columns = {"pi_max_old", "r_old", "pi_max_new", "epsilon", "r_new", "esr_target",
                     "esr_achieved"};
  r.table.rows.push_back({num(s.pi_max_old), num(s.r_old), num(s.pi_max_new),
                          num(s.market.epsilon), num(d.r_new), num(d.esr_target),
                          num(d.esr_achieved)});
  return r;
}

Report cmd_table1() {
  const apps::Table1 t = apps::compute_table1();
  Report r;
  r.table.columns = {"pi_max",       "epsilon",          "r",           "esr",
                     "r_reference",  "esr_reference",    "r_dev_pp",    "esr_dev_pp",
                     "r_display",    "esr_display"};
  for (const auto& c : t.cells) {
    r.table.rows.push_back({num(c.pi_max), num(c.epsilon), num(c.r), num(c.esr),
                            num(c.r_reference), num(c.esr_reference),
                            num(100.0 * (c.r - c.r_reference), 6),
                            num(100.0 * (c.esr - c.esr_reference), 6), percent(c.r),
                            percent(c.esr)});
  }
  r.extra["max_rate_deviation_pp"] = 100.0 * t.max_rate_deviation;
  r.extra["max_esr_deviation_pp"] = 100.0 * t.max_esr_deviation;
  return r;
}

}  // namespace

const char* version() noexcept { return TCBIND_VERSION; }

int exit_code(ErrorKind kind) noexcept {
  switch (classify_error(kind)) {
    case ErrorClass::Validation:
      return kExitValidation;
    case ErrorClass::Solver:
      return kExitSolver;
    case ErrorClass::Simulation:
      return kExitSimulation;
  }
  return kExitSolver;
}

ParamMap parse_params(std::istream& in) {
  ParamMap out;
  std::string line;
  bool header_mode = false;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(line);
    if (body.empty()) continue;
    const bool comment = body[0] == '#';
    if (first) {
      header_mode = body.rfind("# tcbind", 0) == 0;
      first = false;
    }
    if (comment) {
      if (!header_mode) continue;
      body = trim(body.substr(1));
      if (body.find('=') == std::string::npos) continue;
    } else if (header_mode) {
      break;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw invalid("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    if (!known_keys().count(key)) {
      throw invalid("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

std::vector<double> parse_eps_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw invalid("eps grid must look like a:b:n");
  }
  const double a = to_double("eps_grid", trim(spec.substr(0, c1)));
  const double b = to_double("eps_grid", trim(spec.substr(c1 + 1, c2 - c1 - 1)));
  const std::uint64_t n = to_count("eps_grid", trim(spec.substr(c2 + 1)));
  if (!(a > 0.0) || !(b > 0.0) || n < 1) {
    throw invalid("eps grid needs a, b > 0 and n >= 1");
  }
  std::vector<double> out(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  if (n > 1) out.back() = b;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double("list", trim(item)));
  if (out.empty()) throw invalid("empty list");
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Portfolio choice with proportional costs and a leverage cap", "tcbind"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string params_path;
  std::string out_path;
  std::string format = "csv";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<double> dt;
  std::string eps_grid;
  std::string trace_path;
  int threads = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--params", params_path, "key=value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override a parameter, key=value");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* solve = app.add_subcommand("solve", "gap, boundaries, welfare and turnover");
  CLI::App* sweep = app.add_subcommand("sweep", "grid over epsilon and pi_max");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo turnover and integrity");
  CLI::App* broker = app.add_subcommand("broker", "ESR of leveraged broker offers");
  CLI::App* deposit = app.add_subcommand("deposit", "deposit rate for a tighter leverage cap");
  CLI::App* table1 = app.add_subcommand("table1", "deposit-rate table for the reference market");
  for (CLI::App* sub : {solve, sweep, simulate, broker, deposit, table1}) common(sub);
  sweep->add_option("--eps-grid", eps_grid, "a:b:n, log-spaced");
  simulate->add_option("--seed", seed, "base seed");
  simulate->add_option("--paths", paths, "number of paths");
  simulate->add_option("--dt", dt, "time step in years");
  simulate->add_option("--threads", threads, "OpenMP workers (0 = default)");
  simulate->add_option("--trace", trace_path, "write path 0 states to this CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    ParamMap raw;
    if (!params_path.empty()) {
      std::ifstream in(params_path);
      raw = parse_params(in);
    }
    for (const std::string& s : sets) {
      std::istringstream one(s);
      for (const auto& [k, v] : parse_params(one)) raw[k] = v;
    }
    if (raw.count("command") && raw.at("command") != command) {
      throw invalid("parameter file was written by '" + raw.at("command") + "'");
    }
    raw.erase("command");
    Params p(std::move(raw));
    if (seed) p.set("seed", std::to_string(*seed));
    if (paths) p.set("paths", std::to_string(*paths));
    if (dt) p.set("dt", exact(*dt));
    if (!eps_grid.empty()) p.set("eps_grid", eps_grid);

    Report report;
    if (chosen == solve) {
      report = cmd_solve(p);
    } else if (chosen == sweep) {
      report = cmd_sweep(p);
    } else if (chosen == simulate) {
      report = cmd_simulate(p, threads, trace_path);
    } else if (chosen == broker) {
      report = cmd_broker(p);
    } else if (chosen == deposit) {
      report = cmd_deposit(p);
    } else {
      report = cmd_table1();
    }
    report.command = command;
    report.params = p.echoed();

    std::ostringstream buffer;
    if (format == "json") {
      write_json(buffer, report);
    } else {
      write_csv(buffer, report);
    }
    if (out_path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw invalid("cannot open output file " + out_path);
      f << buffer.str();
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace tcbind::cli
