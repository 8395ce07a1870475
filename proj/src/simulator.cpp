#include "tcbind/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

#include "tcbind/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tcbind::sim {

namespace {

// Rebalancing smaller than this fraction of the position is roundoff.
constexpr double kTradeNoise = 1e-12;

double liquidation_value(double phi0, double safe, double phi, double ask, double eps) {
  return phi0 * safe + (phi > 0.0 ? (1.0 - eps) * ask * phi : ask * phi);
}

std::mt19937_64 path_engine(std::uint64_t seed, std::size_t path) {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::size_t validate(const SimConfig& config) {
  if (!(config.dt > 0.0) || !(config.horizon_years > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "dt and horizon must be positive");
  }
  const double ratio = config.horizon_years / config.dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio) || steps < 1.0) {
    std::ostringstream os;
    os << "horizon/dt = " << ratio << " is not an integer";
    throw Error(ErrorKind::InvalidParameter, os.str());
  }
  if (config.n_paths < 1) throw Error(ErrorKind::InvalidParameter, "n_paths must be >= 1");
  if (!(config.reflection_tolerance >= 0.0) || !(config.constraint_tolerance >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "tolerances must be nonnegative");
  }
  return static_cast<std::size_t>(steps);
}

PathModel::PathModel(const MarketSpec& spec, const GapSolution& gap)
    : spec_(spec),
      gap_(gap),
      w_(spec, gap.lambda),
      log_drift_(spec.mu() - 0.5 * spec.variance()),
      shadow_pi_max_(derive(spec).shadow_pi_max) {
  if (gap.lambda <= 0.0) {
    throw Error(ErrorKind::InvalidParameter, "simulation needs a positive gap (epsilon > 0)");
  }
}

double initial_y(const Endowment& e, const GapSolution& gap) {
  const double risky = e.risky_units * e.ask_price;
  const double wealth = e.safe_units + risky;
  if (!(e.ask_price > 0.0) || !(wealth > 0.0)) {
    throw Error(ErrorKind::NonpositiveWealth, "initial wealth at the ask must be positive");
  }
  const double weight = risky / wealth;
  if (weight <= gap.pi_minus) return 0.0;
  if (weight >= gap.pi_plus) return gap.log_ul;
  return std::log(risky / (e.safe_units * gap.l));
}

InitialPosition initial_position(const Endowment& e, const PathModel& model) {
  const GapSolution& gap = model.gap();
  const double eps = model.spec().epsilon();
  InitialPosition p;
  p.y = initial_y(e, gap);
  p.phi = e.risky_units;
  p.phi0 = e.safe_units;
  if (liquidation_value(p.phi0, 1.0, p.phi, e.ask_price, eps) <= 0.0) {
    throw Error(ErrorKind::NonpositiveWealth, "initial liquidation value must be positive");
  }
  const double x = p.phi * e.ask_price;
  const double c = p.phi0;
  if (p.y == 0.0) {
    const double value = (gap.l * c - x) / (1.0 + gap.l);
    if (value > 0.0) {
      p.bought = value / e.ask_price;
      p.phi += p.bought;
      p.phi0 -= value;
    }
  } else if (p.y == gap.log_ul) {
    const double value = (x - gap.u * c) / (1.0 + gap.u * (1.0 - eps));
    if (value > 0.0) {
      p.sold = value / e.ask_price;
      p.phi -= p.sold;
      p.phi0 += (1.0 - eps) * value;
    }
  }
  return p;
}

StepResult step(const PathState& state, const StepNoise& noise, double dt,
                const PathModel& model, ReflectionScheme scheme) {
  const double sigma = model.spec().sigma();
  const double root_dt = std::sqrt(dt);
  const double increment = model.log_drift() * dt + sigma * root_dt * noise.gaussian;
  const double lo = model.lower();
  const double hi = model.upper();

  StepResult out{state, {}};
  double y = state.y + increment;
  Reflection& push = out.reflection;

  if (scheme == ReflectionScheme::BridgeExtremum && increment != 0.0) {
    // Extremum of the bridge from 0 to `increment` with variance sigma^2 dt.
    const double spread = std::sqrt(increment * increment -
                                    2.0 * sigma * sigma * dt * std::log(noise.uniform));
    if (state.y - lo <= hi - state.y) {
      const double path_min = 0.5 * (increment - spread);
      push.lower = std::max(0.0, lo - (state.y + path_min));
    } else {
      const double path_max = 0.5 * (increment + spread);
      push.upper = std::max(0.0, state.y + path_max - hi);
    }
    y += push.lower - push.upper;
  }
  if (y < lo) {
    push.lower += lo - y;
    y = lo;
  } else if (y > hi) {
    push.upper += y - hi;
    y = hi;
  }

  PathState& s = out.state;
  s.y = y;
  s.local_lower += push.lower;
  s.local_upper += push.upper;
  s.t = state.t + dt;
  const double r = model.spec().r();
  s.ask = state.ask * std::exp(increment + r * dt);
  s.safe_price = std::exp(r * s.t);
  return out;
}

double shadow_price(const PathState& state, const PathModel& model) {
  const double w = model.w().value(state.y);
  return state.ask * w / (model.gap().l * std::exp(state.y) * (1.0 - w));
}

StrategyResult evolve_strategy(const PathState& state, const Reflection& reflection,
                               const PathModel& model) {
  StrategyResult out{state, {}};
  const double eps = model.spec().epsilon();
  const double x = state.phi * state.ask;
  const double c = state.phi0 * state.safe_price;
  const double target = model.gap().l * std::exp(state.y);
  const double threshold = kTradeNoise * std::abs(state.phi);

  const double buy_push = model.buy_barrier_is_lower() ? reflection.lower : reflection.upper;
  const double sell_push = model.buy_barrier_is_lower() ? reflection.upper : reflection.lower;

  PathState& s = out.state;
  TradeRecord& trade = out.trade;
  const double buy_value = (target * c - x) / (1.0 + target);
  if (buy_value / state.ask > threshold) {
    trade.bought = buy_value / state.ask;
    trade.share_turnover = trade.bought / std::abs(state.phi);
    trade.wealth_turnover = buy_value / (c + x);
    trade.localized = buy_push > 0.0;
    s.phi += trade.bought;
    s.phi0 -= buy_value / state.safe_price;
    s.bought_shares += trade.bought;
  } else {
    const double sell_value = (x - target * c) / (1.0 + target * (1.0 - eps));
    if (sell_value / state.ask > threshold) {
      trade.sold = sell_value / state.ask;
      trade.share_turnover = trade.sold / std::abs(state.phi);
      trade.wealth_turnover = (1.0 - eps) * sell_value / (c + (1.0 - eps) * x);
      trade.localized = sell_push > 0.0;
      s.phi -= trade.sold;
      s.phi0 += (1.0 - eps) * sell_value / state.safe_price;
      s.sold_shares += trade.sold;
    }
  }
  s.share_turnover_integral += trade.share_turnover;
  s.wealth_turnover_integral += trade.wealth_turnover;
  return out;
}

PathSummary simulate_path(const PathModel& model, const SimConfig& config,
                          std::size_t path_index, const TraceSink* sink,
                          std::size_t trace_stride) {
  const std::size_t n_steps = validate(config);
  const double dt = config.horizon_years / static_cast<double>(n_steps);
  const double eps = model.spec().epsilon();
  const double pi_max = model.spec().pi_max();

  auto rng = path_engine(config.seed, path_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const InitialPosition init = initial_position(config.endowment, model);
  PathState state;
  state.y = init.y;
  state.ask = config.endowment.ask_price;
  state.safe_price = 1.0;
  state.phi = init.phi;
  state.phi0 = init.phi0;
  state.shadow = shadow_price(state, model);

  PathSummary summary;
  summary.initial_bought = init.bought;
  summary.initial_sold = init.sold;
  const double initial_wealth = liquidation_value(
      config.endowment.safe_units, 1.0, config.endowment.risky_units,
      config.endowment.ask_price, eps);

  if (sink && trace_stride > 0) (*sink)(state);

  for (std::size_t k = 0; k < n_steps; ++k) {
    StepNoise noise;
    noise.gaussian = normal(rng);
    if (config.scheme == ReflectionScheme::BridgeExtremum) {
      noise.uniform = 1.0 - uniform(rng);
      if (noise.uniform <= 0.0) noise.uniform = std::numeric_limits<double>::min();
    }

    const StepResult moved = step(state, noise, dt, model, config.scheme);
    const StrategyResult traded = evolve_strategy(moved.state, moved.reflection, model);
    state = traded.state;
    state.shadow = shadow_price(state, model);

    if (moved.reflection.lower > 0.0 || moved.reflection.upper > 0.0) ++summary.reflection_steps;
    const double volume = traded.trade.share_turnover;
    if (volume > 0.0) {
      ++summary.trade_steps;
      summary.traded_share_ratio += volume;
      if (!traded.trade.localized) summary.mislocalized_share_ratio += volume;
    }

    const double ratio = state.shadow / state.ask;
    const double spread_excess = std::max({ratio - 1.0, (1.0 - eps) - ratio, 0.0});
    summary.max_spread_excess = std::max(summary.max_spread_excess, spread_excess);
    if (spread_excess > config.reflection_tolerance) ++summary.spread_violations;

    const double x = state.phi * state.ask;
    const double c = state.phi0 * state.safe_price;
    const double shadow_x = state.phi * state.shadow;
    const double weight_excess =
        std::max(shadow_x / (c + shadow_x) - model.shadow_pi_max(), x / (c + x) - pi_max);
    summary.max_weight_excess = std::max(summary.max_weight_excess, weight_excess);
    if (weight_excess > config.constraint_tolerance) ++summary.constraint_violations;

    if (!std::isfinite(state.phi) || !std::isfinite(state.phi0) || !std::isfinite(state.ask) ||
        !std::isfinite(state.shadow)) {
      summary.finite = false;
      break;
    }
    if (sink && trace_stride > 0 && (k + 1) % trace_stride == 0) (*sink)(state);
  }

  const double horizon = dt * static_cast<double>(n_steps);
  summary.sht = state.share_turnover_integral / horizon;
  summary.wet = state.wealth_turnover_integral / horizon;
  summary.local_lower = state.local_lower;
  summary.local_upper = state.local_upper;
  const double terminal =
      liquidation_value(state.phi0, state.safe_price, state.phi, state.ask, eps);
  summary.log_growth = std::log(terminal / initial_wealth) / horizon;
  return summary;
}

namespace {

Estimate estimate(const std::vector<PathSummary>& paths, double PathSummary::*field) {
  const double n = static_cast<double>(paths.size());
  double sum = 0.0;
  for (const auto& p : paths) sum += p.*field;
  Estimate e;
  e.mean = sum / n;
  if (paths.size() < 2) {
    e.std_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (const auto& p : paths) ss += (p.*field - e.mean) * (p.*field - e.mean);
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

void check_integrity(const SimulationResult& r, const SimConfig& config) {
  if (config.fail_on_violation && (r.spread_violations > 0 || r.constraint_violations > 0)) {
    std::ostringstream os;
    os << r.spread_violations << " spread violations (max excess " << r.max_spread_excess
       << "), " << r.constraint_violations << " constraint violations (max excess "
       << r.max_weight_excess << ")";
    throw Error(ErrorKind::SpreadViolation, os.str());
  }
}

}  // namespace

SimulationResult aggregate(std::vector<PathSummary> paths, std::size_t n_steps) {
  SimulationResult r;
  r.n_paths = paths.size();
  r.n_steps = n_steps;
  double traded = 0.0;
  double mislocalized = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const PathSummary& p = paths[i];
    if (!p.finite) {
      std::ostringstream os;
      os << "non-finite state on path " << i;
      throw Error(ErrorKind::NumericalBlowup, os.str());
    }
    r.spread_violations += p.spread_violations;
    r.constraint_violations += p.constraint_violations;
    r.max_spread_excess = std::max(r.max_spread_excess, p.max_spread_excess);
    r.max_weight_excess = std::max(r.max_weight_excess, p.max_weight_excess);
    traded += p.traded_share_ratio;
    mislocalized += p.mislocalized_share_ratio;
  }
  r.mislocalized_trade_fraction = traded > 0.0 ? mislocalized / traded : 0.0;
  r.sht = estimate(paths, &PathSummary::sht);
  r.wet = estimate(paths, &PathSummary::wet);
  r.log_growth = estimate(paths, &PathSummary::log_growth);
  r.paths = std::move(paths);
  return r;
}

SimulationResult run_serial(const MarketSpec& spec, const GapSolution& gap,
                            const SimConfig& config) {
  const std::size_t n_steps = validate(config);
  const PathModel model(spec, gap);
  std::vector<PathSummary> paths(config.n_paths);
  for (std::size_t i = 0; i < config.n_paths; ++i) paths[i] = simulate_path(model, config, i);
  SimulationResult r = aggregate(std::move(paths), n_steps);
  check_integrity(r, config);
  return r;
}

SimulationResult run(const MarketSpec& spec, const GapSolution& gap, const SimConfig& config) {
  const std::size_t n_steps = validate(config);
  const PathModel model(spec, gap);
  const auto n = static_cast<std::ptrdiff_t>(config.n_paths);
  std::vector<PathSummary> paths(config.n_paths);
  std::vector<std::exception_ptr> errors(config.n_paths);

#ifdef _OPENMP
  const int workers = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      paths[idx] = simulate_path(model, config, idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  SimulationResult r = aggregate(std::move(paths), n_steps);
  check_integrity(r, config);
  return r;
}

bool parallel_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace tcbind::sim
