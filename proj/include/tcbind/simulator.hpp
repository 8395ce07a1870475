#pragma once

// Monte Carlo check of the closed forms: simulates the doubly reflected log
// stock-cash ratio Y, the shadow price inside the spread, and the optimal
// strategy that trades only when Y sits on a barrier.
//
// `run_serial` is the reference implementation. `run` distributes paths over
// OpenMP threads and must return a bit-identical result for the same seed.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tcbind/gap_solver.hpp"
#include "tcbind/model.hpp"
#include "tcbind/riccati.hpp"

namespace tcbind::sim {

enum class ReflectionScheme {
  /// Project the Euler endpoint back onto the domain; overshoot is local time.
  Projection,
  /// Apply the Skorokhod map to an exactly sampled Brownian-bridge extremum
  /// (nearest barrier), then project. Removes the O(sqrt(dt)) local-time bias
  /// of endpoint projection.
  BridgeExtremum,
};

struct Endowment {
  double safe_units = 1.0;   // xi0, safe price starts at 1
  double risky_units = 0.0;  // xi
  double ask_price = 1.0;    // S_0
};

struct SimConfig {
  double horizon_years = 100.0;
  double dt = 1e-3;
  std::size_t n_paths = 100;
  std::uint64_t seed = 20130601;
  Endowment endowment;
  /// Allowed excursion of S~/S outside [1 - eps, 1].
  double reflection_tolerance = 1e-8;
  /// Allowed excess of the shadow/ask risky weight over its cap.
  double constraint_tolerance = 1e-8;
  ReflectionScheme scheme = ReflectionScheme::BridgeExtremum;
  /// OpenMP worker count for `run`; 0 keeps the runtime default.
  int threads = 0;
  /// Throw SpreadViolation after the run if any path left the spread.
  bool fail_on_violation = true;
};

/// Throws InvalidParameter unless dt > 0, horizon/dt is an integer and n_paths >= 1.
std::size_t validate(const SimConfig& config);

/// Market, gap and Riccati solution bundled for the per-step kernels.
class PathModel {
 public:
  PathModel(const MarketSpec& spec, const GapSolution& gap);

  const MarketSpec& spec() const noexcept { return spec_; }
  const GapSolution& gap() const noexcept { return gap_; }
  const riccati::Solution& w() const noexcept { return w_; }

  double lower() const noexcept { return w_.lower(); }
  double upper() const noexcept { return w_.upper(); }
  /// Drift of log(S / S0) per year: mu - sigma^2 / 2.
  double log_drift() const noexcept { return log_drift_; }
  /// Y = 0 (buy boundary) is the lower numerical barrier unless leveraged.
  bool buy_barrier_is_lower() const noexcept { return !spec_.leveraged(); }
  double shadow_pi_max() const noexcept { return shadow_pi_max_; }

 private:
  MarketSpec spec_;
  GapSolution gap_;
  riccati::Solution w_;
  double log_drift_;
  double shadow_pi_max_;
};

struct PathState {
  double t = 0.0;
  double y = 0.0;
  double local_lower = 0.0;  // accumulated push at the lower numerical barrier (>= 0)
  double local_upper = 0.0;  // accumulated push at the upper numerical barrier (>= 0)
  double ask = 1.0;
  double safe_price = 1.0;
  double shadow = 1.0;
  double phi = 0.0;   // risky units
  double phi0 = 0.0;  // safe units
  double bought_shares = 0.0;
  double sold_shares = 0.0;
  double share_turnover_integral = 0.0;
  double wealth_turnover_integral = 0.0;
};

/// Reflection pushes of one step, as nonnegative magnitudes.
struct Reflection {
  double lower = 0.0;
  double upper = 0.0;
};

struct StepNoise {
  double gaussian = 0.0;
  /// Uniform on (0, 1]; only used by the bridge scheme.
  double uniform = 1.0;
};

struct StepResult {
  PathState state;
  Reflection reflection;
};

struct TradeRecord {
  double bought = 0.0;  // shares
  double sold = 0.0;    // shares
  double share_turnover = 0.0;
  double wealth_turnover = 0.0;
  /// True unless the trade happened away from the matching barrier.
  bool localized = true;
};

struct StrategyResult {
  PathState state;
  TradeRecord trade;
};

struct InitialPosition {
  double y = 0.0;
  double phi = 0.0;
  double phi0 = 0.0;
  double bought = 0.0;  // initial jump, in shares
  double sold = 0.0;
};

/// Starting point of Y for an endowment: 0 if the initial ask-price weight is
/// at or below pi_-, log(u/l) if at or above pi_max, log(z / l) otherwise.
/// Throws NonpositiveWealth.
double initial_y(const Endowment& endowment, const GapSolution& gap);

/// initial_y plus the jump trade (bought at the ask, sold at the bid).
InitialPosition initial_position(const Endowment& endowment, const PathModel& model);

/// Advances Y (with local times), the ask price and the clock by dt.
StepResult step(const PathState& state, const StepNoise& noise, double dt,
                const PathModel& model, ReflectionScheme scheme);

/// S * w(Y) / (l e^Y (1 - w(Y))).
double shadow_price(const PathState& state, const PathModel& model);

/// Rebalances to the stock-cash ratio l e^Y implied by the reflected state:
/// purchases at the ask when Y was pushed off the buy barrier, sales at the bid
/// off the sell barrier, self-financing. Tallies turnover with pre-trade
/// denominators.
StrategyResult evolve_strategy(const PathState& state, const Reflection& reflection,
                               const PathModel& model);

struct PathSummary {
  double sht = 0.0;
  double wet = 0.0;
  double log_growth = 0.0;  // log(terminal liquidation value / initial) / T
  double local_lower = 0.0;
  double local_upper = 0.0;
  double initial_bought = 0.0;
  double initial_sold = 0.0;
  std::size_t spread_violations = 0;
  std::size_t constraint_violations = 0;
  double max_spread_excess = 0.0;
  double max_weight_excess = 0.0;
  double traded_share_ratio = 0.0;      // sum |dphi| / |phi|
  double mislocalized_share_ratio = 0.0;
  std::size_t reflection_steps = 0;
  std::size_t trade_steps = 0;
  bool finite = true;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SimulationResult {
  Estimate sht;
  Estimate wet;
  Estimate log_growth;
  std::size_t spread_violations = 0;
  std::size_t constraint_violations = 0;
  double max_spread_excess = 0.0;
  double max_weight_excess = 0.0;
  double mislocalized_trade_fraction = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<PathSummary> paths;
};

using TraceSink = std::function<void(const PathState&)>;

/// One path with its own RNG substream keyed by (seed, path_index). When a
/// sink is given it receives the state every `trace_stride` steps.
PathSummary simulate_path(const PathModel& model, const SimConfig& config,
                          std::size_t path_index, const TraceSink* sink = nullptr,
                          std::size_t trace_stride = 1);

/// Reduction of per-path summaries in path-index order.
SimulationResult aggregate(std::vector<PathSummary> paths, std::size_t n_steps);

SimulationResult run_serial(const MarketSpec& spec, const GapSolution& gap,
                            const SimConfig& config);
SimulationResult run(const MarketSpec& spec, const GapSolution& gap, const SimConfig& config);

/// Whether `run` was compiled with OpenMP.
bool parallel_enabled() noexcept;

}  // namespace tcbind::sim
