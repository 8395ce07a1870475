#pragma once

// Broker selection along frictionless iso-utility curves and deposit rates
// that keep the equivalent safe rate unchanged under a tighter leverage cap.

#include <array>
#include <cstddef>
#include <vector>

#include "tcbind/gap_solver.hpp"

namespace tcbind::apps {

/// Market context shared by all offers: mu_bar is the total drift of the
/// risky asset, so the excess drift at lending rate r is mu_bar - r.
struct MarketContext {
  double mu_bar = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
};

/// Safe rate r at which the frictionless constrained ESR with leverage cap
/// pi_max equals esr_target. Requires pi_max > 1.
double iso_rate(double esr_target, double pi_max, double mu_bar, double gamma, double sigma);

/// r + (mu^2 / 2 gamma sigma^2)(2 kappa - kappa^2) with mu = mu_bar - r.
double frictionless_esr(double r, double pi_max, double mu_bar, double gamma, double sigma);

/// sqrt(eps) term of the ESR loss along the iso-utility curve. Throws
/// NegativeRadicand off the curve.
double esr_loss_leading(double esr, double pi_max, double mu_bar, double gamma, double sigma,
                        double epsilon);

/// Upper end of the iso-utility curve, where pi_max reaches the Merton weight.
double iso_curve_end(double esr, double mu_bar, double gamma, double sigma);

/// Leverage cap in (1, iso_curve_end) maximizing esr_loss_leading.
double critical_leverage(double esr, double mu_bar, double gamma, double sigma);

struct BrokerOffer {
  double r = 0.0;
  double pi_max = 0.0;
  MarketContext market;
};

struct BrokerEvaluation {
  double esr_frictionless = 0.0;
  double esr_exact = 0.0;
  double esr_leading = 0.0;  // esr_frictionless - esr_loss_leading
  GapSolution gap;
};

MarketSpec broker_spec(const BrokerOffer& offer);
BrokerEvaluation evaluate_broker(const BrokerOffer& offer);

struct DepositScenario {
  double pi_max_old = 0.0;
  double r_old = 0.0;
  double pi_max_new = 0.0;
  MarketContext market;
};

struct DepositResult {
  double r_new = 0.0;
  double esr_target = 0.0;
  double esr_achieved = 0.0;
  std::size_t iterations = 0;
};

/// Bisection on r over (0, mu_bar - pi_max_new gamma sigma^2) for the rate
/// matching the baseline ESR with costs. Throws NoSolution.
DepositResult deposit_rate(const DepositScenario& scenario);

struct Table1Cell {
  double pi_max = 0.0;
  double epsilon = 0.0;
  double r = 0.0;
  double esr = 0.0;
  double r_reference = 0.0;
  double esr_reference = 0.0;
};

struct Table1 {
  MarketContext market;
  double esr_target = 0.0;
  std::array<double, 3> pi_max{};
  std::array<double, 4> epsilon{};
  /// Closed-form deposit rates without costs, one per pi_max.
  std::array<double, 3> frictionless_rates{};
  /// Rows grouped by pi_max, then ascending epsilon.
  std::vector<Table1Cell> cells;
  double max_rate_deviation = 0.0;
  double max_esr_deviation = 0.0;
};

/// Reference deposit rates and ESRs (decimals) for the three leverage caps.
Table1 table1_reference();

/// Recomputes every cell of the reference table. Cells run in parallel.
Table1 compute_table1();

}  // namespace tcbind::apps
