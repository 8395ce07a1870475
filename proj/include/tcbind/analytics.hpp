#pragma once

// Welfare, boundary and turnover quantities at a solved gap, their
// leading-order expansions in the spread, and the turnover/premium relations.

#include <vector>

#include "tcbind/gap_solver.hpp"
#include "tcbind/model.hpp"

namespace tcbind {

/// |2 mu / sigma^2 - 1| below this selects the logarithmic turnover branch.
inline constexpr double kLogBranchThreshold = 1e-8;

struct FrictionAnalytics {
  double esr = 0.0;
  double esr_frictionless_constrained = 0.0;
  double lip = 0.0;
  double lip_c = 0.0;
  double lip_t = 0.0;          // lip - lip_c
  double lip_t_leading = 0.0;  // sqrt(epsilon) term of the decomposition
  double sht = 0.0;
  double wet = 0.0;
  double pi_minus = 0.0;
  double pi_plus = 0.0;
};

struct AsymptoticAnalytics {
  double esr_frictionless = 0.0;   // r + (mu^2 / 2 gamma sigma^2)(2 kappa - kappa^2)
  double esr_coefficient = 0.0;    // esr ~ esr_frictionless - coef sqrt(eps)
  double lip_c = 0.0;
  double lip_t_coefficient = 0.0;  // lip ~ lip_c + coef sqrt(eps)
  double pi_minus_coefficient = 0.0;
  double lambda_coefficient = 0.0;
  double sht_coefficient = 0.0;    // sht ~ coef / sqrt(eps)
  double wet_coefficient = 0.0;

  // Values at the spec's epsilon.
  double esr = 0.0;
  double lip = 0.0;
  double lip_t = 0.0;
  double pi_minus = 0.0;
  double lambda = 0.0;
  double sht = 0.0;
  double wet = 0.0;
};

double equivalent_safe_rate(const MarketSpec& spec, const GapSolution& gap);
double frictionless_constrained_esr(const MarketSpec& spec);

struct LiquidityPremium {
  double lip = 0.0;
  double lip_c = 0.0;
  double lip_t = 0.0;
  double lip_t_leading = 0.0;
};

LiquidityPremium liquidity_premium(const MarketSpec& spec, const GapSolution& gap);

double share_turnover(const MarketSpec& spec, const GapSolution& gap);
double wealth_turnover(const MarketSpec& spec, const GapSolution& gap);

/// Turnover closed forms in terms of the boundary geometry alone. A zero
/// width returns +infinity.
double share_turnover_formula(double mu, double sigma, double pi_minus, double w_plus,
                              double log_ul);
double wealth_turnover_formula(double mu, double sigma, double pi_minus, double w_plus,
                               double log_ul);

FrictionAnalytics analyze(const MarketSpec& spec, const GapSolution& gap);
AsymptoticAnalytics asymptotics(const MarketSpec& spec);

/// Leading-order share turnover coefficient
/// gamma sigma^2 sqrt((pi_star - pi_max)(1 - pi_max)^2 / gamma).
double sht_coefficient(double gamma, double sigma, double pi_star, double pi_max);

struct TurnoverStaticsEntry {
  double pi_max = 0.0;
  double sht_coefficient = 0.0;
  /// Sign of d(coefficient)/d(pi_max): -1, 0 or +1. Negative means a tighter
  /// constraint raises turnover.
  int predicted_slope = 0;
  double numerical_slope = 0.0;
};

struct TurnoverStatics {
  double pi_star = 0.0;
  double leverage_threshold = 0.0;  // (1 + 2 pi_star) / 3
  std::vector<TurnoverStaticsEntry> entries;
  /// Coefficients ordered as predicted by the slope signs between neighbours.
  bool ordering_consistent = true;
};

TurnoverStatics turnover_comparative_statics(const MarketSpec& spec,
                                             const std::vector<double>& pi_max_values);

}  // namespace tcbind
