#pragma once

// Market and preference parameters, frictionless reference quantities and
// the no-trade geometry as a function of the gap lambda.
//
// All rates are annualized decimals (0.08 means 8% per year).

namespace tcbind {

/// |pi_max - 1| below this is rejected: the closed forms divide by 1 - pi_max.
inline constexpr double kDegenerateConstraintGuard = 1e-6;

struct MarketParams {
  double mu = 0.0;       // excess drift of the ask price
  double sigma = 0.0;    // volatility
  double r = 0.0;        // safe rate
  double gamma = 0.0;    // relative risk aversion
  double epsilon = 0.0;  // relative bid-ask spread, bid = (1 - epsilon) * ask
  double pi_max = 0.0;   // upper bound on the risky weight
};

/// Validated market specification. Construction throws tcbind::Error if any
/// parameter is out of range or if the constraint does not bind
/// (pi_max >= mu / (gamma sigma^2), strict comparison, no tolerance).
/// epsilon = 0 is accepted and describes the frictionless market.
class MarketSpec {
 public:
  explicit MarketSpec(const MarketParams& p);

  double mu() const noexcept { return p_.mu; }
  double sigma() const noexcept { return p_.sigma; }
  double r() const noexcept { return p_.r; }
  double gamma() const noexcept { return p_.gamma; }
  double epsilon() const noexcept { return p_.epsilon; }
  double pi_max() const noexcept { return p_.pi_max; }
  const MarketParams& params() const noexcept { return p_; }

  bool leveraged() const noexcept { return p_.pi_max > 1.0; }
  double variance() const noexcept { return p_.sigma * p_.sigma; }
  /// mu / sigma^2
  double drift_ratio() const noexcept { return p_.mu / variance(); }
  /// Frictionless unconstrained Merton weight mu / (gamma sigma^2).
  double pi_star() const noexcept { return p_.mu / (p_.gamma * variance()); }

  MarketSpec with_epsilon(double epsilon) const;
  MarketSpec with_pi_max(double pi_max) const;

 private:
  MarketParams p_;
};

struct DerivedQuantities {
  double pi_star = 0.0;
  double kappa = 0.0;          // pi_max / pi_star, < 1
  double u = 0.0;              // upper stock-cash ratio pi_max / (1 - pi_max)
  double w_plus = 0.0;         // selling boundary in shadow-weight terms
  double shadow_pi_max = 0.0;  // constraint on the risky weight at the shadow price
};

DerivedQuantities derive(const MarketSpec& spec);

/// pi_max (1 - eps) / ((1 - pi_max) + pi_max (1 - eps))
double w_plus(double pi_max, double epsilon);

/// Lower stock-cash ratio (1 - lambda) pi_max / (1 - (1 - lambda) pi_max).
double l_of_lambda(double lambda, double pi_max);

inline double u_ratio(double pi_max) { return pi_max / (1.0 - pi_max); }

/// Signed no-trade width log(u / l(lambda)): positive for pi_max < 1,
/// negative for pi_max > 1. Throws SignError when u / l <= 0.
double log_ul(double lambda, double pi_max);

/// Supremum (exclusive) of gaps for which u / l(lambda) > 0.
double max_admissible_lambda(double pi_max);

/// One-sided spread convention ((1 - e) S, (1 + e) S) to the bid/ask
/// convention ((1 - eps) S', S') and back.
double relative_spread_from_one_sided(double one_sided);
double one_sided_spread_from_relative(double epsilon);

}  // namespace tcbind
