#pragma once

// Closed-form solution w(lambda, x) of
//
//   w'(x) = (gamma - 1) w^2 - (2 mu / sigma^2 - 1) w + c(lambda),
//   w(0)  = (1 - lambda) pi_max,
//   c(lambda) = mu^2 / (gamma sigma^4) (1 - (1 - kappa (1 - lambda))^2),
//
// on the no-trade domain between 0 and log(u / l(lambda)).
//
// With v = (gamma - 1) w - (mu / sigma^2 - 1/2) the equation becomes
// v' = v^2 + disc, so the solution is a tangent (disc > 0) or a hyperbolic
// tangent / cotangent (disc < 0) depending on whether |v(0)| < sqrt(-disc).

#include <string_view>

#include "tcbind/model.hpp"

namespace tcbind::riccati {

enum class Branch { HyperbolicTanh, Tangent, HyperbolicCoth };

std::string_view to_string(Branch b) noexcept;

/// |disc| at or below this is rejected with RequiresLimitForm.
inline constexpr double kDiscriminantGuard = 1e-12;

struct Coefficients {
  double a = 0.0;         // sqrt(|disc|)
  double b = 0.0;         // v(0) = 1/2 - mu/sigma^2 + (gamma - 1) pi_max (1 - lambda)
  double disc = 0.0;      // (gamma - 1) c - (1/2 - mu/sigma^2)^2
  double constant = 0.0;  // c(lambda)
  Branch branch = Branch::HyperbolicTanh;
};

/// Branch selection from the sign of disc and |b| versus a.
Coefficients classify(const MarketSpec& spec, double lambda);

/// w(lambda, .) restricted to its no-trade domain. Construction verifies that
/// the active closed form has no pole anywhere on the domain.
class Solution {
 public:
  Solution(const MarketSpec& spec, double lambda);

  double lambda() const noexcept { return lambda_; }
  const Coefficients& coefficients() const noexcept { return coeffs_; }
  Branch branch() const noexcept { return coeffs_.branch; }
  /// log(u / l(lambda)); the domain is [min(0, x_end), max(0, x_end)].
  double x_end() const noexcept { return x_end_; }
  double lower() const noexcept { return x_end_ < 0.0 ? x_end_ : 0.0; }
  double upper() const noexcept { return x_end_ < 0.0 ? 0.0 : x_end_; }

  /// Closed form. Throws DomainError outside the domain.
  double value(double x) const;
  /// Right-hand side of the ODE at w = value(x).
  double derivative(double x) const;
  /// w'' = w' (2 (gamma - 1) w - (2 mu / sigma^2 - 1)).
  double second_derivative(double x) const;

  /// ODE right-hand side as a function of w alone.
  double rhs(double w) const noexcept;

 private:
  double lambda_;
  double gamma_;
  double drift_ratio_;
  Coefficients coeffs_;
  double x_end_;
  double phase_;  // atan(b/a), atanh(b/a) or arcoth(b/a)
};

// Free-function spellings of the member operations.
inline double w_eval(const Solution& s, double x) { return s.value(x); }
inline double w_prime(const Solution& s, double x) { return s.derivative(x); }
inline double w_second(const Solution& s, double x) { return s.second_derivative(x); }

}  // namespace tcbind::riccati
