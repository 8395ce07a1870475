#pragma once

#include <cstddef>

#include "tcbind/model.hpp"
#include "tcbind/riccati.hpp"

namespace tcbind {

/// Signed residual w(lambda, log(u/l(lambda))) - w_plus of the terminal condition.
/// Propagates riccati errors (poles, limit forms, sign errors).
double terminal_mismatch(const MarketSpec& spec, double lambda);

/// Leading-order gap coefficient in two algebraically equal forms:
///   sqrt((1/gamma) kappa/(1-kappa) (1-pi_max)^2 / pi_max)          (kappa form)
///   sqrt((1/gamma) (1-pi_max)^2 / (pi_star - pi_max))               (weight form)
struct GapExpansion {
  double coefficient = 0.0;      // weight form, used for `leading`
  double coefficient_alt = 0.0;  // kappa form
  double leading = 0.0;          // coefficient * sqrt(epsilon)
};

GapExpansion lambda_asymptotic(const MarketSpec& spec);

struct SolverOptions {
  double lambda_tol = 1e-12;
  double residual_tol = 1e-10;
  std::size_t max_iterations = 200;
  std::size_t max_expansions = 16;
  std::size_t max_shrinks = 64;
};

struct GapSolution {
  double lambda = 0.0;
  double pi_minus = 0.0;
  double pi_plus = 0.0;
  double w_plus = 0.0;
  double l = 0.0;
  double u = 0.0;
  double beta = 0.0;  // excess growth rate over r
  double log_ul = 0.0;
  riccati::Branch branch = riccati::Branch::HyperbolicTanh;
  double mismatch_at_root = 0.0;
  std::size_t iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Solves the terminal-value condition for the gap. Seeds the bracket at
/// [lambda0/4, min(4 lambda0, lambda_max)] from the leading-order expansion,
/// widens it by factors of 2 when no sign change is found, and refines with
/// an Illinois false-position / bisection hybrid. Evaluations that fail
/// (a pole enters the domain) are treated as lying above the root.
///
/// Throws NoBracket or ToleranceNotReached. epsilon = 0 returns lambda = 0.
GapSolution solve_gap(const MarketSpec& spec, const SolverOptions& opts = {});

/// Gap solution assembled for a given lambda (no root finding). Used for
/// lambda = 0 and by tests that probe off-root behaviour.
GapSolution gap_at(const MarketSpec& spec, double lambda);

/// beta = (mu^2 / (2 gamma sigma^2)) (1 - (1 - kappa (1 - lambda))^2)
double excess_growth(const MarketSpec& spec, double lambda);

}  // namespace tcbind
