#include "tcbind/gap_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "tcbind/errors.hpp"

namespace tcbind {

double terminal_mismatch(const MarketSpec& spec, double lambda) {
  const riccati::Solution w(spec, lambda);
  return w.value(w.x_end()) - w_plus(spec.pi_max(), spec.epsilon());
}

GapExpansion lambda_asymptotic(const MarketSpec& spec) {
  const double g = spec.gamma();
  const double pm = spec.pi_max();
  const double ps = spec.pi_star();
  const double kappa = pm / ps;
  const double one_minus = (1.0 - pm) * (1.0 - pm);

  GapExpansion e;
  e.coefficient = std::sqrt(one_minus / (g * (ps - pm)));
  e.coefficient_alt = std::sqrt(kappa / (1.0 - kappa) * one_minus / (g * pm));
  e.leading = e.coefficient * std::sqrt(spec.epsilon());
  return e;
}

double excess_growth(const MarketSpec& spec, double lambda) {
  const double k = spec.pi_max() / spec.pi_star() * (1.0 - lambda);
  return spec.mu() * spec.mu() / (2.0 * spec.gamma() * spec.variance()) *
         (1.0 - (1.0 - k) * (1.0 - k));
}

GapSolution gap_at(const MarketSpec& spec, double lambda) {
  const riccati::Solution w(spec, lambda);
  GapSolution g;
  g.lambda = lambda;
  g.pi_plus = spec.pi_max();
  g.pi_minus = (1.0 - lambda) * spec.pi_max();
  g.w_plus = w_plus(spec.pi_max(), spec.epsilon());
  g.u = u_ratio(spec.pi_max());
  g.l = l_of_lambda(lambda, spec.pi_max());
  g.beta = excess_growth(spec, lambda);
  g.log_ul = w.x_end();
  g.branch = w.branch();
  g.mismatch_at_root = w.value(w.x_end()) - g.w_plus;
  g.bracket_lo = g.bracket_hi = lambda;
  return g;
}

namespace {

std::optional<double> try_mismatch(const MarketSpec& spec, double lambda) {
  try {
    const double f = terminal_mismatch(spec, lambda);
    if (std::isfinite(f)) return f;
  } catch (const Error&) {
  }
  return std::nullopt;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

[[noreturn]] void no_bracket(const MarketSpec& spec, const char* why) {
  std::ostringstream os;
  os << why << " (epsilon=" << spec.epsilon() << ", pi_max=" << spec.pi_max()
     << "); epsilon may be too large for this market";
  throw Error(ErrorKind::NoBracket, os.str());
}

}  // namespace

GapSolution solve_gap(const MarketSpec& spec, const SolverOptions& opts) {
  if (spec.epsilon() == 0.0) return gap_at(spec, 0.0);

  // Sign of the mismatch as lambda -> 0+: pi_max - w_plus.
  const int sign0 = spec.pi_max() < 1.0 ? 1 : -1;
  const double cap = max_admissible_lambda(spec.pi_max()) * (1.0 - 1e-12);
  const double seed = lambda_asymptotic(spec).leading;

  std::size_t expansions = 0;
  std::size_t shrinks = 0;

  double lo = std::min(seed / 4.0, 0.5 * cap);
  std::optional<double> f_lo = try_mismatch(spec, lo);
  std::optional<double> f_hi;
  double hi = 0.0;

  // Lower end: move towards 0 until the mismatch has its small-gap sign.
  while (!f_lo || sign_of(*f_lo) != sign0) {
    if (f_lo && *f_lo == 0.0) {
      GapSolution g = gap_at(spec, lo);
      g.bracket_lo = g.bracket_hi = lo;
      return g;
    }
    if (f_lo) {
      hi = lo;
      f_hi = f_lo;
    }
    if (++expansions > opts.max_expansions) no_bracket(spec, "no small-gap sign found");
    lo *= 0.5;
    f_lo = try_mismatch(spec, lo);
  }

  // Upper end: widen geometrically, backing off from failed evaluations.
  if (!f_hi) {
    double good = lo;
    double bad = cap;
    hi = std::min(4.0 * seed, cap);
    for (;;) {
      f_hi = try_mismatch(spec, hi);
      if (!f_hi) {
        bad = hi;
        if (++shrinks > opts.max_shrinks) no_bracket(spec, "upper bracket end never evaluable");
        hi = 0.5 * (good + bad);
        continue;
      }
      if (sign_of(*f_hi) != sign0) break;
      good = hi;
      lo = hi;
      f_lo = f_hi;
      if (++expansions > opts.max_expansions) no_bracket(spec, "no sign change after expansion");
      hi = std::min(2.0 * hi, 0.5 * (hi + bad));
    }
  }

  // Refinement on [lo, hi] with f(lo) of sign0 and f(hi) of the other sign.
  double a = lo, fa = *f_lo;
  double b = hi, fb = *f_hi;
  int last_side = 0;
  bool force_bisect = false;
  double width_before = b - a;
  std::size_t it = 0;
  double best = std::abs(fa) < std::abs(fb) ? a : b;
  double f_best = std::min(std::abs(fa), std::abs(fb));

  for (; it < opts.max_iterations; ++it) {
    if (b - a < opts.lambda_tol) break;
    if (fb == 0.0 || fa == 0.0) break;

    double x = b - fb * (b - a) / (fb - fa);
    if (force_bisect || !(x > a && x < b)) x = 0.5 * (a + b);
    force_bisect = false;

    const std::optional<double> fx = try_mismatch(spec, x);
    if (!fx) {
      // Past a pole: the root lies below x.
      b = x;
      force_bisect = true;
      last_side = 0;
      continue;
    }
    if (std::abs(*fx) < f_best) {
      f_best = std::abs(*fx);
      best = x;
    }
    if (*fx == 0.0) {
      a = b = x;
      break;
    }
    if (sign_of(*fx) == sign0) {
      a = x;
      fa = *fx;
      if (last_side == -1) fb *= 0.5;
      last_side = -1;
    } else {
      b = x;
      fb = *fx;
      if (last_side == 1) fa *= 0.5;
      last_side = 1;
    }
    // Fall back to bisection when two steps fail to halve the bracket.
    if (it % 2 == 1) {
      if (b - a > 0.5 * width_before) force_bisect = true;
      width_before = b - a;
    }
  }

  if (b - a >= opts.lambda_tol && !(fa == 0.0 || fb == 0.0)) {
    std::ostringstream os;
    os << "bracket width " << (b - a) << " after " << it << " iterations";
    throw Error(ErrorKind::ToleranceNotReached, os.str());
  }

  GapSolution g = gap_at(spec, best);
  if (!(std::abs(g.mismatch_at_root) < opts.residual_tol)) {
    std::ostringstream os;
    os << "terminal mismatch " << g.mismatch_at_root << " at lambda=" << best;
    throw Error(ErrorKind::ToleranceNotReached, os.str());
  }
  g.iterations = it;
  g.bracket_lo = a;
  g.bracket_hi = b;
  return g;
}

}  // namespace tcbind
