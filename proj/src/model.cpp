#include "tcbind/model.hpp"

#include <cmath>
#include <sstream>

#include "tcbind/errors.hpp"

namespace tcbind {

namespace {

void require(bool ok, ErrorKind kind, const char* what, double value) {
  if (!ok) {
    std::ostringstream os;
    os << what << " (got " << value << ")";
    throw Error(kind, os.str());
  }
}

}  // namespace

MarketSpec::MarketSpec(const MarketParams& p) : p_(p) {
  require(std::isfinite(p.mu) && p.mu > 0.0, ErrorKind::InvalidParameter, "mu must be > 0", p.mu);
  require(std::isfinite(p.sigma) && p.sigma > 0.0, ErrorKind::InvalidParameter,
          "sigma must be > 0", p.sigma);
  require(std::isfinite(p.r), ErrorKind::InvalidParameter, "r must be finite", p.r);
  require(std::isfinite(p.gamma) && p.gamma > 0.0, ErrorKind::InvalidParameter,
          "gamma must be > 0", p.gamma);
  require(p.gamma != 1.0, ErrorKind::InvalidParameter, "gamma must differ from 1", p.gamma);
  require(std::isfinite(p.epsilon) && p.epsilon >= 0.0 && p.epsilon < 1.0,
          ErrorKind::InvalidParameter, "epsilon must lie in [0, 1)", p.epsilon);
  require(std::isfinite(p.pi_max) && p.pi_max > 0.0, ErrorKind::InvalidParameter,
          "pi_max must be > 0", p.pi_max);
  require(std::abs(p.pi_max - 1.0) >= kDegenerateConstraintGuard, ErrorKind::DegenerateConstraint,
          "pi_max too close to 1 (buy-and-hold)", p.pi_max);
  require(p.pi_max < pi_star(), ErrorKind::ConstraintNotBinding,
          "pi_max must be below the Merton weight mu/(gamma sigma^2)", p.pi_max);
  // (1 - pi_max) + pi_max (1 - eps) = 1 - pi_max eps: a position at the cap
  // must stay solvent when marked at the bid.
  require(1.0 - p.pi_max * p.epsilon > 0.0, ErrorKind::InvalidParameter,
          "epsilon too large for the leverage cap", p.epsilon);
}

MarketSpec MarketSpec::with_epsilon(double epsilon) const {
  MarketParams p = p_;
  p.epsilon = epsilon;
  return MarketSpec(p);
}

MarketSpec MarketSpec::with_pi_max(double pi_max) const {
  MarketParams p = p_;
  p.pi_max = pi_max;
  return MarketSpec(p);
}

double w_plus(double pi_max, double epsilon) {
  return pi_max * (1.0 - epsilon) / ((1.0 - pi_max) + pi_max * (1.0 - epsilon));
}

DerivedQuantities derive(const MarketSpec& spec) {
  DerivedQuantities d;
  d.pi_star = spec.pi_star();
  d.kappa = spec.pi_max() / d.pi_star;
  d.u = u_ratio(spec.pi_max());
  d.w_plus = w_plus(spec.pi_max(), spec.epsilon());
  d.shadow_pi_max = spec.pi_max() <= 1.0 ? spec.pi_max() : d.w_plus;
  return d;
}

double l_of_lambda(double lambda, double pi_max) {
  const double pi_minus = (1.0 - lambda) * pi_max;
  const double den = 1.0 - pi_minus;
  if (std::abs(den) < 1e-14) {
    throw Error(ErrorKind::SingularRatio, "(1 - lambda) pi_max equals 1");
  }
  return pi_minus / den;
}

double log_ul(double lambda, double pi_max) {
  // u / l = [1 / (1 - lambda)] * [1 + lambda pi_max / (1 - pi_max)], written
  // with log1p so that small gaps keep full relative accuracy.
  const double shift = lambda * pi_max / (1.0 - pi_max);
  if (!(lambda < 1.0) || !(shift > -1.0)) {
    std::ostringstream os;
    os << "u/l(lambda) <= 0 at lambda=" << lambda << ", pi_max=" << pi_max;
    throw Error(ErrorKind::SignError, os.str());
  }
  return -std::log1p(-lambda) + std::log1p(shift);
}

double max_admissible_lambda(double pi_max) {
  return pi_max < 1.0 ? 1.0 : 1.0 - 1.0 / pi_max;
}

double relative_spread_from_one_sided(double one_sided) {
  require(one_sided >= 0.0 && one_sided < 1.0, ErrorKind::InvalidParameter,
          "one-sided spread must lie in [0, 1)", one_sided);
  return 2.0 * one_sided / (1.0 + one_sided);
}

double one_sided_spread_from_relative(double epsilon) {
  require(epsilon >= 0.0 && epsilon < 1.0, ErrorKind::InvalidParameter,
          "relative spread must lie in [0, 1)", epsilon);
  return epsilon / (2.0 - epsilon);
}

}  // namespace tcbind
