#include <doctest.h>

#include <cmath>

#include "tcbind/errors.hpp"
#include "tcbind/model.hpp"

using namespace tcbind;

namespace {

MarketParams base() { return {0.08, 0.16, 0.0, 5.0, 0.01, 0.5}; }

ErrorKind kind_of(const MarketParams& p) {
  try {
    MarketSpec s(p);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidParameter;
}

}  // namespace

TEST_CASE("merton weight and derived quantities") {
  const MarketSpec s(base());
  CHECK(s.pi_star() == doctest::Approx(0.625).epsilon(1e-15));
  const DerivedQuantities d = derive(s);
  CHECK(d.kappa * d.pi_star == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.u == doctest::Approx(1.0));
  CHECK(d.shadow_pi_max == 0.5);

  MarketParams p = base();
  p.gamma = 0.8;
  p.pi_max = 2.25;
  const MarketSpec lev(p);
  CHECK(lev.pi_star() == doctest::Approx(3.90625).epsilon(1e-15));
  CHECK(derive(lev).shadow_pi_max == doctest::Approx(w_plus(2.25, 0.01)));
}

TEST_CASE("w_plus") {
  CHECK(w_plus(0.5, 0.0) == 0.5);
  for (double eps : {1e-4, 1e-2, 0.1}) {
    const double lo = w_plus(0.5, eps);
    CHECK(lo > 0.0);
    CHECK(lo < 0.5);
    CHECK(w_plus(2.2, eps) > 2.2);
  }
}

TEST_CASE("validation") {
  MarketParams p = base();
  p.mu = 0.0;
  CHECK(kind_of(p) == ErrorKind::InvalidParameter);
  p = base();
  p.sigma = -0.1;
  CHECK(kind_of(p) == ErrorKind::InvalidParameter);
  p = base();
  p.gamma = 1.0;
  CHECK(kind_of(p) == ErrorKind::InvalidParameter);
  p = base();
  p.epsilon = 1.0;
  CHECK(kind_of(p) == ErrorKind::InvalidParameter);
  p = base();
  p.pi_max = 1.0 + 5e-7;
  CHECK(kind_of(p) == ErrorKind::DegenerateConstraint);
  p = base();
  p.pi_max = 0.625;
  CHECK(kind_of(p) == ErrorKind::ConstraintNotBinding);
  p.pi_max = 0.7;
  CHECK(kind_of(p) == ErrorKind::ConstraintNotBinding);
  p = base();
  p.epsilon = 0.0;
  CHECK_NOTHROW(MarketSpec{p});
  CHECK(classify_error(ErrorKind::ConstraintNotBinding) == ErrorClass::Validation);
  CHECK(classify_error(ErrorKind::NoBracket) == ErrorClass::Solver);
  CHECK(classify_error(ErrorKind::SpreadViolation) == ErrorClass::Simulation);
}

TEST_CASE("lower stock-cash ratio") {
  CHECK(l_of_lambda(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l_of_lambda(0.1, 0.5) == doctest::Approx(0.45 / 0.55).epsilon(1e-14));
  CHECK(l_of_lambda(0.05, 2.2) == doctest::Approx(-1.9174311926605505).epsilon(1e-13));
  CHECK(l_of_lambda(0.0, 2.2) == doctest::Approx(u_ratio(2.2)).epsilon(1e-15));
  CHECK_THROWS_AS(l_of_lambda(1.0 - 1.0 / 2.2, 2.2), Error);
}

TEST_CASE("signed no-trade width") {
  CHECK(log_ul(0.0, 0.5) == 0.0);
  CHECK(log_ul(0.0, 2.2) == 0.0);
  CHECK(log_ul(0.1, 0.5) == doctest::Approx(0.20067069546215124).epsilon(1e-13));
  CHECK(log_ul(0.05, 2.2) == doctest::Approx(-0.04485056616535179).epsilon(1e-13));
  CHECK(max_admissible_lambda(0.5) == 1.0);
  CHECK(max_admissible_lambda(2.2) == doctest::Approx(1.0 - 1.0 / 2.2));
  try {
    log_ul(0.6, 2.2);
    FAIL("expected SignError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SignError);
  }
}

TEST_CASE("width is monotone in the gap") {
  double prev_lo = 0.0;
  double prev_hi = 0.0;
  for (int i = 1; i < 500; ++i) {
    const double lo = log_ul(0.99 * i / 500.0, 0.5);
    CHECK(lo > prev_lo);
    prev_lo = lo;
    const double hi = log_ul(max_admissible_lambda(2.2) * 0.99 * i / 500.0, 2.2);
    CHECK(hi < prev_hi);
    prev_hi = hi;
  }
}

TEST_CASE("spread conventions") {
  CHECK(relative_spread_from_one_sided(0.0) == 0.0);
  CHECK(relative_spread_from_one_sided(0.005) == doctest::Approx(0.01 / 1.005).epsilon(1e-15));
  CHECK(relative_spread_from_one_sided(0.005) == doctest::Approx(0.009950248756).epsilon(1e-10));
  for (double e : {1e-6, 1e-3, 0.01, 0.3, 0.9}) {
    CHECK(std::abs(relative_spread_from_one_sided(one_sided_spread_from_relative(e)) - e) < 1e-15);
  }
}

TEST_CASE("growth identity") {
  for (double k : {0.1, 0.5, 0.8, 0.99}) {
    for (int i = 0; i <= 50; ++i) {
      const double lam = 0.5 * i / 50.0;
      const double a = (2.0 * k / (1.0 - lam) - k * k) * (1.0 - lam) * (1.0 - lam);
      const double b = 1.0 - (1.0 - k * (1.0 - lam)) * (1.0 - k * (1.0 - lam));
      CHECK(std::abs(a - b) < 1e-12);
    }
  }
}
