#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tcbind/errors.hpp"
#include "tcbind/gap_solver.hpp"
#include "tcbind/riccati.hpp"

using namespace tcbind;
using riccati::Branch;

namespace {

MarketSpec make(double mu, double gamma, double pi_max, double eps) {
  return MarketSpec({mu, 0.16, 0.0, gamma, eps, pi_max});
}

}  // namespace

TEST_CASE("branch selection") {
  CHECK(riccati::classify(make(0.08, 5.0, 0.5, 0.01), 0.05).branch == Branch::Tangent);
  CHECK(riccati::classify(make(0.08, 0.8, 0.5, 0.01), 0.05).branch == Branch::HyperbolicTanh);
  CHECK(riccati::classify(make(0.08, 0.1, 0.5, 0.01), 0.05).branch == Branch::HyperbolicTanh);
  CHECK(riccati::classify(make(0.08, 0.8, 2.25, 0.01), 0.05).branch == Branch::HyperbolicCoth);
  CHECK(riccati::classify(make(0.08, 5.0, 0.3, 0.01), 0.05).branch == Branch::HyperbolicCoth);
  CHECK(riccati::classify(make(0.2, 5.0, 1.5, 0.01), 0.05).branch == Branch::HyperbolicTanh);

  const MarketSpec s = make(0.08, 5.0, 0.5, 0.01);
  const riccati::Coefficients c = riccati::classify(s, 0.05);
  const double m = 0.08 / 0.0256;
  const double k = 0.5 / 0.625 * 0.95;
  const double cst = 0.08 * 0.08 / (5.0 * std::pow(0.16, 4)) * (1.0 - (1.0 - k) * (1.0 - k));
  CHECK(c.constant == doctest::Approx(cst).epsilon(1e-13));
  CHECK(c.disc == doctest::Approx(4.0 * cst - (0.5 - m) * (0.5 - m)).epsilon(1e-12));
  CHECK(c.a == doctest::Approx(std::sqrt(std::abs(c.disc))).epsilon(1e-15));
  CHECK(c.b == doctest::Approx(0.5 - m + 4.0 * 0.5 * 0.95).epsilon(1e-13));
}

TEST_CASE("initial condition and monotonicity on all branches") {
  struct Case {
    double mu, gamma, pi_max, lambda;
  };
  const std::vector<Case> cases = {{0.08, 5.0, 0.5, 0.06},  {0.08, 0.8, 0.5, 0.05},
                                   {0.08, 0.8, 2.25, 0.09}, {0.08, 0.1, 2.2, 0.1},
                                   {0.08, 5.0, 0.3, 0.03},  {0.2, 5.0, 1.5, 0.05}};
  for (const Case& c : cases) {
    const MarketSpec s = make(c.mu, c.gamma, c.pi_max, 0.01);
    const riccati::Solution w(s, c.lambda);
    CHECK(std::abs(w.value(0.0) - (1.0 - c.lambda) * c.pi_max) < 1e-12);
    const int dir = c.pi_max < 1.0 ? 1 : -1;
    double prev = w.value(w.lower());
    for (int i = 1; i <= 200; ++i) {
      const double x = w.lower() + (w.upper() - w.lower()) * i / 200.0;
      const double v = w.value(x);
      CHECK(dir * (v - prev) > 0.0);
      prev = v;
    }
  }
}

TEST_CASE("closed form against numerical integration") {
  struct Case {
    double mu, gamma, pi_max;
  };
  for (const Case& c : {Case{0.08, 5.0, 0.5}, Case{0.08, 0.8, 0.5}, Case{0.08, 0.8, 2.25},
                        Case{0.08, 5.0, 0.3}}) {
    const MarketSpec s = make(c.mu, c.gamma, c.pi_max, 0.01);
    const GapSolution g = solve_gap(s);
    const riccati::Solution w(s, g.lambda);
    const oracle::Riccati ref{c.mu, 0.16, c.gamma, c.pi_max, g.lambda};
    CHECK(ref.log_ul() == doctest::Approx(g.log_ul).epsilon(1e-12));
    for (double frac : {0.25, 0.5, 1.0}) {
      const double x = frac * g.log_ul;
      CHECK(std::abs(w.value(x) - ref.w_at(x)) < 1e-12);
    }
  }
}

TEST_CASE("frozen midpoint value at the solved gap") {
  const MarketSpec s = make(0.08, 5.0, 0.5, 0.01);
  const GapSolution g = solve_gap(s);
  const riccati::Solution w(s, g.lambda);
  const oracle::Riccati ref{0.08, 0.16, 5.0, 0.5, 0.060410940287441};
  CHECK(w.value(0.5 * g.log_ul) == doctest::Approx(ref.w_at(0.5 * ref.log_ul())).epsilon(1e-11));
}

TEST_CASE("derivatives follow the ODE") {
  const MarketSpec s = make(0.08, 5.0, 0.5, 0.01);
  const riccati::Solution w(s, 0.06);
  const double m = s.drift_ratio();
  for (int i = 0; i <= 20; ++i) {
    const double x = w.x_end() * i / 20.0;
    const double v = w.value(x);
    const double d1 = w.derivative(x);
    const double d2 = w.second_derivative(x);
    CHECK(std::abs(d2 + 2.0 * (1.0 - 5.0) * d1 * v + (2.0 * m - 1.0) * d1) < 1e-10);
    if (i > 0 && i < 20) {
      const double h = 1e-5 * w.x_end();
      CHECK(std::abs((w.value(x + h) - w.value(x - h)) / (2.0 * h) - d1) < 1e-8);
      CHECK(std::abs((w.derivative(x + h) - w.derivative(x - h)) / (2.0 * h) - d2) < 1e-6);
    }
    CHECK(riccati::w_eval(w, x) == v);
    CHECK(riccati::w_prime(w, x) == d1);
    CHECK(riccati::w_second(w, x) == d2);
  }
}

TEST_CASE("domain and pole errors") {
  const MarketSpec s = make(0.08, 5.0, 0.5, 0.01);
  const riccati::Solution w(s, 0.06);
  try {
    w.value(1.5 * w.x_end());
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  CHECK_THROWS_AS(w.value(-0.1), Error);

  // Table 1 baseline market: a pole of the coth form crosses the domain near lambda ~ 0.48.
  const MarketSpec t1({0.08 - 0.0581706666666667, 0.16, 0.0581706666666667, 0.1, 0.01, 2.2});
  bool pole = false;
  for (int i = 0; i < 200 && !pole; ++i) {
    try {
      riccati::Solution probe(t1, 0.47 + 0.02 * i / 200.0);
    } catch (const Error& e) {
      pole = e.kind() == ErrorKind::PoleEncountered;
    }
  }
  CHECK(pole);
}

TEST_CASE("smooth pasting sign at the buy boundary") {
  for (double pm : {0.5, 2.25}) {
    const MarketSpec s = make(0.08, pm < 1.0 ? 5.0 : 0.8, pm, 0.01);
    const GapSolution g = solve_gap(s);
    const riccati::Solution w(s, g.lambda);
    const double v = w.value(0.0);
    const double expr = w.second_derivative(0.0) - w.derivative(0.0) + 2.0 * v * w.derivative(0.0);
    CHECK((pm < 1.0 ? expr < 0.0 : expr > 0.0));
  }
}
