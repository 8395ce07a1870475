#include "tcbind/applications.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "tcbind/analytics.hpp"
#include "tcbind/errors.hpp"

namespace tcbind::apps {

namespace {

constexpr double kEsrMatchTol = 1e-10;
constexpr std::size_t kMaxBisections = 200;

void require_leverage(double pi_max) {
  if (!(pi_max > 1.0)) {
    std::ostringstream os;
    os << "leverage cap must exceed 1 (got " << pi_max << ")";
    throw Error(ErrorKind::InvalidParameter, os.str());
  }
}

std::optional<double> try_esr(const BrokerOffer& offer) {
  try {
    const double e = evaluate_broker(offer).esr_exact;
    if (std::isfinite(e)) return e;
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

double iso_rate(double esr_target, double pi_max, double mu_bar, double gamma, double sigma) {
  require_leverage(pi_max);
  const double g = gamma * sigma * sigma;
  return (2.0 * pi_max * mu_bar - 2.0 * esr_target - pi_max * pi_max * g) / (2.0 * (pi_max - 1.0));
}

double frictionless_esr(double r, double pi_max, double mu_bar, double gamma, double sigma) {
  const double g = gamma * sigma * sigma;
  const double mu = mu_bar - r;
  const double kappa = pi_max * g / mu;
  return r + mu * mu / (2.0 * g) * (2.0 * kappa - kappa * kappa);
}

double esr_loss_leading(double esr, double pi_max, double mu_bar, double gamma, double sigma,
                        double epsilon) {
  const double var = sigma * sigma;
  const double g = gamma * var;
  const double radicand = 0.5 * var * pi_max * pi_max * (pi_max - 1.0) *
                          (2.0 * esr - 2.0 * mu_bar - (pi_max - 2.0) * pi_max * g);
  if (radicand < 0.0) {
    std::ostringstream os;
    os << "radicand " << radicand << " at pi_max=" << pi_max << " is off the iso-utility curve";
    throw Error(ErrorKind::NegativeRadicand, os.str());
  }
  return std::sqrt(radicand * epsilon);
}

double iso_curve_end(double esr, double mu_bar, double gamma, double sigma) {
  const double g = gamma * sigma * sigma;
  const double disc = 1.0 + 2.0 * (esr - mu_bar) / g;
  if (!(disc > 0.0)) throw Error(ErrorKind::NoSolution, "iso-utility curve is empty");
  return 1.0 + std::sqrt(disc);
}

double critical_leverage(double esr, double mu_bar, double gamma, double sigma) {
  const double g = gamma * sigma * sigma;
  const double a = 2.0 * (esr - mu_bar);
  const double end = iso_curve_end(esr, mu_bar, gamma, sigma);
  // Derivative of the radicand p^2 (p - 1)(a - (p - 2) p g), divided by p.
  auto slope = [&](double p) { return ((-5.0 * g * p + 12.0 * g) * p + 3.0 * (a - 2.0 * g)) * p - 2.0 * a; };
  const double f_lo = slope(1.0);
  const double f_hi = slope(end);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw Error(ErrorKind::NoSolution, "loss has no interior maximum on the curve");
  }
  boost::uintmax_t iters = 200;
  const auto tol = [](double x, double y) { return std::abs(x - y) < 1e-12; };
  const auto root = boost::math::tools::toms748_solve(slope, 1.0, end, f_lo, f_hi, tol, iters);
  return 0.5 * (root.first + root.second);
}

MarketSpec broker_spec(const BrokerOffer& offer) {
  require_leverage(offer.pi_max);
  if (!(offer.market.mu_bar > offer.r)) {
    throw Error(ErrorKind::InvalidParameter, "mu_bar must exceed the lending rate");
  }
  MarketParams p;
  p.mu = offer.market.mu_bar - offer.r;
  p.sigma = offer.market.sigma;
  p.r = offer.r;
  p.gamma = offer.market.gamma;
  p.epsilon = offer.market.epsilon;
  p.pi_max = offer.pi_max;
  return MarketSpec(p);
}

BrokerEvaluation evaluate_broker(const BrokerOffer& offer) {
  const MarketSpec spec = broker_spec(offer);
  BrokerEvaluation e;
  e.esr_frictionless = frictionless_constrained_esr(spec);
  e.gap = solve_gap(spec);
  e.esr_exact = equivalent_safe_rate(spec, e.gap);
  e.esr_leading = e.esr_frictionless - esr_loss_leading(e.esr_frictionless, offer.pi_max,
                                                        offer.market.mu_bar, spec.gamma(),
                                                        spec.sigma(), spec.epsilon());
  return e;
}

DepositResult deposit_rate(const DepositScenario& s) {
  if (!(s.pi_max_new <= s.pi_max_old)) {
    throw Error(ErrorKind::InvalidParameter, "new leverage cap must not exceed the old one");
  }
  DepositResult out;
  out.esr_target = evaluate_broker({s.r_old, s.pi_max_old, s.market}).esr_exact;
  if (s.pi_max_new == s.pi_max_old) {
    out.r_new = s.r_old;
    out.esr_achieved = out.esr_target;
    return out;
  }

  // ESR falls as r rises (dESR/dr = 1 - pi_max < 0); evaluations that fail
  // near the top of the range count as too high.
  const double g = s.market.gamma * s.market.sigma * s.market.sigma;
  double lo = 0.0;
  double hi = s.market.mu_bar - s.pi_max_new * g;
  const std::optional<double> f_lo = try_esr({lo, s.pi_max_new, s.market});
  if (!(hi > lo) || !f_lo || *f_lo < out.esr_target) {
    throw Error(ErrorKind::NoSolution, "no deposit rate in (0, mu_bar) reaches the target");
  }

  double best = lo;
  double best_err = *f_lo - out.esr_target;
  std::size_t it = 0;
  for (; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const std::optional<double> f = try_esr({mid, s.pi_max_new, s.market});
    if (!f) {
      hi = mid;
      continue;
    }
    const double err = *f - out.esr_target;
    if (std::abs(err) < std::abs(best_err)) {
      best = mid;
      best_err = err;
    }
    if (err == 0.0) break;
    if (err > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 && std::abs(best_err) < kEsrMatchTol) break;
  }
  if (!(std::abs(best_err) < kEsrMatchTol)) {
    std::ostringstream os;
    os << "ESR mismatch " << best_err << " at r=" << best;
    throw Error(ErrorKind::NoSolution, os.str());
  }
  out.r_new = best;
  out.esr_achieved = out.esr_target + best_err;
  out.iterations = it;
  return out;
}

Table1 table1_reference() {
  Table1 t;
  t.market = {0.08, 0.16, 0.1, 0.0};
  t.esr_target = 0.10;
  t.pi_max = {2.2, 1.8, 1.5};
  t.epsilon = {0.0, 0.001, 0.01, 0.1};
  const double esr[4] = {0.10, 0.0984, 0.0954, 0.0886};
  const double rates[3][4] = {{0.0582, 0.0582, 0.0582, 0.0582},
                              {0.0498, 0.0505, 0.0516, 0.0543},
                              {0.0342, 0.0360, 0.0393, 0.0468}};
  for (std::size_t i = 0; i < 3; ++i) {
    t.frictionless_rates[i] = rates[i][0];
    for (std::size_t j = 0; j < 4; ++j) {
      Table1Cell c;
      c.pi_max = t.pi_max[i];
      c.epsilon = t.epsilon[j];
      c.r = c.r_reference = rates[i][j];
      c.esr = c.esr_reference = esr[j];
      t.cells.push_back(c);
    }
  }
  return t;
}

Table1 compute_table1() {
  Table1 t = table1_reference();
  const MarketContext& m = t.market;
  for (std::size_t i = 0; i < 3; ++i) {
    t.frictionless_rates[i] = iso_rate(t.esr_target, t.pi_max[i], m.mu_bar, m.gamma, m.sigma);
  }
  const double r_old = t.frictionless_rates[0];

  const auto n = static_cast<std::ptrdiff_t>(t.cells.size());
  std::vector<std::exception_ptr> errors(t.cells.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    Table1Cell& c = t.cells[static_cast<std::size_t>(k)];
    try {
      MarketContext ctx = m;
      ctx.epsilon = c.epsilon;
      const DepositResult d = deposit_rate({t.pi_max[0], r_old, c.pi_max, ctx});
      c.r = d.r_new;
      c.esr = d.esr_achieved;
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& c : t.cells) {
    t.max_rate_deviation = std::max(t.max_rate_deviation, std::abs(c.r - c.r_reference));
    t.max_esr_deviation = std::max(t.max_esr_deviation, std::abs(c.esr - c.esr_reference));
  }
  return t;
}

}  // namespace tcbind::apps
