#include "tcbind/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcbind {

namespace {

double merton_scale(const MarketSpec& spec) {
  return spec.mu() * spec.mu() / (2.0 * spec.gamma() * spec.variance());
}

// Shared shape of both turnover formulas: the buy-boundary and sell-boundary
// numerators differ between share and wealth turnover.
double turnover_formula(double mu, double sigma, double buy_num, double sell_num,
                        double log_ul) {
  if (log_ul == 0.0) return std::numeric_limits<double>::infinity();
  const double var = sigma * sigma;
  const double q = 2.0 * mu / var - 1.0;
  if (std::abs(q) < kLogBranchThreshold) {
    return var / (2.0 * log_ul) * (buy_num + sell_num);
  }
  // (u/l)^q - 1 = expm1(q log(u/l)); sign-safe in the leverage case.
  return 0.5 * var * q * (buy_num / std::expm1(q * log_ul) - sell_num / std::expm1(-q * log_ul));
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double frictionless_constrained_esr(const MarketSpec& spec) {
  const double k = spec.pi_max() / spec.pi_star();
  return spec.r() + merton_scale(spec) * (2.0 * k - k * k);
}

double equivalent_safe_rate(const MarketSpec& spec, const GapSolution& gap) {
  const double k = spec.pi_max() / spec.pi_star();
  const double one_minus = 1.0 - gap.lambda;
  return spec.r() + merton_scale(spec) * (2.0 * k / one_minus - k * k) * one_minus * one_minus;
}

LiquidityPremium liquidity_premium(const MarketSpec& spec, const GapSolution& gap) {
  const double k = spec.pi_max() / spec.pi_star();
  const double one_minus = 1.0 - gap.lambda;
  LiquidityPremium p;
  p.lip = spec.mu() - spec.mu() * std::sqrt(2.0 * k / one_minus - k * k) * one_minus;
  p.lip_c = spec.mu() * (1.0 - std::sqrt(2.0 * k - k * k));
  p.lip_t = p.lip - p.lip_c;
  p.lip_t_leading = asymptotics(spec).lip_t;
  return p;
}

double share_turnover_formula(double mu, double sigma, double pi_minus, double w_plus,
                              double log_ul) {
  return turnover_formula(mu, sigma, 1.0 - pi_minus, 1.0 - w_plus, log_ul);
}

double wealth_turnover_formula(double mu, double sigma, double pi_minus, double w_plus,
                               double log_ul) {
  return turnover_formula(mu, sigma, pi_minus * (1.0 - pi_minus), w_plus * (1.0 - w_plus),
                          log_ul);
}

double share_turnover(const MarketSpec& spec, const GapSolution& gap) {
  return share_turnover_formula(spec.mu(), spec.sigma(), gap.pi_minus, gap.w_plus, gap.log_ul);
}

double wealth_turnover(const MarketSpec& spec, const GapSolution& gap) {
  return wealth_turnover_formula(spec.mu(), spec.sigma(), gap.pi_minus, gap.w_plus, gap.log_ul);
}

FrictionAnalytics analyze(const MarketSpec& spec, const GapSolution& gap) {
  FrictionAnalytics a;
  a.esr = equivalent_safe_rate(spec, gap);
  a.esr_frictionless_constrained = frictionless_constrained_esr(spec);
  const LiquidityPremium p = liquidity_premium(spec, gap);
  a.lip = p.lip;
  a.lip_c = p.lip_c;
  a.lip_t = p.lip_t;
  a.lip_t_leading = p.lip_t_leading;
  a.sht = share_turnover(spec, gap);
  a.wet = wealth_turnover(spec, gap);
  a.pi_minus = gap.pi_minus;
  a.pi_plus = gap.pi_plus;
  return a;
}

double sht_coefficient(double gamma, double sigma, double pi_star, double pi_max) {
  const double one_minus = 1.0 - pi_max;
  return gamma * sigma * sigma * std::sqrt((pi_star - pi_max) * one_minus * one_minus / gamma);
}

AsymptoticAnalytics asymptotics(const MarketSpec& spec) {
  const double g = spec.gamma();
  const double var = spec.variance();
  const double pm = spec.pi_max();
  const double ps = spec.pi_star();
  const double k = pm / ps;
  const double gap2 = (1.0 - pm) * (1.0 - pm);
  const double root_eps = std::sqrt(spec.epsilon());

  AsymptoticAnalytics a;
  a.esr_frictionless = spec.r() + merton_scale(spec) * (2.0 * k - k * k);
  a.esr_coefficient = g * var * std::sqrt((ps - pm) * gap2 * pm * pm / g);
  a.lip_c = spec.mu() * (1.0 - std::sqrt(2.0 * k - k * k));
  a.lip_t_coefficient = g * var * std::sqrt(pm * (ps - pm) * gap2 / ((2.0 * ps - pm) * g));
  a.pi_minus_coefficient = std::sqrt(pm * pm * gap2 / (g * (ps - pm)));
  a.lambda_coefficient = lambda_asymptotic(spec).coefficient;
  a.sht_coefficient = sht_coefficient(g, spec.sigma(), ps, pm);
  a.wet_coefficient = g * var * std::sqrt((ps - pm) * gap2 * pm * pm / g);

  a.esr = a.esr_frictionless - a.esr_coefficient * root_eps;
  a.lip_t = a.lip_t_coefficient * root_eps;
  a.lip = a.lip_c + a.lip_t;
  a.pi_minus = pm - a.pi_minus_coefficient * root_eps;
  a.lambda = a.lambda_coefficient * root_eps;
  const double inf = std::numeric_limits<double>::infinity();
  a.sht = root_eps > 0.0 ? a.sht_coefficient / root_eps : inf;
  a.wet = root_eps > 0.0 ? a.wet_coefficient / root_eps : inf;
  return a;
}

TurnoverStatics turnover_comparative_statics(const MarketSpec& spec,
                                             const std::vector<double>& pi_max_values) {
  TurnoverStatics out;
  out.pi_star = spec.pi_star();
  out.leverage_threshold = (1.0 + 2.0 * out.pi_star) / 3.0;

  std::vector<double> sorted = pi_max_values;
  std::sort(sorted.begin(), sorted.end());
  const double g = spec.gamma();
  const double s = spec.sigma();
  for (double pm : sorted) {
    // Binding and non-degenerate, as for a full spec.
    (void)spec.with_pi_max(pm);
    TurnoverStaticsEntry e;
    e.pi_max = pm;
    e.sht_coefficient = sht_coefficient(g, s, out.pi_star, pm);
    // d/dp [(pi_star - p)(1 - p)^2] = -(1 - p)(1 + 2 pi_star - 3 p)
    const double factor = 1.0 + 2.0 * out.pi_star - 3.0 * pm;
    e.predicted_slope = std::abs(factor) < 1e-12 ? 0 : sign_of(-(1.0 - pm) * factor);
    const double h = 1e-6 * std::max(1.0, pm);
    e.numerical_slope = (sht_coefficient(g, s, out.pi_star, pm + h) -
                         sht_coefficient(g, s, out.pi_star, pm - h)) /
                        (2.0 * h);
    out.entries.push_back(e);
  }
  for (std::size_t i = 1; i < out.entries.size(); ++i) {
    const auto& lo = out.entries[i - 1];
    const auto& hi = out.entries[i];
    if (lo.predicted_slope != hi.predicted_slope || lo.predicted_slope == 0) continue;
    if (sign_of(hi.sht_coefficient - lo.sht_coefficient) != lo.predicted_slope) {
      out.ordering_consistent = false;
    }
  }
  return out;
}

}  // namespace tcbind
