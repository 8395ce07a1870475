#include "tcbind/riccati.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tcbind/errors.hpp"

namespace tcbind::riccati {

std::string_view to_string(Branch b) noexcept {
  switch (b) {
    case Branch::HyperbolicTanh: return "tanh";
    case Branch::Tangent: return "tan";
    case Branch::HyperbolicCoth: return "coth";
  }
  return "?";
}

Coefficients classify(const MarketSpec& spec, double lambda) {
  const double m = spec.drift_ratio();
  const double g = spec.gamma();
  const double k = spec.pi_max() / spec.pi_star() * (1.0 - lambda);

  Coefficients c;
  c.constant = spec.mu() * m / (g * spec.variance()) * (1.0 - (1.0 - k) * (1.0 - k));
  c.disc = (g - 1.0) * c.constant - (0.5 - m) * (0.5 - m);
  c.b = 0.5 - m + (g - 1.0) * spec.pi_max() * (1.0 - lambda);

  if (std::abs(c.disc) <= kDiscriminantGuard) {
    std::ostringstream os;
    os << "discriminant " << c.disc << " is numerically zero at lambda=" << lambda;
    throw Error(ErrorKind::RequiresLimitForm, os.str());
  }
  c.a = std::sqrt(std::abs(c.disc));
  if (c.disc > 0.0) {
    c.branch = Branch::Tangent;
  } else if (std::abs(c.b) < c.a) {
    c.branch = Branch::HyperbolicTanh;
  } else if (std::abs(c.b) > c.a) {
    c.branch = Branch::HyperbolicCoth;
  } else {
    throw Error(ErrorKind::BranchUndefined, "|b| == a: neither atanh nor arcoth is defined");
  }
  return c;
}

Solution::Solution(const MarketSpec& spec, double lambda)
    : lambda_(lambda),
      gamma_(spec.gamma()),
      drift_ratio_(spec.drift_ratio()),
      coeffs_(classify(spec, lambda)),
      x_end_(log_ul(lambda, spec.pi_max())),
      phase_(0.0) {
  const double a = coeffs_.a;
  const double ratio = coeffs_.b / a;
  switch (coeffs_.branch) {
    case Branch::Tangent: {
      phase_ = std::atan(ratio);
      const double half_pi = std::numbers::pi / 2.0;
      const double lo = phase_ + a * lower();
      const double hi = phase_ + a * upper();
      if (!(lo > -half_pi && hi < half_pi)) {
        std::ostringstream os;
        os << "tan argument leaves (-pi/2, pi/2) on the domain at lambda=" << lambda;
        throw Error(ErrorKind::PoleEncountered, os.str());
      }
      break;
    }
    case Branch::HyperbolicTanh:
      phase_ = std::atanh(ratio);
      break;
    case Branch::HyperbolicCoth: {
      phase_ = std::atanh(1.0 / ratio);
      // argument phase - a x must not cross zero
      const double z_lo = phase_ - a * lower();
      const double z_hi = phase_ - a * upper();
      if (!(z_lo * z_hi > 0.0)) {
        std::ostringstream os;
        os << "coth argument crosses zero on the domain at lambda=" << lambda;
        throw Error(ErrorKind::PoleEncountered, os.str());
      }
      break;
    }
  }
}

double Solution::value(double x) const {
  const double slack = 1e-9 * (std::abs(x_end_) + 1e-300) + 1e-15;
  if (!(x >= lower() - slack && x <= upper() + slack)) {
    std::ostringstream os;
    os << "x=" << x << " outside [" << lower() << ", " << upper() << "]";
    throw Error(ErrorKind::DomainError, os.str());
  }
  const double a = coeffs_.a;
  double v = 0.0;
  switch (coeffs_.branch) {
    case Branch::Tangent: v = a * std::tan(phase_ + a * x); break;
    case Branch::HyperbolicTanh: v = a * std::tanh(phase_ - a * x); break;
    case Branch::HyperbolicCoth: v = a / std::tanh(phase_ - a * x); break;
  }
  return (v + drift_ratio_ - 0.5) / (gamma_ - 1.0);
}

double Solution::rhs(double w) const noexcept {
  return (gamma_ - 1.0) * w * w - (2.0 * drift_ratio_ - 1.0) * w + coeffs_.constant;
}

double Solution::derivative(double x) const { return rhs(value(x)); }

double Solution::second_derivative(double x) const {
  const double w = value(x);
  return rhs(w) * (2.0 * (gamma_ - 1.0) * w - (2.0 * drift_ratio_ - 1.0));
}

}  // namespace tcbind::riccati
