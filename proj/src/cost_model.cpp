#include "ppm/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppm/error.hpp"

namespace ppm {
namespace {

constexpr double kDomainSlack = 1e-12;

double checked_utilization(double y) {
  if (!(y >= -kDomainSlack && y <= 1.0 + kDomainSlack)) {
    throw DomainError("utilization " + std::to_string(y) + " outside [0, 1]");
  }
  return std::clamp(y, 0.0, 1.0);
}

void check_price(double p) {
  if (!(p >= 0.0)) {
    throw DomainError("negative price " + std::to_string(p));
  }
}

}  // namespace

PowerCost::PowerCost(double a, double s) : a_(a), s_(s) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("cost scale a must be positive");
  }
  if (!(s > 1.0) || !std::isfinite(s)) {
    throw DomainError("cost exponent s must exceed 1");
  }
}

double PowerCost::cost(double y) const {
  return a_ * std::pow(checked_utilization(y), s_);
}

double PowerCost::marginal(double y) const {
  return a_ * s_ * std::pow(checked_utilization(y), s_ - 1.0);
}

InverseMarginal PowerCost::inverse_marginal(double p) const {
  check_price(p);
  const double c_high = a_ * s_;
  if (p > c_high) {
    return {1.0, true};
  }
  return {std::pow(p / c_high, 1.0 / (s_ - 1.0)), false};
}

double PowerCost::conjugate(double p) const {
  check_price(p);
  // f'(0) = 0, so the flat piece on [0, f'(0)] is just the point p = 0.
  const double c_high = a_ * s_;
  if (p >= c_high) {
    return p - a_;
  }
  const double y = std::pow(p / c_high, 1.0 / (s_ - 1.0));
  return p * y - a_ * std::pow(y, s_);
}

double PowerCost::conjugate_derivative(double p) const {
  check_price(p);
  const double c_high = a_ * s_;
  if (p >= c_high) {
    return 1.0;
  }
  return std::pow(p / c_high, 1.0 / (s_ - 1.0));
}

}  // namespace ppm
