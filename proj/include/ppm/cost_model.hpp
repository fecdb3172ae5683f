#pragma once

#include <memory>

namespace ppm {

struct InverseMarginal {
  double utilization;
  bool saturated;  // requested price exceeded f'(1)
};

/// Convex supply cost over normalized utilization [0, 1].
///
/// The conjugate is taken over the barrier extension of f (infinite outside
/// [0, 1]), so it is finite for every price and becomes affine above f'(1).
class SupplyCost {
 public:
  virtual ~SupplyCost() = default;

  virtual double cost(double y) const = 0;
  virtual double marginal(double y) const = 0;
  virtual InverseMarginal inverse_marginal(double p) const = 0;
  virtual double conjugate(double p) const = 0;
  virtual double conjugate_derivative(double p) const = 0;

  /// f'(0)
  double min_marginal() const { return marginal(0.0); }
  /// f'(1)
  double max_marginal() const { return marginal(1.0); }
};

/// f(y) = a * y^s with a > 0, s > 1.
class PowerCost final : public SupplyCost {
 public:
  PowerCost(double a, double s);

  double a() const { return a_; }
  double s() const { return s_; }

  double cost(double y) const override;
  double marginal(double y) const override;
  InverseMarginal inverse_marginal(double p) const override;
  double conjugate(double p) const override;
  double conjugate_derivative(double p) const override;

  friend bool operator==(const PowerCost&, const PowerCost&) = default;

 private:
  double a_;
  double s_;
};

}  // namespace ppm
