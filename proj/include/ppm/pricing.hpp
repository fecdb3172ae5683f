#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ppm/cost_model.hpp"
#include "ppm/special_functions.hpp"

namespace ppm {

/// One resource type: its power supply cost and the per-unit (per-slot)
/// valuation bound p_bar.
struct ResourceSetup {
  PowerCost cost;
  double p_bar;

  ResourceSetup(PowerCost cost, double p_bar);

  double c_high() const { return cost.max_marginal(); }
  double s() const { return cost.s(); }
};

enum class RegimeTag { LUC, HUC1, HUC2 };

std::string to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag;
  double c_s;                // critical bound between HUC1 and HUC2
  std::optional<double> v;   // f'^-1(p_bar), LUC only
  std::optional<double> w;   // f'^-1(p_bar / s), LUC only
};

struct RegimeConstants {
  double alpha_min;  // s^(s/(s-1))
  double u_s;        // (1/s)^(1/(s-1))
};

RegimeConstants regime_constants(double s);

/// (s-1) / (u - u^s), the ratio that makes y/u the scaled solution on (0, u].
double alpha_of_u(double s, double u);

/// Smallest ratio for which the first-branch problem on (0, u) has an
/// increasing solution.
double lower_bound_alpha1(double s, double u);

/// Smallest ratio for which the second-branch problem on (u, 1) reaches
/// p_bar at full utilization. Requires p_bar > f'(1).
double lower_bound_alpha2(const ResourceSetup& rs, double u);

/// Price reached at y = 1 by the second branch started at u_s with the
/// minimal ratio; p_bar above this value puts the setup in HUC2.
double capacity_price(const ResourceSetup& rs);

Regime classify(const ResourceSetup& rs);

/// Dividing threshold at which the two lower bounds on the ratio meet.
double critical_dividing_threshold(const ResourceSetup& rs);

/// Closed-form solution of phi' = alpha (phi - f'(y)) with phi(u) = f'(1)
/// and alpha = lower_bound_alpha1(s, u), evaluated at y >= u.
double phi_ivp(const ResourceSetup& rs, double u, double y);

/// Utilization where phi_ivp(.; u_s) reaches p_bar. HUC1 only.
double rho_s(const ResourceSetup& rs);

/// Utilization where phi_ivp(.; u) reaches p_bar, clamped to 1 when the
/// curve only touches p_bar at full capacity.
double terminal_utilization(const ResourceSetup& rs, double u);

/// Scaled price phi_scaled(y) = chi * y, where chi solves
///   integral_{anchor}^{chi} eta^(s-1)/P_s(eta) d eta = ln(knot / y).
/// chi stays on the same side of anchor as the nearest root of P_s, which
/// the integral cannot cross.
double scaled_price_root(const CharPoly& cp, double anchor, double y,
                         double knot);

double optimal_ratio(const ResourceSetup& rs);

namespace curve {

/// c_high * max(scale * y, 0)^(s-1)
struct PowerLaw {
  double c_high;
  double s;
  double scale;
};

/// Nodes (chi_j, I(anchor, chi_j)) marching from the anchor toward the
/// barrier root; used to start each solve next to its answer.
struct ChiTable {
  std::vector<double> chi;
  std::vector<double> integral;
};

/// c_high * (chi(y) * y)^(s-1) with chi from scaled_price_root.
struct ScaledRoot {
  double c_high;
  double s;
  double alpha;
  double anchor;
  double knot;
  std::optional<double> barrier;  // root of P_s bounding chi, if any
  std::shared_ptr<const ChiTable> nodes;
};

ScaledRoot make_scaled_root(double c_high, double s, double alpha, double anchor,
                            double knot);

/// phi_ivp with an explicit ratio.
struct Exponential {
  double c_high;
  double s;
  double alpha;
  double u;
};

/// c_high * ratio^(2y - 1)
struct Geometric {
  double c_high;
  double ratio;
};

struct Constant {
  double price;
};

using Shape = std::variant<PowerLaw, ScaledRoot, Exponential, Geometric, Constant>;

double evaluate(const Shape& shape, double y);

/// A shape applied on (previous end, end]; the first piece also covers 0.
struct Piece {
  double end;
  Shape shape;
};

}  // namespace curve

enum class PricingScheme { Optimal, Myopic, TwiceIndex };

std::string to_string(PricingScheme scheme);

struct PricingKnots {
  std::optional<double> m;      // LUC knot
  std::optional<double> u;      // HUC1 dividing threshold
  std::optional<double> rho;    // HUC1 utilization where price reaches p_bar
  std::optional<double> u_cdt;  // HUC2 dividing threshold
};

enum class EvalMode { OnTheFly, Tabulated };

/// Monotone posted-price curve y -> phi(y) for one resource.
///
/// Evaluation is left-continuous at knots. Beyond `domain_end` the curve
/// keeps rising along the branch that produced it, so prices stay >= the
/// terminal price.
class PricingFunction {
 public:
  PricingFunction(PricingScheme scheme, Regime regime,
                  std::optional<double> alpha, PricingKnots knots,
                  double domain_end, double terminal_price, double c_high,
                  double s, std::vector<curve::Piece> pieces);

  double operator()(double y) const;
  double evaluate_exact(double y) const;

  /// Copy that interpolates a precomputed table of grid_size uniform knots
  /// (plus a geometric refinement near 0 and every branch knot). The table
  /// stores (phi / c_high)^(1/(s-1)), which is close to linear in y.
  PricingFunction tabulated(std::size_t grid_size = 1u << 14,
                            bool parallel = true) const;

  PricingScheme scheme() const { return scheme_; }
  const Regime& regime() const { return regime_; }
  std::optional<double> alpha() const { return alpha_; }
  const PricingKnots& knots() const { return knots_; }
  double domain_end() const { return domain_end_; }
  double terminal_price() const { return terminal_price_; }
  EvalMode eval_mode() const { return table_ ? EvalMode::Tabulated : EvalMode::OnTheFly; }
  std::size_t grid_size() const;
  const std::vector<curve::Piece>& pieces() const { return pieces_; }

 private:
  struct Table {
    std::size_t grid_size;
    std::vector<double> ys;
    std::vector<double> scaled;
  };

  double interpolate(const Table& table, double y) const;

  PricingScheme scheme_;
  Regime regime_;
  std::optional<double> alpha_;
  PricingKnots knots_;
  double domain_end_;
  double terminal_price_;
  double c_high_;
  double s_;
  std::vector<curve::Piece> pieces_;
  std::shared_ptr<const Table> table_;
};

/// Optimal curve for the setup. `choice` in [0, 1] moves the knot from the
/// most conservative member of the optimal family (0: m = w or u = u_s) to
/// the most aggressive (1: m = v or u = u_cdt). HUC2 has a single optimum
/// and ignores it.
PricingFunction synthesize_optimal(const ResourceSetup& rs, double choice = 0.0);

enum class BenchmarkKind { Myopic, TwiceIndex };

/// Myopic: phi = f'(y). TwiceIndex: phi = f'(2y) on [0, 0.5], then
/// f'(1) * (p_bar/f'(1))^(2y-1) up to p_bar at full capacity.
PricingFunction benchmark_pricing(BenchmarkKind kind, const ResourceSetup& rs);

/// Writes "y,price" rows on a uniform grid of `points` utilizations in [0, 1].
void write_curve_csv(std::ostream& out, const PricingFunction& phi,
                     std::size_t points);

}  // namespace ppm
