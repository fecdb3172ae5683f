#include "ppm/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "ppm/error.hpp"
#include "ppm/kernels.hpp"

namespace ppm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRootTol = 1e-14;

void check_open_unit(double u, const char* what) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError(std::string(what) + " must lie in (0, 1), got " +
                      std::to_string(u));
  }
}

void check_high_uncertainty(const ResourceSetup& rs) {
  if (!(rs.p_bar > rs.c_high())) {
    throw DomainError("operation needs p_bar > f'(1)");
  }
}

// Solution of phi' = alpha (phi - c_high y^(s-1)), phi(u) = c_high, written
// so that e^(alpha u) only multiplies a bounded integral.
double ivp_value(double s, double c_high, double alpha, double u, double y) {
  const double integral = gamma_interval(s, alpha * u, alpha * y);
  const double bracket =
      1.0 - std::pow(alpha, 1.0 - s) * std::exp(alpha * u) * integral;
  return c_high * std::exp(alpha * (y - u)) * bracket;
}

// Integral of the characteristic integrand without the root check; callers
// keep [lo, hi] inside a root-free bracket.
double char_segment(const CharPoly& cp, double lo, double hi) {
  return adaptive_simpson([&cp](double eta) { return cp.integrand(eta); }, lo,
                          hi, 1e-12, 1e-15, 60);
}

double anchor_tolerance(const CharPoly& cp) {
  return 1e-13 * (1.0 + cp.alpha / (cp.s - 1.0));
}

// Closest point to the barrier that is still evaluated; the integral
// diverges at the root itself.
double approach_end(double anchor, double barrier) {
  return barrier > anchor ? barrier * (1.0 - 1e-12) : barrier * (1.0 + 1e-12);
}

std::shared_ptr<const curve::ChiTable> build_chi_table(
    const CharPoly& cp, double anchor, std::optional<double> barrier) {
  if (!barrier || std::abs(cp(anchor)) <= anchor_tolerance(cp)) {
    return nullptr;
  }
  const double end = approach_end(anchor, *barrier);
  const double span = end - anchor;
  auto table = std::make_shared<curve::ChiTable>();
  table->chi.push_back(anchor);
  table->integral.push_back(0.0);
  double gap = span;
  // Past I = 700 the knot ratio exceeds e^700, beyond any double utilization.
  while (std::abs(gap) > 1e-12 * std::abs(end) && table->integral.back() < 700.0) {
    gap *= 0.85;
    const double x = end - gap;
    table->integral.push_back(table->integral.back() +
                              char_segment(cp, table->chi.back(), x));
    table->chi.push_back(x);
  }
  table->integral.push_back(table->integral.back() +
                            char_segment(cp, table->chi.back(), end));
  table->chi.push_back(end);
  return table;
}

double solve_chi(const CharPoly& cp, double anchor, double target,
                 std::optional<double> barrier,
                 const curve::ChiTable* table = nullptr) {
  if (target == 0.0) {
    return anchor;
  }
  if (std::abs(cp(anchor)) <= anchor_tolerance(cp)) {
    return anchor;  // anchor is a root: the scaled solution is linear
  }
  double near = anchor;
  double far = barrier ? approach_end(anchor, *barrier) : 1e3 * anchor;
  double last_x = anchor;
  double last_i = 0.0;

  if (table) {
    const auto& in = table->integral;
    const auto it = std::upper_bound(in.begin(), in.end(), target);
    if (it == in.end()) {
      return table->chi.back();
    }
    const auto j = static_cast<std::size_t>(it - in.begin()) - 1;
    near = table->chi[j];
    far = table->chi[j + 1];
    last_x = near;
    last_i = in[j];
  }

  const auto residual = [&](double x) {
    const double i = last_i + char_segment(cp, last_x, x);
    last_x = x;
    last_i = i;
    return i - target;
  };

  if (!barrier) {
    // No root ahead: the integral only grows like ln(chi), so push outward.
    int grow = 0;
    while (residual(far) < 0.0) {
      near = far;
      far *= 1e3;
      if (++grow > 40) {
        throw BracketError("scaled price root: bracket expansion failed");
      }
    }
  }

  // Safeguarded Newton on g(chi) = I(anchor, chi) - target; the integrand is
  // g' and has one sign on the bracket.
  double x = near;
  double g = residual(x);
  for (int it = 0; it < 300; ++it) {
    const double lo = std::min(near, far);
    const double hi = std::max(near, far);
    double next = x - g / cp.integrand(x);
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (near + far);
    }
    const double step = std::abs(next - x);
    x = next;
    g = residual(x);
    if (std::abs(g) <= 1e-13 * std::max(1.0, target) ||
        step <= 1e-16 * std::abs(x)) {
      return x;
    }
    if (g < 0.0) {
      near = x;
    } else {
      far = x;
    }
  }
  return x;
}

std::optional<double> barrier_root(const CharPoly& cp, double anchor) {
  const auto roots = char_poly_roots(cp);
  if (!roots) {
    return std::nullopt;
  }
  const double p_anchor = cp(anchor);
  if (p_anchor > 0.0) {
    if (roots->lower > anchor) return roots->lower;
    if (roots->upper > anchor) return roots->upper;
    return std::nullopt;
  }
  // Between the roots: chi decreases toward the lower one.
  return roots->lower;
}

}  // namespace

ResourceSetup::ResourceSetup(PowerCost cost, double p_bar)
    : cost(cost), p_bar(p_bar) {
  if (!(p_bar > cost.min_marginal()) || !std::isfinite(p_bar)) {
    throw DomainError("p_bar must exceed f'(0) = 0");
  }
}

std::string to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::LUC: return "LUC";
    case RegimeTag::HUC1: return "HUC1";
    case RegimeTag::HUC2: return "HUC2";
  }
  return "?";
}

std::string to_string(PricingScheme scheme) {
  switch (scheme) {
    case PricingScheme::Optimal: return "PPM-OP";
    case PricingScheme::Myopic: return "PPM-MP";
    case PricingScheme::TwiceIndex: return "PPM-TP";
  }
  return "?";
}

RegimeConstants regime_constants(double s) {
  if (!(s > 1.0)) {
    throw DomainError("cost exponent s must exceed 1");
  }
  return {std::pow(s, s / (s - 1.0)), std::pow(1.0 / s, 1.0 / (s - 1.0))};
}

double alpha_of_u(double s, double u) {
  check_open_unit(u, "dividing threshold");
  return (s - 1.0) / (u - std::pow(u, s));
}

double lower_bound_alpha1(double s, double u) {
  check_open_unit(u, "dividing threshold");
  const auto consts = regime_constants(s);
  return u < consts.u_s ? alpha_of_u(s, u) : consts.alpha_min;
}

double lower_bound_alpha2(const ResourceSetup& rs, double u) {
  check_open_unit(u, "dividing threshold");
  check_high_uncertainty(rs);
  const double s = rs.s();
  const double c_high = rs.c_high();
  // phi(1; alpha, u) increases with alpha; find where it reaches p_bar.
  const auto g = [&](double alpha) {
    return ivp_value(s, c_high, alpha, u, 1.0) / rs.p_bar - 1.0;
  };
  double lo = 1e-6;
  double hi = 1.0;
  int doublings = 0;
  while (!(g(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 64) {
      throw BracketError("lower_bound_alpha2: bracket expansion failed");
    }
  }
  return bisect(g, lo, hi, kRootTol);
}

double capacity_price(const ResourceSetup& rs) {
  const double s = rs.s();
  const auto consts = regime_constants(s);
  const double tail = gamma_interval(s, s, consts.alpha_min);
  return rs.c_high() *
         (std::exp(-s) - std::pow(s, -s) * tail) * std::exp(consts.alpha_min);
}

Regime classify(const ResourceSetup& rs) {
  const double c_high = rs.c_high();
  const double c_s = capacity_price(rs);
  if (rs.p_bar <= c_high) {
    const double v = rs.cost.inverse_marginal(rs.p_bar).utilization;
    const double w = rs.cost.inverse_marginal(rs.p_bar / rs.s()).utilization;
    return {RegimeTag::LUC, c_s, v, w};
  }
  return {rs.p_bar <= c_s ? RegimeTag::HUC1 : RegimeTag::HUC2, c_s,
          std::nullopt, std::nullopt};
}

double critical_dividing_threshold(const ResourceSetup& rs) {
  check_high_uncertainty(rs);
  const double s = rs.s();
  const double c_high = rs.c_high();
  const auto consts = regime_constants(s);
  const double c_s = capacity_price(rs);
  if (rs.p_bar <= c_s) {
    // Minimal ratio on [u_s, 1): phi(1; u) falls from C_s to f'(1).
    const auto g = [&](double u) {
      return ivp_value(s, c_high, consts.alpha_min, u, 1.0) / rs.p_bar - 1.0;
    };
    if (g(consts.u_s) <= 0.0) {
      return consts.u_s;
    }
    return bisect(g, consts.u_s, 1.0, kRootTol);
  }
  const auto g = [&](double u) {
    const double value = ivp_value(s, c_high, alpha_of_u(s, u), u, 1.0);
    return std::isnan(value) ? std::numeric_limits<double>::infinity()
                             : value / rs.p_bar - 1.0;
  };
  double lo = 0.5 * consts.u_s;
  int halvings = 0;
  while (!(g(lo) > 0.0)) {
    lo *= 0.5;
    if (++halvings > 200) {
      throw BracketError("critical dividing threshold not bracketed");
    }
  }
  return bisect(g, lo, consts.u_s, kRootTol);
}

double phi_ivp(const ResourceSetup& rs, double u, double y) {
  check_open_unit(u, "dividing threshold");
  if (y < u) {
    throw DomainError("phi_ivp is defined for y >= u");
  }
  return ivp_value(rs.s(), rs.c_high(), lower_bound_alpha1(rs.s(), u), u, y);
}

double terminal_utilization(const ResourceSetup& rs, double u) {
  check_high_uncertainty(rs);
  const auto g = [&](double y) { return phi_ivp(rs, u, y) / rs.p_bar - 1.0; };
  if (g(1.0) <= 1e-12) {
    return 1.0;
  }
  return bisect(g, u, 1.0, kRootTol);
}

double rho_s(const ResourceSetup& rs) {
  check_high_uncertainty(rs);
  const double s = rs.s();
  const auto consts = regime_constants(s);
  const double c_high = rs.c_high();
  const auto g = [&](double y) {
    return ivp_value(s, c_high, consts.alpha_min, consts.u_s, y) / rs.p_bar - 1.0;
  };
  if (g(1.0) < -1e-12) {
    throw BracketError("rho_s: p_bar exceeds C_s, no root in (u_s, 1]");
  }
  if (g(1.0) <= 1e-12) {
    return 1.0;
  }
  return bisect(g, consts.u_s, 1.0, kRootTol);
}

double scaled_price_root(const CharPoly& cp, double anchor, double y,
                         double knot) {
  if (!(y > 0.0 && y <= knot)) {
    throw DomainError("scaled_price_root needs 0 < y <= knot");
  }
  if (!(anchor > 0.0)) {
    throw DomainError("scaled_price_root needs a positive anchor");
  }
  const auto barrier = barrier_root(cp, anchor);
  const auto table = build_chi_table(cp, anchor, barrier);
  return solve_chi(cp, anchor, std::log(knot / y), barrier, table.get()) * y;
}

double optimal_ratio(const ResourceSetup& rs) {
  const Regime regime = classify(rs);
  if (regime.tag != RegimeTag::HUC2) {
    return regime_constants(rs.s()).alpha_min;
  }
  return alpha_of_u(rs.s(), critical_dividing_threshold(rs));
}

namespace curve {

ScaledRoot make_scaled_root(double c_high, double s, double alpha, double anchor,
                            double knot) {
  const CharPoly cp{s, alpha};
  const auto barrier = barrier_root(cp, anchor);
  return {c_high, s, alpha, anchor, knot, barrier,
          build_chi_table(cp, anchor, barrier)};
}

double evaluate(const Shape& shape, double y) {
  return std::visit(
      [y](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return c.c_high * std::pow(std::max(c.scale * y, 0.0), c.s - 1.0);
        } else if constexpr (std::is_same_v<T, ScaledRoot>) {
          if (y <= 0.0) return 0.0;
          if (y >= c.knot) {
            return c.c_high * std::pow(c.anchor * c.knot, c.s - 1.0);
          }
          const CharPoly cp{c.s, c.alpha};
          const double chi = solve_chi(cp, c.anchor, std::log(c.knot / y),
                                       c.barrier, c.nodes.get());
          return c.c_high * std::pow(chi * y, c.s - 1.0);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return ivp_value(c.s, c.c_high, c.alpha, c.u, y);
        } else if constexpr (std::is_same_v<T, Geometric>) {
          return c.c_high * std::pow(c.ratio, 2.0 * y - 1.0);
        } else {
          return c.price;
        }
      },
      shape);
}

}  // namespace curve

PricingFunction::PricingFunction(PricingScheme scheme, Regime regime,
                                 std::optional<double> alpha,
                                 PricingKnots knots, double domain_end,
                                 double terminal_price, double c_high, double s,
                                 std::vector<curve::Piece> pieces)
    : scheme_(scheme),
      regime_(regime),
      alpha_(alpha),
      knots_(knots),
      domain_end_(domain_end),
      terminal_price_(terminal_price),
      c_high_(c_high),
      s_(s),
      pieces_(std::move(pieces)) {
  if (pieces_.empty()) {
    throw SynthesisError("pricing function needs at least one piece");
  }
}

double PricingFunction::evaluate_exact(double y) const {
  for (const auto& piece : pieces_) {
    if (y <= piece.end) {
      return curve::evaluate(piece.shape, y);
    }
  }
  return curve::evaluate(pieces_.back().shape, y);
}

double PricingFunction::operator()(double y) const {
  if (table_ && y >= table_->ys.front() && y <= table_->ys.back()) {
    return interpolate(*table_, y);
  }
  return evaluate_exact(y);
}

std::size_t PricingFunction::grid_size() const {
  return table_ ? table_->grid_size : 0;
}

double PricingFunction::interpolate(const Table& table, double y) const {
  const auto& ys = table.ys;
  auto it = std::lower_bound(ys.begin(), ys.end(), y);
  if (it == ys.begin()) {
    return c_high_ * std::pow(table.scaled.front(), s_ - 1.0);
  }
  const std::size_t hi = static_cast<std::size_t>(it - ys.begin());
  const std::size_t lo = hi - 1;
  const double t = (y - ys[lo]) / (ys[hi] - ys[lo]);
  const double scaled = table.scaled[lo] + t * (table.scaled[hi] - table.scaled[lo]);
  return c_high_ * std::pow(scaled, s_ - 1.0);
}

PricingFunction PricingFunction::tabulated(std::size_t grid_size,
                                           bool parallel) const {
  if (grid_size < 2) {
    throw DomainError("tabulation needs at least 2 grid points");
  }
  const double h = 1.0 / static_cast<double>(grid_size - 1);
  std::vector<double> ys;
  ys.reserve(grid_size + grid_size / 2 + pieces_.size());
  // Geometric refinement on [1e-12, 256h] resolves the power-law behaviour
  // of root-based curves at the origin.
  const std::size_t n_geo = grid_size / 2;
  const double log_lo = std::log(1e-12);
  const double log_hi = std::log(std::min(0.5, 256.0 * h));
  for (std::size_t i = 0; i < n_geo; ++i) {
    ys.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                       static_cast<double>(n_geo)));
  }
  for (std::size_t i = 1; i < grid_size; ++i) {
    ys.push_back(static_cast<double>(i) * h);
  }
  for (const auto& piece : pieces_) {
    if (piece.end > 0.0 && piece.end < 1.0) {
      ys.push_back(piece.end);
    }
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<double> prices(ys.size());
  if (parallel) {
    kernels::evaluate_curve_omp(*this, ys, prices);
  } else {
    kernels::evaluate_curve_serial(*this, ys, prices);
  }
  auto table = std::make_shared<Table>();
  table->grid_size = grid_size;
  table->scaled.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    table->scaled[i] = std::pow(prices[i] / c_high_, 1.0 / (s_ - 1.0));
  }
  table->ys = std::move(ys);

  PricingFunction copy = *this;
  copy.table_ = std::move(table);
  return copy;
}

PricingFunction synthesize_optimal(const ResourceSetup& rs, double choice) {
  if (!(choice >= 0.0 && choice <= 1.0)) {
    throw DomainError("aggressiveness choice must lie in [0, 1]");
  }
  const double s = rs.s();
  const double c_high = rs.c_high();
  const auto consts = regime_constants(s);
  const Regime regime = classify(rs);
  try {
    switch (regime.tag) {
      case RegimeTag::LUC: {
        const double v = *regime.v;
        const double w = *regime.w;
        const double m = w + choice * (v - w);
        // phi_m(m) = p_bar, i.e. the scaled price equals v at the knot.
        const double anchor = v / m;
        const CharPoly cp{s, consts.alpha_min};
        std::vector<curve::Piece> pieces;
        if (std::abs(cp(anchor)) <= 1e-13 * (1.0 + consts.alpha_min / (s - 1.0)) ||
            choice == 0.0) {
          pieces.push_back({m, curve::PowerLaw{c_high, s, anchor}});
        } else {
          pieces.push_back({m, curve::make_scaled_root(c_high, s, consts.alpha_min, anchor, m)});
        }
        // Past m the scaled price keeps slope `anchor`, so the curve stays
        // above p_bar and above the marginal cost.
        pieces.push_back({std::numeric_limits<double>::infinity(),
                          curve::PowerLaw{c_high, s, anchor}});
        return {PricingScheme::Optimal, regime, consts.alpha_min,
                PricingKnots{m, std::nullopt, std::nullopt, std::nullopt},
                m, rs.p_bar, c_high, s, std::move(pieces)};
      }
      case RegimeTag::HUC1: {
        const double u_cdt = critical_dividing_threshold(rs);
        const double u = consts.u_s + choice * (u_cdt - consts.u_s);
        const double rho = terminal_utilization(rs, u);
        const double anchor = 1.0 / u;
        const CharPoly cp{s, consts.alpha_min};
        std::vector<curve::Piece> pieces;
        if (choice == 0.0 ||
            std::abs(cp(anchor)) <= 1e-13 * (1.0 + consts.alpha_min / (s - 1.0))) {
          pieces.push_back({u, curve::PowerLaw{c_high, s, anchor}});
        } else {
          pieces.push_back({u, curve::make_scaled_root(c_high, s, consts.alpha_min, anchor, u)});
        }
        pieces.push_back({std::numeric_limits<double>::infinity(),
                          curve::Exponential{c_high, s, consts.alpha_min, u}});
        return {PricingScheme::Optimal, regime, consts.alpha_min,
                PricingKnots{std::nullopt, u, rho, std::nullopt},
                rho, rs.p_bar, c_high, s, std::move(pieces)};
      }
      case RegimeTag::HUC2: {
        const double u_cdt = critical_dividing_threshold(rs);
        const double alpha = alpha_of_u(s, u_cdt);
        std::vector<curve::Piece> pieces;
        pieces.push_back({u_cdt, curve::PowerLaw{c_high, s, 1.0 / u_cdt}});
        pieces.push_back({std::numeric_limits<double>::infinity(),
                          curve::Exponential{c_high, s, alpha, u_cdt}});
        return {PricingScheme::Optimal, regime, alpha,
                PricingKnots{std::nullopt, std::nullopt, std::nullopt, u_cdt},
                1.0, rs.p_bar, c_high, s, std::move(pieces)};
      }
    }
  } catch (const BracketError& e) {
    throw SynthesisError(std::string("synthesis infeasible: ") + e.what());
  }
  throw SynthesisError("unknown regime");
}

PricingFunction benchmark_pricing(BenchmarkKind kind, const ResourceSetup& rs) {
  const double s = rs.s();
  const double c_high = rs.c_high();
  const Regime regime = classify(rs);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<curve::Piece> pieces;
  if (kind == BenchmarkKind::Myopic) {
    pieces.push_back({inf, curve::PowerLaw{c_high, s, 1.0}});
    return {PricingScheme::Myopic, regime, std::nullopt, PricingKnots{},
            1.0, c_high, c_high, s, std::move(pieces)};
  }
  pieces.push_back({0.5, curve::PowerLaw{c_high, s, 2.0}});
  if (rs.p_bar > c_high) {
    pieces.push_back({inf, curve::Geometric{c_high, rs.p_bar / c_high}});
  } else {
    pieces.push_back({inf, curve::Constant{c_high}});
  }
  return {PricingScheme::TwiceIndex, regime, std::nullopt, PricingKnots{},
          1.0, std::max(rs.p_bar, c_high), c_high, s, std::move(pieces)};
}

void write_curve_csv(std::ostream& out, const PricingFunction& phi,
                     std::size_t points) {
  if (points < 2) {
    throw DomainError("curve export needs at least 2 points");
  }
  out << "y,price\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < points; ++i) {
    const double y = static_cast<double>(i) / static_cast<double>(points - 1);
    out << y << ',' << phi(y) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ppm
