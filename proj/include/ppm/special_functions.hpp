#pragma once

#include <functional>
#include <optional>

namespace ppm {

/// Lower incomplete gamma: integral of t^(s-1) e^(-t) over [0, x].
double lower_incomplete_gamma(double s, double x);

/// Integral of t^(s-1) e^(-t) over [lo, hi] (negative when hi < lo).
/// Picks the lower or upper incomplete form to avoid cancellation.
double gamma_interval(double s, double lo, double hi);

/// P_s(eta; alpha) = eta^s - alpha/(s-1) eta^(s-1) + alpha/(s-1).
///
/// Positive at 0, decreasing up to eta = alpha/s and increasing afterwards,
/// so it has two positive roots, one double root, or none.
struct CharPoly {
  double s;
  double alpha;

  double operator()(double eta) const;
  /// eta^(s-1) / P_s(eta)
  double integrand(double eta) const;
};

struct RootPair {
  double lower;
  double upper;
};

/// Positive roots of P_s, or nullopt below the double-root threshold
/// s^(s/(s-1)). Within 1e-9 of the threshold the roots are reported as
/// the coincident double root s^(1/(s-1)).
std::optional<RootPair> char_poly_roots(const CharPoly& cp);

/// Integral of eta^(s-1)/P_s(eta) over [lo, hi] by adaptive Simpson.
/// Throws BracketError if a root of P_s lies in the closed interval.
double char_integral(const CharPoly& cp, double lo, double hi);

/// Adaptive Simpson quadrature with relative tolerance `rel_tol`,
/// absolute floor `abs_floor`, and recursion depth cap `max_depth`.
double adaptive_simpson(const std::function<double(double)>& f, double lo,
                        double hi, double rel_tol = 1e-9,
                        double abs_floor = 1e-14, int max_depth = 60);

/// Bisection for a sign change of g on [lo, hi].
/// Stops when |g(x)| <= tol or the bracket width is <= tol * max(1, |x|).
double bisect(const std::function<double(double)>& g, double lo, double hi,
              double tol = 1e-10);

/// Bracketed Newton iteration falling back to bisection whenever a step
/// leaves the bracket or fails to halve the residual. Requires a sign change
/// of g on [lo, hi]; dg is g's derivative.
double newton_bisect(const std::function<double(double)>& g,
                     const std::function<double(double)>& dg, double lo,
                     double hi, double x_tol = 1e-14, double g_tol = 1e-12);

}  // namespace ppm
