#include "ppm/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ppm/error.hpp"

namespace ppm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

// Series for the lower incomplete gamma; converges fast for x < s + 1.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      break;
    }
  }
  return sum * std::exp(-x + s * std::log(x));
}

// Modified Lentz continued fraction for the upper incomplete gamma; x >= s + 1.
double upper_gamma_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      break;
    }
  }
  return std::exp(-x + s * std::log(x)) * h;
}

double upper_incomplete_gamma(double s, double x) {
  if (x <= 0.0) {
    return std::tgamma(s);
  }
  if (x < s + 1.0) {
    return std::tgamma(s) - lower_gamma_series(s, x);
  }
  return upper_gamma_fraction(s, x);
}

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // The roundoff test stops the recursion once the tolerance has been
  // halved below what double precision can resolve.
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
      std::abs(delta) <= 64.0 * kEps * (std::abs(left) + std::abs(right)) ||
      lm <= a || rm >= b) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double simpson(const F& f, double lo, double hi, double rel_tol,
               double abs_floor, int max_depth) {
  if (lo == hi) {
    return 0.0;
  }
  // A coarse 16-panel pass sets the scale for the relative tolerance.
  constexpr int kPanels = 16;
  const double h = (hi - lo) / kPanels;
  double coarse = 0.0;
  double total = 0.0;
  std::array<double, kPanels + 1> xs{};
  std::array<double, kPanels + 1> fs{};
  for (int i = 0; i <= kPanels; ++i) {
    xs[i] = i == kPanels ? hi : lo + i * h;
    fs[i] = f(xs[i]);
  }
  std::array<double, kPanels> mids{};
  std::array<double, kPanels> wholes{};
  for (int i = 0; i < kPanels; ++i) {
    mids[i] = f(0.5 * (xs[i] + xs[i + 1]));
    wholes[i] = (xs[i + 1] - xs[i]) / 6.0 * (fs[i] + 4.0 * mids[i] + fs[i + 1]);
    coarse += wholes[i];
  }
  const double tol = std::max(rel_tol * std::abs(coarse), abs_floor) / kPanels;
  for (int i = 0; i < kPanels; ++i) {
    total += simpson_step(f, xs[i], xs[i + 1], fs[i], mids[i], fs[i + 1],
                          wholes[i], tol, max_depth);
  }
  return total;
}

}  // namespace

double lower_incomplete_gamma(double s, double x) {
  if (!(s > 0.0)) {
    throw DomainError("incomplete gamma needs s > 0");
  }
  if (!(x >= 0.0)) {
    throw DomainError("incomplete gamma needs x >= 0");
  }
  if (x == 0.0) {
    return 0.0;
  }
  if (std::isinf(x)) {
    return std::tgamma(s);
  }
  if (x < s + 1.0) {
    return lower_gamma_series(s, x);
  }
  return std::tgamma(s) - upper_gamma_fraction(s, x);
}

double gamma_interval(double s, double lo, double hi) {
  if (hi < lo) {
    return -gamma_interval(s, hi, lo);
  }
  if (lo == hi) {
    return 0.0;
  }
  if (lo >= s + 1.0) {
    return upper_incomplete_gamma(s, lo) - upper_incomplete_gamma(s, hi);
  }
  return lower_incomplete_gamma(s, hi) - lower_incomplete_gamma(s, lo);
}

namespace {

// Near the double root B = s^(1/(s-1)) of P_s(.; alpha_min) the plain
// polynomial loses all digits to cancellation. With eta = B(1 + x),
//   P_s(eta; alpha_min) = s B h(x),  h(x) = x g - (g - 1)/(s - 1),
// g = (1 + x)^(s-1), and h has the binomial series used below.
double char_poly_near_double_root(double s, double alpha, double eta) {
  const double b = std::pow(s, 1.0 / (s - 1.0));
  const double alpha_min = std::pow(s, s / (s - 1.0));
  const double x = eta / b - 1.0;
  const double a = s - 1.0;
  double binom = a;  // C(a, n) at n = 1
  double xp = x * x;
  double h = 0.0;
  for (int n = 1; n < 200; ++n) {
    const double next = binom * (a - n) / (n + 1);
    const double term = (binom - next / a) * xp;
    h += term;
    if (std::abs(term) <= kEps * std::abs(h)) break;
    binom = next;
    xp *= x;
  }
  const double shift = (alpha - alpha_min) / a * (std::pow(eta, a) - 1.0);
  return s * b * h - shift;
}

bool near_double_root(double s, double alpha, double eta) {
  const double alpha_min = std::pow(s, s / (s - 1.0));
  const double b = std::pow(s, 1.0 / (s - 1.0));
  return std::abs(alpha - alpha_min) <= 1e-3 * alpha_min &&
         std::abs(eta - b) <= 0.25 * b;
}

}  // namespace

double CharPoly::operator()(double eta) const {
  if (near_double_root(s, alpha, eta)) {
    return char_poly_near_double_root(s, alpha, eta);
  }
  const double k = alpha / (s - 1.0);
  const double lead = std::pow(eta, s - 1.0);
  return lead * eta - k * lead + k;
}

double CharPoly::integrand(double eta) const {
  return std::pow(eta, s - 1.0) / (*this)(eta);
}

std::optional<RootPair> char_poly_roots(const CharPoly& cp) {
  const double s = cp.s;
  const double alpha_min = std::pow(s, s / (s - 1.0));
  if (cp.alpha < alpha_min * (1.0 - 1e-12) && alpha_min - cp.alpha >= 1e-9) {
    return std::nullopt;
  }
  if (std::abs(cp.alpha - alpha_min) < 1e-9) {
    const double r = std::pow(s, 1.0 / (s - 1.0));
    return RootPair{r, r};
  }
  const double peak = cp.alpha / s;
  // Sign-change bisection to the last representable bit.
  const auto refine = [&](double lo, double hi, bool increasing) {
    for (int i = 0; i < 300; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double p = cp(mid);
      if ((p > 0.0) == increasing) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double lower = refine(0.0, peak, false);
  const double upper = refine(peak, cp.alpha / (s - 1.0), true);
  return RootPair{lower, upper};
}

double char_integral(const CharPoly& cp, double lo, double hi) {
  if (lo == hi) {
    return 0.0;
  }
  if (hi < lo) {
    return -char_integral(cp, hi, lo);
  }
  if (!(lo >= 0.0)) {
    throw DomainError("characteristic integral needs lo >= 0");
  }
  if (const auto roots = char_poly_roots(cp)) {
    const auto inside = [&](double r) { return r >= lo && r <= hi; };
    if (inside(roots->lower) || inside(roots->upper)) {
      throw BracketError("characteristic integral interval [" +
                         std::to_string(lo) + ", " + std::to_string(hi) +
                         "] contains a root of P_s");
    }
  }
  return simpson([&cp](double eta) { return cp.integrand(eta); }, lo, hi,
                 1e-9, 1e-14, 60);
}

double adaptive_simpson(const std::function<double(double)>& f, double lo,
                        double hi, double rel_tol, double abs_floor,
                        int max_depth) {
  if (hi < lo) {
    return -simpson(f, hi, lo, rel_tol, abs_floor, max_depth);
  }
  return simpson(f, lo, hi, rel_tol, abs_floor, max_depth);
}

double bisect(const std::function<double(double)>& g, double lo, double hi,
              double tol) {
  double g_lo = g(lo);
  const double g_hi = g(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 2000; ++i) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      return mid;  // bracket exhausted at machine precision
    }
    const double g_mid = g(mid);
    if (std::abs(g_mid) <= tol) {
      return mid;
    }
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= tol * std::max(1.0, std::abs(mid))) {
      return 0.5 * (lo + hi);
    }
  }
  return mid;
}

double newton_bisect(const std::function<double(double)>& g,
                     const std::function<double(double)>& dg, double lo,
                     double hi, double x_tol, double g_tol) {
  const double g_lo = g(lo);
  const double g_hi = g(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  // Orient so that g(neg) < 0 < g(pos).
  double neg = g_lo < 0.0 ? lo : hi;
  double pos = g_lo < 0.0 ? hi : lo;
  double x = 0.5 * (lo + hi);
  double gx = g(x);
  double step_before = std::abs(hi - lo);
  double step = step_before;
  for (int i = 0; i < 500; ++i) {
    if (std::abs(gx) <= g_tol) {
      return x;
    }
    if (gx < 0.0) {
      neg = x;
    } else {
      pos = x;
    }
    const double d = dg(x);
    const double newton = x - gx / d;
    const double a = std::min(neg, pos);
    const double b = std::max(neg, pos);
    const bool in_bracket = std::isfinite(newton) && newton > a && newton < b;
    if (!in_bracket || std::abs(2.0 * gx) > std::abs(step_before * d)) {
      step_before = step;
      step = 0.5 * (b - a);
      x = a + step;
    } else {
      step_before = step;
      step = std::abs(newton - x);
      x = newton;
    }
    if (step <= x_tol * std::max(1.0, std::abs(x))) {
      return x;
    }
    gx = g(x);
  }
  return x;
}

}  // namespace ppm
