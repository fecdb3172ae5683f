#include "ppm/kernels.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ppm/pricing.hpp"

namespace ppm::kernels {

void evaluate_curve_serial(const PricingFunction& phi, const std::vector<double>& ys,
                           std::vector<double>& out) {
  out.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out[i] = phi.evaluate_exact(ys[i]);
  }
}

void evaluate_curve_omp(const PricingFunction& phi, const std::vector<double>& ys,
                        std::vector<double>& out) {
  out.resize(ys.size());
  const long n = static_cast<long>(ys.size());
  // Cost per point varies a lot (closed form vs. nested root solve).
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i) {
    out[i] = phi.evaluate_exact(ys[i]);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ppm::kernels
