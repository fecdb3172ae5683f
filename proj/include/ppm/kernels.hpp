#pragma once

#include <vector>

namespace ppm {

class PricingFunction;

namespace kernels {

// Exact curve evaluation on a batch of utilizations. The serial versions are
// the references the parallel ones are tested against.
void evaluate_curve_serial(const PricingFunction& phi, const std::vector<double>& ys,
                           std::vector<double>& out);
void evaluate_curve_omp(const PricingFunction& phi, const std::vector<double>& ys,
                        std::vector<double>& out);

int max_threads();

}  // namespace kernels
}  // namespace ppm
