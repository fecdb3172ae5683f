#pragma once

#include <optional>
#include <string>

#include "ppm/model.hpp"

namespace ppm {

struct EnumerationOptions {
  bool prune = true;
  bool parallel = true;
  double budget_bits = 40.0;  // cap on sum_n log2(1 + |offers_n|)
};

/// sum_n log2(1 + |offers_n|): log2 of the number of leaves of the search tree.
double enumeration_bits(const ArrivalInstance& instance);

/// Exact offline welfare: at most one offer per customer, y_k(t) <= 1 in
/// every slot. Depth-first search; pruning and parallelism never change the
/// result. Throws BudgetError above the enumeration budget.
double brute_force_opt(const ArrivalInstance& instance, const Setup& setup,
                       const EnumerationOptions& options = {});

/// Weak-duality bound from any nonnegative price table prices[k][t]:
///   sum_n max(0, max_b v_n^b - sum_t sum_k p_k(t) r_k^b) + sum_k sum_t f#_k(p_k(t)).
double dual_upper_bound(const ArrivalInstance& instance, const Setup& setup,
                        const PriceGrid& prices);

struct EvaluationReport {
  std::optional<double> w_opt_exact;
  double w_dual_bound = 0.0;
  double w_online = 0.0;
  std::optional<double> er_exact;
  std::optional<double> er_bound;
  bool both_zero = false;  // w_online = 0 and the reference welfare is 0
  std::string opt_method;  // "exact" or "dual"
};

EvaluationReport empirical_ratio(double w_online, std::optional<double> w_opt_exact,
                                 double w_dual_bound);

}  // namespace ppm
