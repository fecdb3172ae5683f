#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ppm/model.hpp"
#include "ppm/pricing.hpp"

namespace ppm {

/// Quoted unit prices p_k(t) for the slots of one customer; prices[k][i] is
/// the price of resource k at slot arrival + i.
struct Quote {
  int first_slot = 0;
  std::vector<std::vector<double>> prices;
};

struct BundleChoice {
  std::optional<std::size_t> offer;  // index into Customer::offers; none = empty bundle
  double payment = 0.0;
  double utility = 0.0;
};

enum class RejectReason { None, NegativeUtility, Capacity };

struct Decision {
  bool accepted = false;
  RejectReason reason = RejectReason::None;
  std::optional<std::size_t> bundle;  // catalog index of the chosen bundle
  double payment = 0.0;
  double utility = 0.0;
};

struct LogEntry {
  std::size_t customer_id;
  int arrival;
  Decision decision;
  double valuation;  // of the chosen bundle, 0 if none
};

struct OutcomeLog {
  std::vector<LogEntry> entries;
  double w_online = 0.0;
  double revenue = 0.0;
  double accepted_value = 0.0;
  double supply_cost = 0.0;
  UtilizationGrid utilization;  // final y_k(t)

  std::size_t accepted_count() const;
};

/// Payment for `bundle` over the quoted slots: sum_t sum_k p_k(t) r_k.
double bundle_payment(const Quote& quote, const Bundle& bundle);

/// Utility-maximizing offer; ties go to the lowest catalog index and the
/// empty bundle is chosen only when every offer has negative utility.
BundleChoice best_bundle(const Customer& customer,
                         const std::vector<Bundle>& catalog, const Quote& quote);

/// Sequential posted-price engine. Not thread-safe; independent states can
/// run concurrently and share pricing functions.
class MechanismState {
 public:
  MechanismState(const Setup& setup, std::vector<PricingFunction> pricing,
                 std::vector<Bundle> catalog, int horizon);

  Quote quote(const Customer& customer) const;
  Decision process(const Customer& customer);

  const OutcomeLog& log() const { return log_; }
  OutcomeLog take_log();
  const UtilizationGrid& utilization() const { return log_.utilization; }
  /// phi_k(y_k(t)) at the current utilizations.
  PriceGrid current_prices() const;
  const std::vector<PricingFunction>& pricing() const { return pricing_; }

 private:
  void check_customer(const Customer& customer) const;

  std::vector<PowerCost> costs_;
  std::vector<PricingFunction> pricing_;
  std::vector<Bundle> catalog_;
  int horizon_;
  OutcomeLog log_;
  std::optional<std::pair<int, std::size_t>> last_;
};

/// Customers in (arrival, id) order, stable for ties.
std::vector<std::size_t> processing_order(const ArrivalInstance& instance);

OutcomeLog run(const ArrivalInstance& instance, const Setup& setup,
               const std::vector<PricingFunction>& pricing);

/// Welfare recomputed from the log entries and the final utilization.
double recompute_welfare(const OutcomeLog& log, const Setup& setup);

const char* to_string(RejectReason reason);

/// customer_id,arrival,accepted,bundle_index,payment,utility rows followed
/// by a "# w_online=<value>" summary line.
void write_outcome_csv(std::ostream& out, const OutcomeLog& log);

}  // namespace ppm
