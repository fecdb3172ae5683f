#include "ppm/mechanism.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include "ppm/error.hpp"

namespace ppm {

bool Bundle::empty() const {
  return std::all_of(units.begin(), units.end(), [](double r) { return r == 0.0; });
}

std::vector<PowerCost> Setup::costs() const {
  std::vector<PowerCost> out;
  out.reserve(resources.size());
  for (const auto& r : resources) out.push_back(r.cost);
  return out;
}

std::size_t OutcomeLog::accepted_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(),
      [](const LogEntry& e) { return e.decision.accepted; }));
}

double bundle_payment(const Quote& quote, const Bundle& bundle) {
  double total = 0.0;
  for (std::size_t k = 0; k < quote.prices.size(); ++k) {
    const double r = bundle.units[k];
    if (r == 0.0) continue;
    for (double p : quote.prices[k]) total += p * r;
  }
  return total;
}

BundleChoice best_bundle(const Customer& customer,
                         const std::vector<Bundle>& catalog, const Quote& quote) {
  BundleChoice best;
  std::optional<std::size_t> best_index;
  bool found = false;
  for (std::size_t i = 0; i < customer.offers.size(); ++i) {
    const Offer& offer = customer.offers[i];
    const double pay = bundle_payment(quote, catalog.at(offer.bundle));
    const double utility = offer.valuation - pay;
    const bool better =
        !found || utility > best.utility ||
        (utility == best.utility && offer.bundle < *best_index);
    if (better) {
      found = true;
      best = {i, pay, utility};
      best_index = offer.bundle;
    }
  }
  if (!found || best.utility < 0.0) {
    return {};
  }
  return best;
}

MechanismState::MechanismState(const Setup& setup,
                               std::vector<PricingFunction> pricing,
                               std::vector<Bundle> catalog, int horizon)
    : costs_(setup.costs()),
      pricing_(std::move(pricing)),
      catalog_(std::move(catalog)),
      horizon_(horizon) {
  if (pricing_.size() != costs_.size()) {
    throw ValidationError("one pricing function per resource is required");
  }
  if (horizon_ < 1) {
    throw ValidationError("horizon must be at least one slot");
  }
  for (const auto& b : catalog_) {
    if (b.units.size() != costs_.size()) {
      throw ValidationError("bundle dimension does not match resource count");
    }
  }
  log_.utilization.assign(costs_.size(), std::vector<double>(horizon_, 0.0));
}

void MechanismState::check_customer(const Customer& c) const {
  if (c.duration < 1 || c.arrival < 0 || c.end_slot() > horizon_) {
    throw ValidationError("customer " + std::to_string(c.id) +
                          " occupies slots outside the horizon");
  }
  for (const auto& o : c.offers) {
    if (o.bundle >= catalog_.size()) {
      throw ValidationError("customer " + std::to_string(c.id) +
                            " refers to an unknown bundle");
    }
  }
}

Quote MechanismState::quote(const Customer& customer) const {
  check_customer(customer);
  Quote q;
  q.first_slot = customer.arrival;
  q.prices.resize(pricing_.size());
  for (std::size_t k = 0; k < pricing_.size(); ++k) {
    auto& row = q.prices[k];
    row.reserve(customer.duration);
    for (int t = customer.arrival; t < customer.end_slot(); ++t) {
      row.push_back(pricing_[k](log_.utilization[k][t]));
    }
  }
  return q;
}

Decision MechanismState::process(const Customer& customer) {
  const std::pair<int, std::size_t> key{customer.arrival, customer.id};
  if (last_ && key < *last_) {
    throw ValidationError("customer " + std::to_string(customer.id) +
                          " processed out of arrival order");
  }
  last_ = key;

  const Quote q = quote(customer);
  const BundleChoice choice = best_bundle(customer, catalog_, q);
  Decision d;
  double valuation = 0.0;
  if (!choice.offer) {
    d.reason = RejectReason::NegativeUtility;
  } else {
    const Offer& offer = customer.offers[*choice.offer];
    const Bundle& bundle = catalog_[offer.bundle];
    bool fits = true;
    for (std::size_t k = 0; k < costs_.size() && fits; ++k) {
      const double r = bundle.units[k];
      for (int t = customer.arrival; t < customer.end_slot(); ++t) {
        if (log_.utilization[k][t] + r > 1.0) {
          fits = false;
          break;
        }
      }
    }
    d.bundle = offer.bundle;
    d.payment = choice.payment;
    d.utility = choice.utility;
    if (!fits) {
      d.reason = RejectReason::Capacity;
    } else {
      d.accepted = true;
      valuation = offer.valuation;
      double added_cost = 0.0;
      for (std::size_t k = 0; k < costs_.size(); ++k) {
        const double r = bundle.units[k];
        if (r == 0.0) continue;
        for (int t = customer.arrival; t < customer.end_slot(); ++t) {
          double& y = log_.utilization[k][t];
          const double before = costs_[k].cost(y);
          y += r;
          added_cost += costs_[k].cost(y) - before;
        }
      }
      log_.revenue += d.payment;
      log_.accepted_value += valuation;
      log_.supply_cost += added_cost;
      log_.w_online += valuation - added_cost;
    }
  }
  log_.entries.push_back({customer.id, customer.arrival, d, valuation});
  return d;
}

OutcomeLog MechanismState::take_log() {
  return std::move(log_);
}

PriceGrid MechanismState::current_prices() const {
  PriceGrid out(pricing_.size());
  for (std::size_t k = 0; k < pricing_.size(); ++k) {
    out[k].reserve(horizon_);
    for (double y : log_.utilization[k]) out[k].push_back(pricing_[k](y));
  }
  return out;
}

std::vector<std::size_t> processing_order(const ArrivalInstance& instance) {
  std::vector<std::size_t> order(instance.customers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = instance.customers[a];
    const auto& cb = instance.customers[b];
    if (ca.arrival != cb.arrival) return ca.arrival < cb.arrival;
    return ca.id < cb.id;
  });
  return order;
}

OutcomeLog run(const ArrivalInstance& instance, const Setup& setup,
               const std::vector<PricingFunction>& pricing) {
  MechanismState state(setup, pricing, instance.catalog, instance.horizon);
  for (std::size_t i : processing_order(instance)) {
    state.process(instance.customers[i]);
  }
  return state.take_log();
}

double recompute_welfare(const OutcomeLog& log, const Setup& setup) {
  double value = 0.0;
  for (const auto& e : log.entries) {
    if (e.decision.accepted) value += e.valuation;
  }
  double cost = 0.0;
  for (std::size_t k = 0; k < log.utilization.size(); ++k) {
    for (double y : log.utilization[k]) cost += setup.resources[k].cost.cost(y);
  }
  return value - cost;
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "";
    case RejectReason::NegativeUtility: return "negative_utility";
    case RejectReason::Capacity: return "capacity";
  }
  return "?";
}

void write_outcome_csv(std::ostream& out, const OutcomeLog& log) {
  const auto old_precision = out.precision(17);
  out << "customer_id,arrival,accepted,bundle_index,payment,utility\n";
  for (const auto& e : log.entries) {
    out << e.customer_id << ',' << e.arrival << ',' << (e.decision.accepted ? 1 : 0)
        << ',';
    if (e.decision.bundle) {
      out << *e.decision.bundle;
    } else {
      out << -1;
    }
    out << ',' << e.decision.payment << ',' << e.decision.utility << '\n';
  }
  out << "# w_online=" << log.w_online << '\n';
  out.precision(old_precision);
}

}  // namespace ppm
