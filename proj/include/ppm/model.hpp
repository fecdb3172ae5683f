#pragma once

#include <cstddef>
#include <vector>

#include "ppm/pricing.hpp"

namespace ppm {

/// Units r_k requested per slot, as fractions of each resource's capacity.
struct Bundle {
  std::vector<double> units;

  bool empty() const;
};

/// One bundle a customer is willing to buy, with its total valuation over
/// the whole stay.
struct Offer {
  std::size_t bundle;
  double valuation;
};

/// A customer occupies the contiguous slots [arrival, arrival + duration).
/// The empty bundle (valuation 0) is always an implicit alternative.
struct Customer {
  std::size_t id = 0;
  int arrival = 0;
  int duration = 1;
  std::vector<Offer> offers;

  int end_slot() const { return arrival + duration; }
};

struct ArrivalInstance {
  std::vector<Customer> customers;
  std::vector<Bundle> catalog;
  int horizon = 1;
};

/// Per-resource supply costs and PUV bounds. The order of `resources`
/// matches the order of Bundle::units.
struct Setup {
  std::vector<ResourceSetup> resources;

  std::size_t resource_count() const { return resources.size(); }
  std::vector<PowerCost> costs() const;
};

/// y[k][t]
using UtilizationGrid = std::vector<std::vector<double>>;
using PriceGrid = std::vector<std::vector<double>>;

}  // namespace ppm
