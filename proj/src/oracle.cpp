#include "ppm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ppm/error.hpp"
#include "ppm/mechanism.hpp"

namespace ppm {
namespace {

struct Choice {
  double valuation;
  std::vector<double> units;  // per resource
};

struct Node {
  int first;
  int last;
  std::vector<Choice> choices;
};

// Flattened search problem: customers in processing order, and the slots
// each one touches.
struct Search {
  std::vector<Node> nodes;
  std::vector<double> suffix_best;  // sum of max(0, best valuation) from i on
  std::vector<PowerCost> costs;
  int horizon = 1;
  bool prune = true;
};

class Walker {
 public:
  explicit Walker(const Search& s)
      : s_(s), y_(s.costs.size(), std::vector<double>(s.horizon, 0.0)) {}

  // Applies a choice if it fits; returns the welfare change or NaN.
  double apply(const Node& node, const Choice& c) {
    for (std::size_t k = 0; k < c.units.size(); ++k) {
      if (c.units[k] == 0.0) continue;
      for (int t = node.first; t < node.last; ++t) {
        if (y_[k][t] + c.units[k] > 1.0) return std::numeric_limits<double>::quiet_NaN();
      }
    }
    double cost = 0.0;
    for (std::size_t k = 0; k < c.units.size(); ++k) {
      if (c.units[k] == 0.0) continue;
      for (int t = node.first; t < node.last; ++t) {
        double& y = y_[k][t];
        const double before = s_.costs[k].cost(y);
        y += c.units[k];
        cost += s_.costs[k].cost(y) - before;
      }
    }
    return c.valuation - cost;
  }

  void dfs(std::size_t i, double welfare, double& best) {
    if (i == s_.nodes.size()) {
      best = std::max(best, welfare);
      return;
    }
    if (s_.prune && welfare + s_.suffix_best[i] <= best) {
      return;
    }
    const Node& node = s_.nodes[i];
    for (const Choice& c : node.choices) {
      const auto saved = snapshot(node, c);
      const double gain = apply(node, c);
      if (!std::isnan(gain)) {
        dfs(i + 1, welfare + gain, best);
      }
      restore(node, c, saved);
    }
    dfs(i + 1, welfare, best);  // empty bundle
  }

  // Utilizations are restored by copying, since y + r - r need not equal y
  // in floating point.
  std::vector<double> snapshot(const Node& node, const Choice& c) const {
    std::vector<double> out;
    for (std::size_t k = 0; k < c.units.size(); ++k) {
      if (c.units[k] == 0.0) continue;
      out.insert(out.end(), y_[k].begin() + node.first, y_[k].begin() + node.last);
    }
    return out;
  }

  void restore(const Node& node, const Choice& c, const std::vector<double>& saved) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < c.units.size(); ++k) {
      if (c.units[k] == 0.0) continue;
      std::copy(saved.begin() + j, saved.begin() + j + (node.last - node.first),
                y_[k].begin() + node.first);
      j += node.last - node.first;
    }
  }

 private:
  const Search& s_;
  UtilizationGrid y_;
};

Search build_search(const ArrivalInstance& instance, const Setup& setup, bool prune) {
  Search s;
  s.costs = setup.costs();
  s.horizon = instance.horizon;
  s.prune = prune;
  for (std::size_t i : processing_order(instance)) {
    const Customer& c = instance.customers[i];
    if (c.arrival < 0 || c.duration < 1 || c.end_slot() > instance.horizon) {
      throw ValidationError("customer " + std::to_string(c.id) +
                            " occupies slots outside the horizon");
    }
    Node node{c.arrival, c.end_slot(), {}};
    for (const auto& o : c.offers) {
      const Bundle& b = instance.catalog.at(o.bundle);
      if (b.units.size() != s.costs.size()) {
        throw ValidationError("bundle dimension does not match resource count");
      }
      node.choices.push_back({o.valuation, b.units});
    }
    // High valuations first so pruning finds good incumbents early.
    std::stable_sort(node.choices.begin(), node.choices.end(),
                     [](const Choice& a, const Choice& b) { return a.valuation > b.valuation; });
    s.nodes.push_back(std::move(node));
  }
  s.suffix_best.assign(s.nodes.size() + 1, 0.0);
  for (std::size_t i = s.nodes.size(); i-- > 0;) {
    double top = 0.0;
    for (const auto& c : s.nodes[i].choices) top = std::max(top, c.valuation);
    s.suffix_best[i] = s.suffix_best[i + 1] + top;
  }
  return s;
}

}  // namespace

double enumeration_bits(const ArrivalInstance& instance) {
  double bits = 0.0;
  for (const auto& c : instance.customers) {
    bits += std::log2(1.0 + static_cast<double>(c.offers.size()));
  }
  return bits;
}

double brute_force_opt(const ArrivalInstance& instance, const Setup& setup,
                       const EnumerationOptions& options) {
  const double bits = enumeration_bits(instance);
  if (bits > options.budget_bits + 1e-12) {
    throw BudgetError("instance needs 2^" + std::to_string(bits) +
                      " leaves, above the enumeration budget 2^" +
                      std::to_string(options.budget_bits));
  }
  const Search search = build_search(instance, setup, options.prune);
  if (search.nodes.empty()) {
    return 0.0;
  }
  if (!options.parallel) {
    Walker w(search);
    double best = 0.0;  // allocating nothing is always feasible
    w.dfs(0, 0.0, best);
    return best;
  }
  // One task per option of the first customer; each keeps its own incumbent
  // so the reduction is a plain max and independent of scheduling.
  const Node& root = search.nodes.front();
  const long branches = static_cast<long>(root.choices.size()) + 1;
  std::vector<double> results(branches, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (long b = 0; b < branches; ++b) {
    Walker w(search);
    double best = 0.0;
    if (b == branches - 1) {
      w.dfs(1, 0.0, best);
    } else {
      const Choice& c = root.choices[b];
      const double gain = w.apply(root, c);
      if (!std::isnan(gain)) w.dfs(1, gain, best);
    }
    results[b] = best;
  }
  return *std::max_element(results.begin(), results.end());
}

double dual_upper_bound(const ArrivalInstance& instance, const Setup& setup,
                        const PriceGrid& prices) {
  const std::size_t k_count = setup.resource_count();
  if (prices.size() != k_count) {
    throw ValidationError("price table needs one row per resource");
  }
  for (const auto& row : prices) {
    if (static_cast<int>(row.size()) != instance.horizon) {
      throw ValidationError("price table needs one column per slot");
    }
    for (double p : row) {
      if (!(p >= 0.0)) throw DomainError("dual prices must be nonnegative");
    }
  }
  double surplus = 0.0;
  for (const auto& c : instance.customers) {
    double best = 0.0;
    for (const auto& o : c.offers) {
      const Bundle& b = instance.catalog.at(o.bundle);
      double pay = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        if (b.units[k] == 0.0) continue;
        for (int t = c.arrival; t < c.end_slot(); ++t) pay += prices[k][t] * b.units[k];
      }
      best = std::max(best, o.valuation - pay);
    }
    surplus += best;
  }
  double conjugates = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const PowerCost& f = setup.resources[k].cost;
    for (double p : prices[k]) conjugates += f.conjugate(p);
  }
  return surplus + conjugates;
}

EvaluationReport empirical_ratio(double w_online, std::optional<double> w_opt_exact,
                                 double w_dual_bound) {
  EvaluationReport r;
  r.w_online = w_online;
  r.w_opt_exact = w_opt_exact;
  r.w_dual_bound = w_dual_bound;
  r.opt_method = w_opt_exact ? "exact" : "dual";
  const double reference = w_opt_exact ? *w_opt_exact : w_dual_bound;
  if (w_online > 0.0) {
    if (w_opt_exact) r.er_exact = *w_opt_exact / w_online;
    r.er_bound = w_dual_bound / w_online;
  } else {
    r.both_zero = w_online == 0.0 && reference == 0.0;
  }
  return r;
}

}  // namespace ppm
