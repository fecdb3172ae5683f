#include "ppm/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ppm/error.hpp"

namespace ppm {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad number '" +
                          text + "'");
  }
}

long long parse_integer(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad integer '" +
                          text + "'");
  }
}

bool is_blank_or_comment(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

}  // namespace

std::string to_string(ArrivalCase c) {
  switch (c) {
    case ArrivalCase::UE: return "UE";
    case ArrivalCase::EE: return "EE";
    case ArrivalCase::UI: return "UI";
    case ArrivalCase::EI: return "EI";
  }
  return "?";
}

ArrivalCase parse_arrival_case(const std::string& text) {
  if (text == "UE") return ArrivalCase::UE;
  if (text == "EE") return ArrivalCase::EE;
  if (text == "UI") return ArrivalCase::UI;
  if (text == "EI") return ArrivalCase::EI;
  throw ValidationError("unknown case '" + text + "' (expected UE, EE, UI or EI)");
}

void validate_config(const GeneratorConfig& cfg) {
  if (!(cfg.p_bar_true > 0.0) || !std::isfinite(cfg.p_bar_true)) {
    throw ValidationError("p_bar_true must be positive");
  }
  if (!(cfg.delta >= -0.8 && cfg.delta <= 2.4)) {
    throw ValidationError("delta must lie in [-0.8, 2.4]");
  }
  if (cfg.puv.kind == PuvDistribution::Kind::TruncatedNormal &&
      !(cfg.puv.sigma > 0.0)) {
    throw ValidationError("truncated normal needs sigma > 0");
  }
  if (cfg.horizon < 1) {
    throw ValidationError("horizon must be at least one slot");
  }
  if (!(cfg.mean_duration >= 1.0)) {
    throw ValidationError("mean duration must be at least one slot");
  }
}

double sample_truncated_normal(std::mt19937_64& rng, double mu, double sigma,
                               double lo, double hi) {
  std::normal_distribution<double> normal(mu, sigma);
  for (int i = 0; i < 1000000; ++i) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw ValidationError("truncated normal: acceptance region has negligible mass");
}

GeneratedInstance generate(const GeneratorConfig& cfg,
                           const std::vector<Bundle>& catalog) {
  validate_config(cfg);
  std::vector<std::size_t> usable;
  for (std::size_t b = 0; b < catalog.size(); ++b) {
    if (!catalog[b].empty()) usable.push_back(b);
  }
  if (cfg.n_customers > 0 && usable.empty()) {
    throw ValidationError("catalog has no non-empty bundle");
  }

  GeneratedInstance out;
  out.instance.catalog = catalog;
  out.instance.horizon = cfg.horizon;
  const bool inexact =
      cfg.arrival_case == ArrivalCase::UI || cfg.arrival_case == ArrivalCase::EI;
  out.p_bar_estimate = cfg.p_bar_true * (1.0 + (inexact ? cfg.delta : 0.0));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> slot(0, cfg.horizon - 1);
  std::vector<int> arrivals(cfg.n_customers);
  for (auto& a : arrivals) a = slot(rng);
  std::sort(arrivals.begin(), arrivals.end());

  std::geometric_distribution<int> extra(1.0 / cfg.mean_duration);
  std::uniform_int_distribution<std::size_t> pick(0, usable.empty() ? 0 : usable.size() - 1);
  const bool evolving =
      cfg.arrival_case == ArrivalCase::EE || cfg.arrival_case == ArrivalCase::EI;
  const double p_bar = cfg.p_bar_true;

  out.instance.customers.reserve(cfg.n_customers);
  for (std::size_t n = 0; n < cfg.n_customers; ++n) {
    double lo = 0.0;
    double hi = p_bar;
    if (evolving) {
      if (n < cfg.n_customers / 2) {
        hi = 0.5 * p_bar;
      } else {
        lo = 0.5 * p_bar;
      }
    }
    double p;
    if (cfg.puv.kind == PuvDistribution::Kind::Uniform) {
      p = std::uniform_real_distribution<double>(lo, hi)(rng);
    } else {
      p = sample_truncated_normal(rng, cfg.puv.mu, cfg.puv.sigma, lo, hi);
    }
    p = std::clamp(p, 0.0, p_bar);

    Customer c;
    c.id = n;
    c.arrival = arrivals[n];
    c.duration = std::min(1 + extra(rng), cfg.horizon - c.arrival);
    const std::size_t b = usable[pick(rng)];
    c.offers.push_back({b, p * c.duration * catalog[b].units.at(0)});
    out.instance.customers.push_back(std::move(c));
  }
  return out;
}

std::vector<Bundle> read_catalog_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<Bundle> catalog;
  bool header = true;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_csv_line(line);
    if (header) {
      if (f.size() < 2 || f[0] != "bundle_index") {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": catalog header must be bundle_index,r_1,...,r_K");
      }
      k = f.size() - 1;
      header = false;
      continue;
    }
    if (f.size() != k + 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(k + 1) + " fields");
    }
    const long long index = parse_integer(f[0], line_no);
    if (index != static_cast<long long>(catalog.size())) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": bundle indices must be 0, 1, 2, ... in order");
    }
    Bundle b;
    for (std::size_t j = 1; j <= k; ++j) {
      const double r = parse_double(f[j], line_no);
      if (r < 0.0 || r > 1.0) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": bundle units must lie in [0, 1]");
      }
      b.units.push_back(r);
    }
    catalog.push_back(std::move(b));
  }
  if (header) throw ValidationError("catalog file is empty");
  return catalog;
}

void write_catalog_csv(std::ostream& out, const std::vector<Bundle>& catalog) {
  const auto old_precision = out.precision(17);
  out << "bundle_index";
  const std::size_t k = catalog.empty() ? 0 : catalog.front().units.size();
  for (std::size_t j = 1; j <= k; ++j) out << ",r_" << j;
  out << '\n';
  for (std::size_t b = 0; b < catalog.size(); ++b) {
    out << b;
    for (double r : catalog[b].units) out << ',' << r;
    out << '\n';
  }
  out.precision(old_precision);
}

TraceLoad read_trace_csv(std::istream& in, std::vector<Bundle> catalog, int horizon) {
  static const std::vector<std::string> kHeader = {
      "customer_id", "arrival_slot", "duration_slots", "bundle_index", "valuation"};
  TraceLoad out;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  std::map<long long, std::size_t> slot_of;  // customer id -> position
  std::vector<Customer> customers;
  int previous_arrival = -1;
  bool unsorted = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_csv_line(line);
    if (header) {
      if (f != kHeader) {
        throw ValidationError(
            "line " + std::to_string(line_no) +
            ": trace header must be customer_id,arrival_slot,duration_slots,"
            "bundle_index,valuation");
      }
      header = false;
      continue;
    }
    if (f.size() != kHeader.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 5 fields");
    }
    const long long id = parse_integer(f[0], line_no);
    const long long arrival = parse_integer(f[1], line_no);
    const long long duration = parse_integer(f[2], line_no);
    const long long bundle = parse_integer(f[3], line_no);
    const double valuation = parse_double(f[4], line_no);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (id < 0) throw ValidationError(where + "negative customer_id");
    if (arrival < 0) throw ValidationError(where + "negative arrival_slot");
    if (duration < 1) throw ValidationError(where + "duration_slots must be >= 1");
    if (bundle < 0 || bundle >= static_cast<long long>(catalog.size())) {
      throw ValidationError(where + "bundle_index not in catalog");
    }
    if (valuation < 0.0) throw ValidationError(where + "negative valuation");

    auto it = slot_of.find(id);
    if (it == slot_of.end()) {
      Customer c;
      c.id = static_cast<std::size_t>(id);
      c.arrival = static_cast<int>(arrival);
      c.duration = static_cast<int>(duration);
      if (c.arrival < previous_arrival) unsorted = true;
      previous_arrival = std::max(previous_arrival, c.arrival);
      slot_of.emplace(id, customers.size());
      customers.push_back(std::move(c));
      it = slot_of.find(id);
    }
    Customer& c = customers[it->second];
    if (c.arrival != arrival || c.duration != duration) {
      throw ValidationError(where + "customer " + std::to_string(id) +
                            " listed with conflicting arrival or duration");
    }
    c.offers.push_back({static_cast<std::size_t>(bundle), valuation});
  }
  if (header) throw ValidationError("trace file is empty");
  if (unsorted) {
    out.warnings.push_back("arrival times decrease in the trace; customers re-sorted by arrival");
    std::stable_sort(customers.begin(), customers.end(),
                     [](const Customer& a, const Customer& b) { return a.arrival < b.arrival; });
  }
  int last_end = 1;
  for (const auto& c : customers) last_end = std::max(last_end, c.end_slot());
  out.instance.horizon = horizon > 0 ? horizon : last_end;
  if (last_end > out.instance.horizon) {
    throw ValidationError("trace occupies slots beyond the horizon " +
                          std::to_string(out.instance.horizon));
  }
  out.instance.customers = std::move(customers);
  out.instance.catalog = std::move(catalog);
  return out;
}

void write_trace_csv(std::ostream& out, const ArrivalInstance& instance) {
  const auto old_precision = out.precision(17);
  out << "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n";
  for (const auto& c : instance.customers) {
    for (const auto& o : c.offers) {
      out << c.id << ',' << c.arrival << ',' << c.duration << ',' << o.bundle << ','
          << o.valuation << '\n';
    }
  }
  out.precision(old_precision);
}

TraceLoad load_trace(const std::string& trace_path, const std::string& catalog_path,
                     int horizon) {
  std::ifstream catalog_in(catalog_path);
  if (!catalog_in) throw ValidationError("cannot open catalog file " + catalog_path);
  std::ifstream trace_in(trace_path);
  if (!trace_in) throw ValidationError("cannot open trace file " + trace_path);
  try {
    auto catalog = read_catalog_csv(catalog_in);
    return read_trace_csv(trace_in, std::move(catalog), horizon);
  } catch (const ValidationError& e) {
    throw ValidationError(trace_path + ": " + e.what());
  }
}

ValidationReport validate(const ArrivalInstance& instance, const Setup& setup,
                          double small_demand_cap) {
  ValidationReport report;
  const std::size_t k_count = setup.resource_count();
  for (std::size_t b = 0; b < instance.catalog.size(); ++b) {
    const auto& units = instance.catalog[b].units;
    if (units.size() != k_count) {
      report.violations.push_back("bundle " + std::to_string(b) + " has " +
                                  std::to_string(units.size()) + " resources, setup has " +
                                  std::to_string(k_count));
      continue;
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      if (units[k] < 0.0 || units[k] > 1.0) {
        report.violations.push_back("bundle " + std::to_string(b) +
                                    " requests units outside [0, 1]");
      } else if (units[k] > small_demand_cap) {
        report.warnings.push_back("bundle " + std::to_string(b) + " resource " +
                                  std::to_string(k) + " demand " +
                                  std::to_string(units[k]) + " exceeds the small-demand cap " +
                                  std::to_string(small_demand_cap));
      }
    }
  }
  int previous = 0;
  for (const auto& c : instance.customers) {
    const std::string who = "customer " + std::to_string(c.id);
    if (c.arrival < previous) {
      report.violations.push_back(who + " arrives before its predecessor");
    }
    previous = std::max(previous, c.arrival);
    if (c.arrival < 0 || c.duration < 1 || c.end_slot() > instance.horizon) {
      report.violations.push_back(who + " occupies slots outside [0, " +
                                  std::to_string(instance.horizon) + ")");
    }
    for (const auto& o : c.offers) {
      if (o.bundle >= instance.catalog.size()) {
        report.violations.push_back(who + " refers to unknown bundle " +
                                    std::to_string(o.bundle));
        continue;
      }
      if (o.valuation < 0.0) {
        report.violations.push_back(who + " has a negative valuation");
      }
      const auto& units = instance.catalog[o.bundle].units;
      for (std::size_t k = 0; k < std::min(k_count, units.size()); ++k) {
        if (units[k] == 0.0) continue;
        const double puv = o.valuation / (c.duration * units[k]);
        const double bound = setup.resources[k].p_bar;
        if (puv > bound + 1e-9) {
          std::ostringstream msg;
          msg << who << " bundle " << o.bundle << " resource " << k << ": PUV " << puv
              << " exceeds p_bar " << bound;
          report.violations.push_back(msg.str());
        }
      }
    }
  }
  report.ok = report.violations.empty();
  return report;
}

Preset google_cluster_like(double p_bar_cpu) {
  Preset p;
  p.name = "google-cluster-like";
  p.setup.resources.emplace_back(PowerCost(0.223, 3.0), p_bar_cpu);
  p.setup.resources.emplace_back(PowerCost(8.38e-6, 1.2), 5.0 * p_bar_cpu);
  for (double cpu : {0.001, 0.003, 0.005}) {
    for (double ram : {0.001, 0.003, 0.005}) {
      p.catalog.push_back(Bundle{{cpu, ram}});
    }
  }
  p.horizon = 3600;
  p.n_customers = 4000;
  p.mean_duration = 30.0;
  return p;
}

Preset desk_preset(double p_bar_cpu) {
  Preset p = google_cluster_like(p_bar_cpu);
  p.name = "desk";
  // Doubled bundle sizes: at desk scale this is the load at which myopic
  // pricing depletes capacity, as in the full-scale runs.
  for (auto& b : p.catalog) {
    for (double& r : b.units) r *= 2.0;
  }
  p.horizon = 600;
  p.n_customers = 500;
  p.mean_duration = 300.0;
  return p;
}

Preset preset_by_name(const std::string& name, double p_bar_cpu) {
  if (name == "google-cluster-like") return google_cluster_like(p_bar_cpu);
  if (name == "desk") return desk_preset(p_bar_cpu);
  throw ValidationError("unknown preset '" + name + "' (expected google-cluster-like or desk)");
}

}  // namespace ppm
