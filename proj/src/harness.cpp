#include "ppm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "ppm/error.hpp"

namespace ppm {
namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string format_value(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

void apply_preset(ExperimentConfig& cfg) {
  if (cfg.preset.empty()) return;
  const Preset p = preset_by_name(cfg.preset, 1.0);
  cfg.resources.clear();
  for (const auto& r : p.setup.resources) {
    cfg.resources.push_back({r.cost.a(), r.cost.s(), r.p_bar / p.setup.resources[0].p_bar});
  }
  cfg.catalog = p.catalog;
  cfg.horizon = p.horizon;
  cfg.n_customers = p.n_customers;
  cfg.mean_duration = p.mean_duration;
}

std::vector<PricingFunction> curves_for(MechanismKind kind, const Setup& estimate,
                                        const ExperimentConfig& cfg) {
  std::vector<PricingFunction> out;
  for (const auto& rs : estimate.resources) {
    switch (kind) {
      case MechanismKind::Optimal: {
        auto phi = synthesize_optimal(rs, cfg.choice);
        out.push_back(cfg.tabulate ? phi.tabulated(1u << 14, cfg.parallel) : phi);
        break;
      }
      case MechanismKind::TwiceIndex:
        out.push_back(benchmark_pricing(BenchmarkKind::TwiceIndex, rs));
        break;
      case MechanismKind::Myopic:
        out.push_back(benchmark_pricing(BenchmarkKind::Myopic, rs));
        break;
    }
  }
  return out;
}

PriceGrid terminal_prices(const OutcomeLog& log, const std::vector<PricingFunction>& pricing) {
  PriceGrid out(pricing.size());
  for (std::size_t k = 0; k < pricing.size(); ++k) {
    out[k].reserve(log.utilization[k].size());
    for (double y : log.utilization[k]) out[k].push_back(pricing[k](y));
  }
  return out;
}

}  // namespace

std::string to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::Optimal: return "PPM-OP";
    case MechanismKind::TwiceIndex: return "PPM-TP";
    case MechanismKind::Myopic: return "PPM-MP";
  }
  return "?";
}

MechanismKind parse_mechanism(const std::string& name) {
  if (name == "PPM-OP" || name == "OP") return MechanismKind::Optimal;
  if (name == "PPM-TP" || name == "TP") return MechanismKind::TwiceIndex;
  if (name == "PPM-MP" || name == "MP") return MechanismKind::Myopic;
  throw ValidationError("unknown mechanism '" + name + "' (expected PPM-OP, PPM-TP or PPM-MP)");
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::PBarMultiple ? "p_bar_multiple" : "delta";
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");

  ExperimentConfig cfg;
  cfg.preset = get_or<std::string>(j, "preset", cfg.preset);
  if (j.contains("resources") || j.contains("catalog")) {
    if (!j.contains("resources") || !j.contains("catalog")) {
      throw ValidationError("explicit setups need both 'resources' and 'catalog'");
    }
    if (!j.contains("preset")) cfg.preset.clear();
  }
  apply_preset(cfg);
  if (j.contains("resources")) {
    cfg.resources.clear();
    for (const auto& r : j.at("resources")) {
      cfg.resources.push_back({get_or<double>(r, "a", 0.0), get_or<double>(r, "s", 0.0),
                               get_or<double>(r, "p_bar_ratio", 1.0)});
    }
  }
  if (j.contains("catalog")) {
    cfg.catalog.clear();
    for (const auto& b : j.at("catalog")) {
      cfg.catalog.push_back(Bundle{b.get<std::vector<double>>()});
    }
  }
  cfg.horizon = get_or<int>(j, "horizon", cfg.horizon);
  cfg.n_customers = get_or<std::size_t>(j, "n_customers", cfg.n_customers);
  cfg.mean_duration = get_or<double>(j, "mean_duration", cfg.mean_duration);
  cfg.arrival_case = parse_arrival_case(get_or<std::string>(j, "case", "UE"));
  if (j.contains("puv")) {
    const auto& p = j.at("puv");
    const auto kind = get_or<std::string>(p, "distribution", "uniform");
    if (kind == "uniform") {
      cfg.puv.kind = PuvDistribution::Kind::Uniform;
    } else if (kind == "truncated_normal") {
      cfg.puv.kind = PuvDistribution::Kind::TruncatedNormal;
    } else {
      throw ValidationError("puv.distribution must be uniform or truncated_normal");
    }
    cfg.puv.mu = get_or<double>(p, "mu", cfg.puv.mu);
    cfg.puv.sigma = get_or<double>(p, "sigma", cfg.puv.sigma);
  }
  if (j.contains("mechanisms")) {
    cfg.mechanisms.clear();
    for (const auto& m : j.at("mechanisms")) cfg.mechanisms.push_back(parse_mechanism(m.get<std::string>()));
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    const auto axis = get_or<std::string>(s, "axis", "p_bar_multiple");
    if (axis == "p_bar_multiple") {
      cfg.axis = SweepAxis::PBarMultiple;
    } else if (axis == "delta") {
      cfg.axis = SweepAxis::Delta;
    } else {
      throw ValidationError("sweep.axis must be p_bar_multiple or delta");
    }
    cfg.sweep_values = get_or<std::vector<double>>(s, "values", cfg.sweep_values);
  }
  cfg.p_bar_multiple = get_or<double>(j, "p_bar_multiple", cfg.p_bar_multiple);
  cfg.delta = get_or<double>(j, "delta", cfg.delta);
  cfg.choice = get_or<double>(j, "choice", cfg.choice);
  cfg.n_instances = get_or<std::size_t>(j, "n_instances", cfg.n_instances);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.enumeration_budget = get_or<double>(j, "enumeration_budget", cfg.enumeration_budget);
  cfg.tabulate = get_or<bool>(j, "tabulate", cfg.tabulate);
  cfg.parallel = get_or<bool>(j, "parallel", cfg.parallel);
  if (j.contains("timeseries_point")) cfg.timeseries_point = j.at("timeseries_point").get<double>();
  cfg.out = get_or<std::string>(j, "out", cfg.out);
  validate(cfg);
  return cfg;
}

ExperimentConfig preset_config(const std::string& preset) {
  ExperimentConfig cfg;
  cfg.preset = preset;
  apply_preset(cfg);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  j["resources"] = json::array();
  for (const auto& r : cfg.resources) {
    j["resources"].push_back({{"a", r.a}, {"s", r.s}, {"p_bar_ratio", r.p_bar_ratio}});
  }
  j["catalog"] = json::array();
  for (const auto& b : cfg.catalog) j["catalog"].push_back(b.units);
  j["horizon"] = cfg.horizon;
  j["n_customers"] = cfg.n_customers;
  j["mean_duration"] = cfg.mean_duration;
  j["case"] = to_string(cfg.arrival_case);
  j["puv"] = {{"distribution", cfg.puv.kind == PuvDistribution::Kind::Uniform
                                   ? "uniform"
                                   : "truncated_normal"},
              {"mu", cfg.puv.mu},
              {"sigma", cfg.puv.sigma}};
  j["mechanisms"] = json::array();
  for (auto m : cfg.mechanisms) j["mechanisms"].push_back(to_string(m));
  j["sweep"] = {{"axis", to_string(cfg.axis)}, {"values", cfg.sweep_values}};
  j["p_bar_multiple"] = cfg.p_bar_multiple;
  j["delta"] = cfg.delta;
  j["choice"] = cfg.choice;
  j["n_instances"] = cfg.n_instances;
  j["seed"] = cfg.seed;
  j["enumeration_budget"] = cfg.enumeration_budget;
  j["tabulate"] = cfg.tabulate;
  j["parallel"] = cfg.parallel;
  if (cfg.timeseries_point) j["timeseries_point"] = *cfg.timeseries_point;
  j["out"] = cfg.out;
  return j.dump(2);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_instances < 1) throw ValidationError("n_instances must be at least 1");
  if (cfg.mechanisms.empty()) throw ValidationError("mechanisms list is empty");
  if (cfg.sweep_values.empty()) throw ValidationError("sweep has no values");
  if (cfg.resources.empty()) throw ValidationError("setup has no resources");
  if (cfg.catalog.empty()) throw ValidationError("bundle catalog is empty");
  for (const auto& r : cfg.resources) {
    if (!(r.a > 0.0) || !(r.s > 1.0)) throw ValidationError("resources need a > 0 and s > 1");
    if (!(r.p_bar_ratio > 0.0)) throw ValidationError("p_bar_ratio must be positive");
  }
  for (const auto& b : cfg.catalog) {
    if (b.units.size() != cfg.resources.size()) {
      throw ValidationError("catalog bundles must list one unit per resource");
    }
    for (double r : b.units) {
      if (r < 0.0 || r > 1.0) throw ValidationError("bundle units must lie in [0, 1]");
    }
  }
  if (cfg.horizon < 1) throw ValidationError("horizon must be at least 1");
  if (!(cfg.mean_duration >= 1.0)) throw ValidationError("mean_duration must be >= 1");
  if (!(cfg.choice >= 0.0 && cfg.choice <= 1.0)) throw ValidationError("choice must lie in [0, 1]");
  const auto check_delta = [](double d) {
    if (!(d >= -0.8 && d <= 2.4)) throw ValidationError("delta must lie in [-0.8, 2.4]");
  };
  if (cfg.axis == SweepAxis::Delta) {
    for (double d : cfg.sweep_values) check_delta(d);
    if (!(cfg.p_bar_multiple > 0.0)) throw ValidationError("p_bar_multiple must be positive");
  } else {
    check_delta(cfg.delta);
    for (double m : cfg.sweep_values) {
      if (!(m > 0.0)) throw ValidationError("p_bar multiples must be positive");
    }
  }
  if (cfg.puv.kind == PuvDistribution::Kind::TruncatedNormal && !(cfg.puv.sigma > 0.0)) {
    throw ValidationError("truncated normal needs sigma > 0");
  }
}

PointSetup prepare_point(const ExperimentConfig& cfg, double sweep_value) {
  validate(cfg);
  const double multiple = cfg.axis == SweepAxis::PBarMultiple ? sweep_value : cfg.p_bar_multiple;
  const double delta = cfg.axis == SweepAxis::Delta ? sweep_value : cfg.delta;
  const bool inexact =
      cfg.arrival_case == ArrivalCase::UI || cfg.arrival_case == ArrivalCase::EI;
  const double scale = inexact ? 1.0 + delta : 1.0;

  PointSetup p{sweep_value, {}, {}, {}, {}};
  const PowerCost first(cfg.resources[0].a, cfg.resources[0].s);
  const double p_bar0 = multiple * first.max_marginal();
  for (const auto& r : cfg.resources) {
    const PowerCost cost(r.a, r.s);
    p.truth.resources.emplace_back(cost, p_bar0 * r.p_bar_ratio);
    p.estimate.resources.emplace_back(cost, p_bar0 * r.p_bar_ratio * scale);
  }
  p.generator.arrival_case = cfg.arrival_case;
  p.generator.n_customers = cfg.n_customers;
  p.generator.p_bar_true = p_bar0;
  p.generator.delta = delta;
  p.generator.puv = cfg.puv;
  p.generator.horizon = cfg.horizon;
  p.generator.mean_duration = cfg.mean_duration;
  validate_config(p.generator);
  for (auto kind : cfg.mechanisms) {
    p.pricing.push_back(curves_for(kind, p.estimate, cfg));
  }
  return p;
}

InstanceResult evaluate_instance(const ExperimentConfig& cfg, const PointSetup& point,
                                 std::uint64_t seed) {
  GeneratorConfig gen = point.generator;
  gen.seed = seed;
  const ArrivalInstance instance = generate(gen, cfg.catalog).instance;

  InstanceResult r;
  r.sweep_value = point.sweep_value;
  r.seed = seed;
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m) {
    const OutcomeLog log = run(instance, point.truth, point.pricing[m]);
    r.w_online.push_back(log.w_online);
    double peak = 0.0;
    for (const auto& row : log.utilization) {
      for (double y : row) peak = std::max(peak, y);
    }
    r.max_utilization.push_back(peak);
    bound = std::min(bound, dual_upper_bound(instance, point.truth,
                                             terminal_prices(log, point.pricing[m])));
  }
  if (enumeration_bits(instance) <= cfg.enumeration_budget) {
    EnumerationOptions opts;
    opts.parallel = false;
    opts.budget_bits = cfg.enumeration_budget;
    r.w_opt_kind = "exact";
    r.w_opt = brute_force_opt(instance, point.truth, opts);
  } else {
    r.w_opt_kind = "dual";
    r.w_opt = bound;
  }
  for (double w : r.w_online) {
    r.er.push_back(w > 0.0 ? std::optional<double>(r.w_opt / w) : std::nullopt);
  }
  return r;
}

std::vector<InstanceResult> evaluate_point_serial(const ExperimentConfig& cfg,
                                                  const PointSetup& point) {
  std::vector<InstanceResult> out;
  out.reserve(cfg.n_instances);
  for (std::size_t i = 0; i < cfg.n_instances; ++i) {
    out.push_back(evaluate_instance(cfg, point, cfg.seed + i));
  }
  return out;
}

std::vector<InstanceResult> evaluate_point_omp(const ExperimentConfig& cfg,
                                               const PointSetup& point) {
  std::vector<InstanceResult> out(cfg.n_instances);
  const long n = static_cast<long>(cfg.n_instances);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    out[i] = evaluate_instance(cfg, point, cfg.seed + static_cast<std::uint64_t>(i));
  }
  return out;
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg,
                                    const std::vector<InstanceResult>& results) {
  std::vector<AggregateRow> rows;
  std::vector<double> order;
  std::map<double, std::vector<const InstanceResult*>> by_point;
  for (const auto& r : results) {
    if (!by_point.count(r.sweep_value)) order.push_back(r.sweep_value);
    by_point[r.sweep_value].push_back(&r);
  }
  for (double v : order) {
    for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m) {
      double sum = 0.0;
      double sq = 0.0;
      std::size_t n = 0;
      for (const auto* r : by_point[v]) {
        if (!r->er[m]) continue;
        sum += *r->er[m];
        sq += *r->er[m] * *r->er[m];
        ++n;
      }
      const double mean = n ? sum / n : std::nan("");
      const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1)) : 0.0;
      rows.push_back({v, to_string(cfg.mechanisms[m]), mean, std::sqrt(var), n});
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const ExperimentConfig& cfg,
                       const std::vector<InstanceResult>& results) {
  out << "sweep_value,mechanism,seed,w_online,w_opt_kind,w_opt,er\n";
  for (const auto& r : results) {
    for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m) {
      out << format_value(r.sweep_value) << ',' << to_string(cfg.mechanisms[m]) << ','
          << r.seed << ',' << format_value(r.w_online[m]) << ',' << r.w_opt_kind << ','
          << format_value(r.w_opt) << ',';
      if (r.er[m]) out << format_value(*r.er[m]);
      out << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "sweep_value,mechanism,mean_er,std_er,n\n";
  for (const auto& r : rows) {
    out << format_value(r.sweep_value) << ',' << r.mechanism << ',' << format_value(r.mean_er)
        << ',' << format_value(r.std_er) << ',' << r.n << '\n';
  }
}

std::vector<AggregateRow> aggregate_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sweep_value,mechanism,seed,w_online,w_opt_kind,w_opt,er") {
    throw ValidationError("results CSV header mismatch");
  }
  struct Acc {
    double sum = 0, sq = 0;
    std::size_t n = 0;
  };
  std::vector<std::pair<double, std::string>> order;
  std::map<std::pair<double, std::string>, Acc> acc;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() == 6) f.emplace_back();
    if (f.size() != 7) {
      throw ValidationError("results CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    const auto key = std::make_pair(std::stod(f[0]), f[1]);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    if (!f[6].empty()) {
      const double er = std::stod(f[6]);
      a.sum += er;
      a.sq += er * er;
      ++a.n;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& key : order) {
    const auto& a = acc[key];
    const double mean = a.n ? a.sum / a.n : std::nan("");
    const double var = a.n > 1 ? std::max(0.0, (a.sq - a.n * mean * mean) / (a.n - 1)) : 0.0;
    rows.push_back({key.first, key.second, mean, std::sqrt(var), a.n});
  }
  return rows;
}

void write_timeseries_csv(std::ostream& out, const ExperimentConfig& cfg,
                          const PointSetup& point, std::uint64_t seed) {
  GeneratorConfig gen = point.generator;
  gen.seed = seed;
  const ArrivalInstance instance = generate(gen, cfg.catalog).instance;
  out << "mechanism,resource,slot,utilization\n";
  for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m) {
    const OutcomeLog log = run(instance, point.truth, point.pricing[m]);
    for (std::size_t k = 0; k < log.utilization.size(); ++k) {
      for (std::size_t t = 0; t < log.utilization[k].size(); ++t) {
        out << to_string(cfg.mechanisms[m]) << ',' << k << ',' << t << ','
            << format_value(log.utilization[k][t]) << '\n';
      }
    }
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentOutput out;
  for (double v : cfg.sweep_values) {
    const PointSetup point = prepare_point(cfg, v);
    auto rows = cfg.parallel ? evaluate_point_omp(cfg, point) : evaluate_point_serial(cfg, point);
    out.results.insert(out.results.end(), rows.begin(), rows.end());
  }
  out.aggregates = aggregate(cfg, out.results);
  return out;
}

}  // namespace ppm
