#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ppm/model.hpp"

namespace ppm {

/// Uniform/Evolving PUVs, Exact/Inexact knowledge of p_bar.
enum class ArrivalCase { UE, EE, UI, EI };

std::string to_string(ArrivalCase c);
ArrivalCase parse_arrival_case(const std::string& text);

struct PuvDistribution {
  enum class Kind { Uniform, TruncatedNormal };
  Kind kind = Kind::Uniform;
  double mu = 0.0;
  double sigma = 1.0;
};

struct GeneratorConfig {
  ArrivalCase arrival_case = ArrivalCase::UE;
  std::size_t n_customers = 4000;
  double p_bar_true = 1.0;  // PUV bound of resource 0, the one valuations scale with
  double delta = 0.0;       // p_bar_estimate = p_bar_true (1 + delta) in UI/EI
  PuvDistribution puv;
  int horizon = 3600;
  double mean_duration = 30.0;  // geometric durations, truncated at the horizon
  std::uint64_t seed = 0;
};

void validate_config(const GeneratorConfig& cfg);

struct GeneratedInstance {
  ArrivalInstance instance;
  double p_bar_estimate;
};

/// Each customer draws one bundle uniformly from `catalog` and a PUV p, and
/// values it at p * duration * r_0. Arrivals are N sorted uniform slots.
GeneratedInstance generate(const GeneratorConfig& cfg,
                           const std::vector<Bundle>& catalog);

/// p ~ N(mu, sigma^2) conditioned on [lo, hi], by rejection.
double sample_truncated_normal(std::mt19937_64& rng, double mu, double sigma,
                               double lo, double hi);

struct TraceLoad {
  ArrivalInstance instance;
  std::vector<std::string> warnings;
};

std::vector<Bundle> read_catalog_csv(std::istream& in);
void write_catalog_csv(std::ostream& out, const std::vector<Bundle>& catalog);

/// Rows sharing a customer_id form that customer's choice set. `horizon` <= 0
/// means "last occupied slot + 1".
TraceLoad read_trace_csv(std::istream& in, std::vector<Bundle> catalog,
                         int horizon = 0);
void write_trace_csv(std::ostream& out, const ArrivalInstance& instance);

TraceLoad load_trace(const std::string& trace_path, const std::string& catalog_path,
                     int horizon = 0);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
};

ValidationReport validate(const ArrivalInstance& instance, const Setup& setup,
                          double small_demand_cap = 0.01);

/// Section-VI style market: CPU (a=0.223, s=3) and RAM (a=8.38e-6, s=1.2),
/// nine bundles from {0.001, 0.003, 0.005}^2, and p_bar_ram = 5 p_bar_cpu.
struct Preset {
  std::string name;
  Setup setup;
  std::vector<Bundle> catalog;
  int horizon;
  std::size_t n_customers;
  double mean_duration;
};

Preset google_cluster_like(double p_bar_cpu);
/// Same market at desk scale: N=500, T=600, durations of mean T/2.
Preset desk_preset(double p_bar_cpu);
Preset preset_by_name(const std::string& name, double p_bar_cpu);

}  // namespace ppm
