#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ppm/instances.hpp"
#include "ppm/mechanism.hpp"
#include "ppm/oracle.hpp"

namespace ppm {

enum class MechanismKind { Optimal, TwiceIndex, Myopic };

std::string to_string(MechanismKind kind);  // PPM-OP, PPM-TP, PPM-MP
MechanismKind parse_mechanism(const std::string& name);

enum class SweepAxis { PBarMultiple, Delta };

std::string to_string(SweepAxis axis);

/// A resource given explicitly: p_bar_k = p_bar_ratio * p_bar of resource 0,
/// and p_bar of resource 0 is (sweep or fixed multiple) * its c_high.
struct ResourceSpec {
  double a;
  double s;
  double p_bar_ratio = 1.0;
};

struct ExperimentConfig {
  std::string preset = "desk";  // empty when resources/catalog are explicit
  std::vector<ResourceSpec> resources;
  std::vector<Bundle> catalog;
  int horizon = 600;
  std::size_t n_customers = 500;
  double mean_duration = 300.0;

  ArrivalCase arrival_case = ArrivalCase::UE;
  PuvDistribution puv;
  std::vector<MechanismKind> mechanisms{MechanismKind::Optimal, MechanismKind::TwiceIndex,
                                        MechanismKind::Myopic};
  SweepAxis axis = SweepAxis::PBarMultiple;
  std::vector<double> sweep_values{1, 2, 3, 4, 5, 6, 7, 8, 9};
  double p_bar_multiple = 1.0;  // used when the axis is delta
  double delta = 0.0;           // used when the axis is the p_bar multiple
  double choice = 0.0;          // aggressiveness of the optimal curve
  std::size_t n_instances = 100;
  std::uint64_t seed = 1;
  double enumeration_budget = 40.0;
  bool tabulate = true;
  bool parallel = true;
  std::optional<double> timeseries_point;  // sweep value whose first instance is traced
  std::string out = "results";
};

/// Defaults with the named preset's market filled in.
ExperimentConfig preset_config(const std::string& preset = "desk");

/// Parses the JSON config; missing fields keep the defaults above (a preset
/// fills resources, catalog, horizon, customers and durations unless they
/// are given). Throws ValidationError.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

/// Market and curves at one sweep point.
struct PointSetup {
  double sweep_value;
  Setup truth;      // true PUV bounds; used for validation and the oracles
  Setup estimate;   // bounds the mechanisms are designed with
  GeneratorConfig generator;
  std::vector<std::vector<PricingFunction>> pricing;  // per mechanism, per resource
};

PointSetup prepare_point(const ExperimentConfig& cfg, double sweep_value);

struct InstanceResult {
  double sweep_value;
  std::uint64_t seed;
  std::vector<double> w_online;  // per mechanism
  std::string w_opt_kind;        // exact | dual
  double w_opt;
  std::vector<std::optional<double>> er;
  std::vector<double> max_utilization;  // per mechanism, over resources and slots
};

InstanceResult evaluate_instance(const ExperimentConfig& cfg, const PointSetup& point,
                                 std::uint64_t seed);

/// All instances of one point; the parallel version distributes seeds over
/// threads and returns results in seed order.
std::vector<InstanceResult> evaluate_point_serial(const ExperimentConfig& cfg,
                                                  const PointSetup& point);
std::vector<InstanceResult> evaluate_point_omp(const ExperimentConfig& cfg,
                                               const PointSetup& point);

struct AggregateRow {
  double sweep_value;
  std::string mechanism;
  double mean_er;
  double std_er;
  std::size_t n;
};

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg,
                                    const std::vector<InstanceResult>& results);

/// sweep_value,mechanism,seed,w_online,w_opt_kind,w_opt,er
void write_results_csv(std::ostream& out, const ExperimentConfig& cfg,
                       const std::vector<InstanceResult>& results);
/// sweep_value,mechanism,mean_er,std_er,n
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
/// Recomputes aggregates from a results CSV.
std::vector<AggregateRow> aggregate_results_csv(std::istream& in);

/// mechanism,resource,slot,utilization for one instance.
void write_timeseries_csv(std::ostream& out, const ExperimentConfig& cfg,
                          const PointSetup& point, std::uint64_t seed);

struct ExperimentOutput {
  std::vector<InstanceResult> results;
  std::vector<AggregateRow> aggregates;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace ppm
