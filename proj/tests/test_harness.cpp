#include <doctest.h>

#include <sstream>

#include "ppm/error.hpp"
#include "ppm/harness.hpp"

using namespace ppm;

namespace {

ExperimentConfig quick() {
  ExperimentConfig cfg = preset_config("desk");
  cfg.n_customers = 60;
  cfg.horizon = 60;
  cfg.mean_duration = 30;
  cfg.n_instances = 4;
  cfg.sweep_values = {1, 3};
  return cfg;
}

std::string results_text(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  std::ostringstream s;
  write_results_csv(s, cfg, out.results);
  return s.str();
}

std::string aggregate_text(const std::vector<AggregateRow>& rows) {
  std::ostringstream s;
  write_aggregate_csv(s, rows);
  return s.str();
}

}  // namespace

TEST_CASE("mechanism names") {
  CHECK(to_string(MechanismKind::Optimal) == "PPM-OP");
  CHECK(parse_mechanism("PPM-TP") == MechanismKind::TwiceIndex);
  CHECK(parse_mechanism("MP") == MechanismKind::Myopic);
  CHECK_THROWS_AS(parse_mechanism("PPM-XX"), ValidationError);
}

TEST_CASE("config parsing and validation") {
  const auto cfg = parse_config(R"({"preset": "desk", "n_instances": 7, "case": "UI",
      "sweep": {"axis": "delta", "values": [-0.8, 0, 2.4]}, "p_bar_multiple": 3})");
  CHECK(cfg.n_instances == 7);
  CHECK(cfg.arrival_case == ArrivalCase::UI);
  CHECK(cfg.axis == SweepAxis::Delta);
  CHECK(cfg.resources.size() == 2);
  CHECK(cfg.catalog.size() == 9);
  const auto again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));

  CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"mechanisms": []})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"n_instances": 0})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"axis": "delta", "values": [3.0]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"resources": [{"a": 1, "s": 2}]})"), ValidationError);
  const auto explicit_setup = parse_config(
      R"({"resources": [{"a": 1, "s": 2}], "catalog": [[0.01], [0.02]], "horizon": 10})");
  CHECK(explicit_setup.preset.empty());
  CHECK(explicit_setup.horizon == 10);
  ExperimentConfig empty = quick();
  empty.mechanisms.clear();
  CHECK_THROWS_AS(validate(empty), ValidationError);
}

TEST_CASE("point setup") {
  ExperimentConfig cfg = quick();
  cfg.arrival_case = ArrivalCase::UI;
  cfg.axis = SweepAxis::Delta;
  cfg.p_bar_multiple = 3;
  cfg.sweep_values = {0.5};
  const PointSetup p = prepare_point(cfg, 0.5);
  CHECK(p.truth.resources[0].p_bar == doctest::Approx(3 * 0.669));
  CHECK(p.estimate.resources[0].p_bar == doctest::Approx(4.5 * 0.669));
  CHECK(p.estimate.resources[1].p_bar == doctest::Approx(5 * 4.5 * 0.669));
  CHECK(p.pricing.size() == 3);
  CHECK(p.pricing[0][0].eval_mode() == EvalMode::Tabulated);
}

TEST_CASE("one instance, one mechanism") {
  ExperimentConfig cfg = quick();
  cfg.n_instances = 1;
  cfg.sweep_values = {2};
  cfg.mechanisms = {MechanismKind::Optimal};
  const auto out = run_experiment(cfg);
  CHECK(out.results.size() == 1);
  CHECK(out.aggregates.size() == 1);
  std::istringstream in(results_text(cfg, out));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1);
}

TEST_CASE("determinism, serial reference and aggregate round trip") {
  const ExperimentConfig cfg = quick();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(results_text(cfg, a) == results_text(cfg, b));
  ExperimentConfig serial = cfg;
  serial.parallel = false;
  const auto s = run_experiment(serial);
  CHECK(results_text(cfg, a) == results_text(serial, s));

  std::istringstream in(results_text(cfg, a));
  const auto rows = aggregate_results_csv(in);
  CHECK(aggregate_text(rows) == aggregate_text(a.aggregates));
  CHECK(rows.size() == 6);

  for (const auto& r : a.results) {
    for (std::size_t m = 0; m < r.er.size(); ++m) {
      if (r.er[m] && r.w_opt_kind == "exact") CHECK(*r.er[m] >= 1 - 1e-9);
    }
  }
  std::istringstream bad("wrong,header\n");
  CHECK_THROWS_AS(aggregate_results_csv(bad), ValidationError);
}

TEST_CASE("exact oracle is used within the budget") {
  ExperimentConfig cfg = quick();
  cfg.n_customers = 8;
  cfg.horizon = 1;
  cfg.mean_duration = 1;
  cfg.sweep_values = {3};
  const auto out = run_experiment(cfg);
  for (const auto& r : out.results) {
    CHECK(r.w_opt_kind == "exact");
    for (std::size_t m = 0; m < r.w_online.size(); ++m) CHECK(r.w_online[m] <= r.w_opt + 1e-9);
  }
}

TEST_CASE("utilization time series") {
  const ExperimentConfig cfg = quick();
  const PointSetup p = prepare_point(cfg, 2);
  std::ostringstream out;
  write_timeseries_csv(out, cfg, p, 1);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "mechanism,resource,slot,utilization");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 2 * cfg.horizon);
}
