// ppm: synthesize pricing curves, generate instances, run the desk experiments.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ppm/error.hpp"
#include "ppm/harness.hpp"
#include "ppm/instances.hpp"
#include "ppm/mechanism.hpp"
#include "ppm/oracle.hpp"
#include "ppm/pricing.hpp"

namespace fs = std::filesystem;
using namespace ppm;

namespace {

// Commonly quoted critical bound for the CPU cost a = 0.223, s = 3
// (about 6.28 f'(1)). It does not match the integral; both are shown.
constexpr double kQuotedCriticalBound = 4.21;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  return out;
}

struct SynthArgs {
  double a = 0.223;
  double s = 3.0;
  double p_bar_mult = 1.0;
  double p_bar = 0.0;  // absolute, overrides the multiple when > 0
  double choice = 0.0;
  std::string scheme = "optimal";
  std::string curve_csv;
  std::size_t points = 1001;
};

void print_opt(const char* name, const std::optional<double>& v) {
  if (v) std::printf("  %-6s %.10g\n", name, *v);
}

int cmd_synthesize(const SynthArgs& args) {
  const PowerCost cost(args.a, args.s);
  const double p_bar = args.p_bar > 0.0 ? args.p_bar : args.p_bar_mult * cost.max_marginal();
  const ResourceSetup rs(cost, p_bar);

  PricingFunction phi = [&] {
    if (args.scheme == "optimal") return synthesize_optimal(rs, args.choice);
    if (args.scheme == "myopic") return benchmark_pricing(BenchmarkKind::Myopic, rs);
    if (args.scheme == "twice-index") return benchmark_pricing(BenchmarkKind::TwiceIndex, rs);
    throw ValidationError("scheme must be optimal, myopic or twice-index");
  }();

  const Regime& regime = phi.regime();
  const auto rc = regime_constants(args.s);
  std::printf("a=%g s=%g c_high=%.10g p_bar=%.10g (%.6g c_high)\n", args.a, args.s,
              cost.max_marginal(), p_bar, p_bar / cost.max_marginal());
  std::printf("scheme     %s\n", to_string(phi.scheme()).c_str());
  std::printf("regime     %s\n", to_string(regime.tag).c_str());
  std::printf("alpha*     %.10g\n", optimal_ratio(rs));
  std::printf("alpha_min  %.10g\n", rc.alpha_min);
  std::printf("u_s        %.10g\n", rc.u_s);
  std::printf("C_s        %.10g  (%.6g c_high)\n", regime.c_s, regime.c_s / cost.max_marginal());
  if (args.s == 3.0 && args.a == 0.223) {
    std::printf("C_s quoted %.6g vs computed %.6g: %s\n", kQuotedCriticalBound, regime.c_s,
                std::abs(regime.c_s - kQuotedCriticalBound) <= 1e-2 * kQuotedCriticalBound
                    ? "agree"
                    : "DISAGREE");
  }
  std::printf("knots\n");
  print_opt("v", regime.v);
  print_opt("w", regime.w);
  print_opt("m", phi.knots().m);
  print_opt("u", phi.knots().u);
  print_opt("rho", phi.knots().rho);
  print_opt("u_cdt", phi.knots().u_cdt);
  std::printf("domain_end %.10g\nterminal   %.10g\n", phi.domain_end(), phi.terminal_price());

  if (!args.curve_csv.empty()) {
    auto out = open_out(args.curve_csv);
    write_curve_csv(out, phi, args.points);
    std::printf("curve -> %s\n", args.curve_csv.c_str());
  }
  return 0;
}

// Experiment options shared by run and sweep; flags override the config file.
struct ExpArgs {
  std::string config;
  std::string preset;
  std::string arrival_case;
  std::vector<std::string> mechanisms;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  double choice = -1.0;
  double p_bar_mult = 0.0;
  double delta = 0.0;
  std::string out;
  bool serial = false;
};

ExperimentConfig build_config(const ExpArgs& args, CLI::App* app) {
  ExperimentConfig cfg;
  if (!args.config.empty()) {
    cfg = parse_config(read_file(args.config));
  } else {
    cfg = preset_config(args.preset.empty() ? "desk" : args.preset);
  }
  if (!args.config.empty() && !args.preset.empty()) {
    auto with_preset = preset_config(args.preset);
    cfg.preset = with_preset.preset;
    cfg.resources = with_preset.resources;
    cfg.catalog = with_preset.catalog;
    cfg.horizon = with_preset.horizon;
    cfg.n_customers = with_preset.n_customers;
    cfg.mean_duration = with_preset.mean_duration;
  }
  if (!args.arrival_case.empty()) cfg.arrival_case = parse_arrival_case(args.arrival_case);
  if (!args.mechanisms.empty()) {
    cfg.mechanisms.clear();
    for (const auto& m : args.mechanisms) cfg.mechanisms.push_back(parse_mechanism(m));
  }
  if (app->count("--seed")) cfg.seed = args.seed;
  if (app->count("--instances")) cfg.n_instances = args.instances;
  if (app->count("--choice")) cfg.choice = args.choice;
  if (app->count("--p-bar-mult")) cfg.p_bar_multiple = args.p_bar_mult;
  if (app->count("--delta")) cfg.delta = args.delta;
  if (app->count("--out")) cfg.out = args.out;
  if (args.serial) cfg.parallel = false;
  validate(cfg);
  return cfg;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& result,
                   bool per_point) {
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "results.csv");
    write_results_csv(out, cfg, result.results);
  }
  {
    auto out = open_out(dir / "aggregate.csv");
    write_aggregate_csv(out, result.aggregates);
  }
  {
    auto out = open_out(dir / "config.json");
    out << config_to_json(cfg) << '\n';
  }
  if (per_point) {
    for (double v : cfg.sweep_values) {
      std::vector<InstanceResult> rows;
      for (const auto& r : result.results) {
        if (r.sweep_value == v) rows.push_back(r);
      }
      std::ostringstream name;
      name << "point_" << v << ".csv";
      auto out = open_out(dir / name.str());
      write_results_csv(out, cfg, rows);
    }
  }
}

void print_aggregates(const std::vector<AggregateRow>& rows) {
  std::printf("%-12s %-8s %10s %10s %5s\n", "sweep_value", "mech", "mean_er", "std_er", "n");
  for (const auto& r : rows) {
    std::printf("%-12g %-8s %10.5f %10.5f %5zu\n", r.sweep_value, r.mechanism.c_str(),
                r.mean_er, r.std_er, r.n);
  }
}

int cmd_run(const ExpArgs& args, CLI::App* app) {
  ExperimentConfig cfg = build_config(args, app);
  // A run is a single point: the configured p_bar multiple (or delta).
  cfg.sweep_values = {cfg.axis == SweepAxis::PBarMultiple ? cfg.p_bar_multiple : cfg.delta};
  const auto result = run_experiment(cfg);
  write_outputs(cfg, result, false);
  print_aggregates(result.aggregates);
  std::printf("-> %s/results.csv, %s/aggregate.csv\n", cfg.out.c_str(), cfg.out.c_str());
  return 0;
}

int cmd_sweep(const ExpArgs& args, const std::string& axis, const std::vector<double>& values,
              double timeseries_point, CLI::App* app) {
  ExperimentConfig cfg = build_config(args, app);
  if (!axis.empty()) {
    if (axis == "p_bar_multiple") {
      cfg.axis = SweepAxis::PBarMultiple;
    } else if (axis == "delta") {
      cfg.axis = SweepAxis::Delta;
    } else {
      throw ValidationError("--axis must be p_bar_multiple or delta");
    }
  }
  if (!values.empty()) cfg.sweep_values = values;
  if (app->count("--timeseries")) cfg.timeseries_point = timeseries_point;
  validate(cfg);
  const auto result = run_experiment(cfg);
  write_outputs(cfg, result, true);

  const double traced = cfg.timeseries_point.value_or(cfg.sweep_values.front());
  const PointSetup point = prepare_point(cfg, traced);
  auto out = open_out(fs::path(cfg.out) / "timeseries.csv");
  write_timeseries_csv(out, cfg, point, cfg.seed);

  print_aggregates(result.aggregates);
  std::printf("-> %s/ (results, aggregate, point_*, timeseries at %g)\n", cfg.out.c_str(),
              traced);
  return 0;
}

struct OracleArgs {
  std::string trace;
  std::string catalog;
  std::string preset = "desk";
  double p_bar_mult = 1.0;
  int horizon = 0;
  double budget = 40.0;
  bool no_prune = false;
  double choice = 0.0;
};

int cmd_oracle(const OracleArgs& args) {
  const TraceLoad load = load_trace(args.trace, args.catalog, args.horizon);
  for (const auto& w : load.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const Preset preset = preset_by_name(args.preset, 1.0);
  const double p_bar0 = args.p_bar_mult * preset.setup.resources[0].c_high();
  Setup setup;
  for (const auto& r : preset.setup.resources) {
    setup.resources.emplace_back(r.cost, p_bar0 * r.p_bar / preset.setup.resources[0].p_bar);
  }
  if (load.instance.catalog.empty() ||
      load.instance.catalog.front().units.size() != setup.resource_count()) {
    throw ValidationError("catalog width does not match the preset's resource count");
  }
  const auto report = validate(load.instance, setup);
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!report.ok) {
    for (const auto& v : report.violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
    throw ValidationError("trace violates the setup");
  }

  std::vector<PricingFunction> pricing;
  for (const auto& rs : setup.resources) pricing.push_back(synthesize_optimal(rs, args.choice));
  const OutcomeLog log = run(load.instance, setup, pricing);
  PriceGrid prices(pricing.size());
  for (std::size_t k = 0; k < pricing.size(); ++k) {
    for (double y : log.utilization[k]) prices[k].push_back(pricing[k](y));
  }
  const double bound = dual_upper_bound(load.instance, setup, prices);

  std::optional<double> exact;
  const double bits = enumeration_bits(load.instance);
  if (bits <= args.budget) {
    EnumerationOptions opts;
    opts.prune = !args.no_prune;
    opts.budget_bits = args.budget;
    exact = brute_force_opt(load.instance, setup, opts);
  }
  const auto er = empirical_ratio(log.w_online, exact, bound);
  std::printf("customers       %zu\n", load.instance.customers.size());
  std::printf("search bits     %.3f (budget %.3g)\n", bits, args.budget);
  std::printf("w_online        %.12g  (PPM-OP)\n", log.w_online);
  if (exact) std::printf("w_opt           %.12g\n", *exact);
  std::printf("dual bound      %.12g\n", bound);
  if (er.er_exact) std::printf("er_exact        %.10g\n", *er.er_exact);
  if (er.er_bound) std::printf("er_bound        %.10g\n", *er.er_bound);
  if (er.both_zero) std::printf("w_online = w_opt = 0\n");
  std::printf("alpha*          %.10g\n", [&] {
    double a = 0.0;
    for (const auto& rs : setup.resources) a = std::max(a, optimal_ratio(rs));
    return a;
  }());
  return 0;
}

struct GenArgs {
  std::string preset = "desk";
  std::string arrival_case = "UE";
  double p_bar_mult = 1.0;
  double delta = 0.0;
  std::uint64_t seed = 1;
  std::size_t customers = 0;
  std::string out = "instance";
};

int cmd_gen(const GenArgs& args) {
  const Preset preset = preset_by_name(args.preset, 1.0);
  GeneratorConfig gen;
  gen.arrival_case = parse_arrival_case(args.arrival_case);
  gen.n_customers = args.customers ? args.customers : preset.n_customers;
  gen.p_bar_true = args.p_bar_mult * preset.setup.resources[0].c_high();
  gen.delta = args.delta;
  gen.horizon = preset.horizon;
  gen.mean_duration = preset.mean_duration;
  gen.seed = args.seed;
  const auto g = generate(gen, preset.catalog);
  const fs::path dir(args.out);
  {
    auto out = open_out(dir / "catalog.csv");
    write_catalog_csv(out, preset.catalog);
  }
  {
    auto out = open_out(dir / "trace.csv");
    write_trace_csv(out, g.instance);
  }
  std::printf("%zu customers, horizon %d, p_bar %.10g (estimate %.10g) -> %s/\n",
              g.instance.customers.size(), g.instance.horizon, gen.p_bar_true,
              g.p_bar_estimate, args.out.c_str());
  return 0;
}

void add_experiment_options(CLI::App* sub, ExpArgs& args) {
  sub->add_option("--config", args.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--preset", args.preset, "google-cluster-like or desk");
  sub->add_option("--case", args.arrival_case, "UE, EE, UI or EI");
  sub->add_option("--mechanisms", args.mechanisms, "PPM-OP PPM-TP PPM-MP");
  sub->add_option("--seed", args.seed, "first instance seed");
  sub->add_option("--instances", args.instances, "instances per point");
  sub->add_option("--choice", args.choice, "aggressiveness of PPM-OP in [0, 1]");
  sub->add_option("--p-bar-mult", args.p_bar_mult, "p_bar of resource 0 in units of f'(1)");
  sub->add_option("--delta", args.delta, "relative error of the p_bar estimate (UI/EI)");
  sub->add_option("--out", args.out, "output directory");
  sub->add_flag("--serial", args.serial, "evaluate instances on one thread");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posted-price mechanisms with optimal pricing under power supply costs"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synthesize", "pricing curve, regime, ratio and knots");
  s->add_option("--a", synth.a, "cost coefficient");
  s->add_option("--s", synth.s, "cost exponent (> 1)");
  s->add_option("--p-bar-mult", synth.p_bar_mult, "p_bar in units of f'(1)");
  s->add_option("--p-bar", synth.p_bar, "absolute p_bar (overrides --p-bar-mult)");
  s->add_option("--choice", synth.choice, "aggressiveness in [0, 1]");
  s->add_option("--scheme", synth.scheme, "optimal, myopic or twice-index");
  s->add_option("--curve-csv", synth.curve_csv, "write y,price rows here");
  s->add_option("--points", synth.points, "rows in the curve CSV");

  ExpArgs run_args;
  auto* r = app.add_subcommand("run", "one point: per-instance rows and aggregates");
  add_experiment_options(r, run_args);

  ExpArgs sweep_args;
  std::string axis;
  std::vector<double> values;
  double timeseries = 0.0;
  auto* w = app.add_subcommand("sweep", "sweep over p_bar multiples or delta");
  add_experiment_options(w, sweep_args);
  w->add_option("--axis", axis, "p_bar_multiple or delta");
  w->add_option("--values", values, "sweep points");
  w->add_option("--timeseries", timeseries, "sweep point whose first instance is traced");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "exact offline optimum and dual bound for a trace");
  o->add_option("--trace", oracle.trace, "trace CSV")->required()->check(CLI::ExistingFile);
  o->add_option("--catalog", oracle.catalog, "catalog CSV")->required()->check(CLI::ExistingFile);
  o->add_option("--preset", oracle.preset, "market the trace is priced in");
  o->add_option("--p-bar-mult", oracle.p_bar_mult, "p_bar of resource 0 in units of f'(1)");
  o->add_option("--horizon", oracle.horizon, "slots (0: inferred)");
  o->add_option("--budget", oracle.budget, "enumeration budget in bits");
  o->add_option("--choice", oracle.choice, "aggressiveness of PPM-OP");
  o->add_flag("--no-prune", oracle.no_prune, "disable bound pruning");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a trace and catalog");
  g->add_option("--preset", gen.preset, "google-cluster-like or desk");
  g->add_option("--case", gen.arrival_case, "UE, EE, UI or EI");
  g->add_option("--p-bar-mult", gen.p_bar_mult, "p_bar of resource 0 in units of f'(1)");
  g->add_option("--delta", gen.delta, "relative error of the p_bar estimate");
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--customers", gen.customers, "number of customers (0: preset)");
  g->add_option("--out", gen.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) return cmd_synthesize(synth);
    if (r->parsed()) return cmd_run(run_args, r);
    if (w->parsed()) return cmd_sweep(sweep_args, axis, values, timeseries, w);
    if (o->parsed()) return cmd_oracle(oracle);
    if (g->parsed()) return cmd_gen(gen);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
