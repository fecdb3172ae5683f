// Serial references vs OpenMP versions of the data-parallel kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "ppm/harness.hpp"
#include "ppm/kernels.hpp"
#include "ppm/oracle.hpp"
#include "ppm/pricing.hpp"

using namespace ppm;

namespace {

const PowerCost kCpu(0.223, 3.0);

PricingFunction scaled_root_curve() {
  // choice 0.5 in HUC1 needs the root solve at every point
  return synthesize_optimal(ResourceSetup(kCpu, 3 * kCpu.max_marginal()), 0.5);
}

std::vector<double> grid(std::size_t n) {
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = (i + 0.5) / n;
  return ys;
}

void BM_curve_serial(benchmark::State& state) {
  const auto phi = scaled_root_curve();
  const auto ys = grid(state.range(0));
  std::vector<double> out;
  for (auto _ : state) {
    kernels::evaluate_curve_serial(phi, ys, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_curve_omp(benchmark::State& state) {
  const auto phi = scaled_root_curve();
  const auto ys = grid(state.range(0));
  std::vector<double> out;
  for (auto _ : state) {
    kernels::evaluate_curve_omp(phi, ys, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

ExperimentConfig batch_config() {
  ExperimentConfig cfg = preset_config("desk");
  cfg.n_instances = 16;
  return cfg;
}

void BM_point_serial(benchmark::State& state) {
  const auto cfg = batch_config();
  const auto point = prepare_point(cfg, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_point_serial(cfg, point));
}

void BM_point_omp(benchmark::State& state) {
  const auto cfg = batch_config();
  const auto point = prepare_point(cfg, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_point_omp(cfg, point));
}

ArrivalInstance search_instance(Setup& setup) {
  setup.resources.emplace_back(kCpu, 3 * kCpu.max_marginal());
  ArrivalInstance inst;
  inst.catalog = {Bundle{{0.1}}, Bundle{{0.2}}, Bundle{{0.3}}};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < 16; ++i) {
    Customer c;
    c.id = i;
    for (std::size_t b = 0; b < 2; ++b) {
      const std::size_t bundle = rng() % 3;
      c.offers.push_back({bundle, unit(rng) * 2.0 * inst.catalog[bundle].units[0]});
    }
    inst.customers.push_back(c);
  }
  return inst;
}

void BM_bruteforce(benchmark::State& state) {
  Setup setup;
  const auto inst = search_instance(setup);
  EnumerationOptions opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_opt(inst, setup, opts));
}

}  // namespace

BENCHMARK(BM_curve_serial)->Arg(1 << 10)->Arg(1 << 13)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_curve_omp)->Arg(1 << 10)->Arg(1 << 13)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_point_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_point_omp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_bruteforce)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
