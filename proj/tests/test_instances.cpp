#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ppm/error.hpp"
#include "ppm/instances.hpp"

using namespace ppm;

namespace {

Setup cpu_only(double p_bar) {
  Setup s;
  s.resources.emplace_back(PowerCost(0.223, 3), p_bar);
  return s;
}

GeneratorConfig small(ArrivalCase c, std::size_t n, std::uint64_t seed) {
  GeneratorConfig g;
  g.arrival_case = c;
  g.n_customers = n;
  g.p_bar_true = 2.0;
  g.horizon = 100;
  g.mean_duration = 5;
  g.seed = seed;
  return g;
}

bool same_instance(const ArrivalInstance& a, const ArrivalInstance& b) {
  if (a.horizon != b.horizon || a.customers.size() != b.customers.size()) return false;
  if (a.catalog.size() != b.catalog.size()) return false;
  for (std::size_t i = 0; i < a.catalog.size(); ++i) {
    if (a.catalog[i].units != b.catalog[i].units) return false;
  }
  for (std::size_t i = 0; i < a.customers.size(); ++i) {
    const auto& x = a.customers[i];
    const auto& y = b.customers[i];
    if (x.id != y.id || x.arrival != y.arrival || x.duration != y.duration) return false;
    if (x.offers.size() != y.offers.size()) return false;
    for (std::size_t o = 0; o < x.offers.size(); ++o) {
      if (x.offers[o].bundle != y.offers[o].bundle) return false;
      if (x.offers[o].valuation != y.offers[o].valuation) return false;
    }
  }
  return true;
}

const std::vector<Bundle> kCatalog{Bundle{{0.001}}, Bundle{{0.003}}, Bundle{{0.005}}};

}  // namespace

TEST_CASE("generator basics") {
  CHECK(generate(small(ArrivalCase::UE, 0, 1), kCatalog).instance.customers.empty());
  const auto a = generate(small(ArrivalCase::UE, 300, 5), kCatalog);
  const auto b = generate(small(ArrivalCase::UE, 300, 5), kCatalog);
  CHECK(same_instance(a.instance, b.instance));
  const auto c = generate(small(ArrivalCase::UE, 300, 6), kCatalog);
  CHECK_FALSE(same_instance(a.instance, c.instance));
  CHECK(a.p_bar_estimate == 2.0);

  int prev = 0;
  for (const auto& cu : a.instance.customers) {
    CHECK(cu.arrival >= prev);
    prev = cu.arrival;
    CHECK(cu.end_slot() <= 100);
    CHECK(cu.offers.size() == 1);
  }
  CHECK(validate(a.instance, cpu_only(2.0)).ok);
  CHECK(validate(a.instance, cpu_only(2.0)).violations.empty());

  auto inexact = small(ArrivalCase::UI, 10, 1);
  inexact.delta = 0.5;
  CHECK(generate(inexact, kCatalog).p_bar_estimate == doctest::Approx(3.0));
  auto exact = small(ArrivalCase::UE, 10, 1);
  exact.delta = 0.5;
  CHECK(generate(exact, kCatalog).p_bar_estimate == 2.0);
}

TEST_CASE("generator config validation") {
  auto g = small(ArrivalCase::UE, 10, 1);
  g.delta = 2.5;
  CHECK_THROWS_AS(validate_config(g), ValidationError);
  g.delta = -0.8;
  CHECK_NOTHROW(validate_config(g));
  g.puv.kind = PuvDistribution::Kind::TruncatedNormal;
  g.puv.sigma = 0.0;
  CHECK_THROWS_AS(validate_config(g), ValidationError);
  CHECK_THROWS_AS(generate(small(ArrivalCase::UE, 5, 1), {Bundle{{0.0}}}), ValidationError);
}

TEST_CASE("evolving PUVs: low first half, high second half") {
  const auto g = generate(small(ArrivalCase::EE, 1000, 9), kCatalog);
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& c = g.instance.customers[i];
    const double puv = c.offers[0].valuation / (c.duration * kCatalog[c.offers[0].bundle].units[0]);
    (i < 500 ? first : second) += puv / 500.0;
  }
  CHECK(first == doctest::Approx(0.25 * 2.0).epsilon(0.05));
  CHECK(second == doctest::Approx(0.75 * 2.0).epsilon(0.05));
}

TEST_CASE("PUVs respect the bound over 1e5 draws") {
  auto cfg = small(ArrivalCase::UE, 100000, 3);
  cfg.horizon = 1000;
  const auto g = generate(cfg, kCatalog);
  double worst = 0.0;
  for (const auto& c : g.instance.customers) {
    const double puv = c.offers[0].valuation / (c.duration * kCatalog[c.offers[0].bundle].units[0]);
    worst = std::max(worst, puv);
  }
  CHECK(worst <= 2.0 * (1 + 1e-12));
}

TEST_CASE("truncated normal draws") {
  std::mt19937_64 rng(21);
  const double mu = 0.8, sigma = 0.6, lo = 0.0, hi = 2.0;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  bool inside = true;
  for (int i = 0; i < n; ++i) {
    const double x = sample_truncated_normal(rng, mu, sigma, lo, hi);
    inside = inside && x >= lo && x <= hi;
    sum += x;
    sq += x * x;
  }
  CHECK(inside);
  const auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); };
  const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
  const double mean = mu + sigma * (pdf(a) - pdf(b)) / (cdf(b) - cdf(a));
  const double m = sum / n;
  const double se = std::sqrt((sq / n - m * m) / n);
  CHECK(std::abs(m - mean) <= 3 * se);
}

TEST_CASE("trace round trip") {
  const auto g = generate(small(ArrivalCase::UE, 200, 4), kCatalog);
  std::stringstream trace, catalog;
  write_trace_csv(trace, g.instance);
  write_catalog_csv(catalog, kCatalog);
  const auto cat = read_catalog_csv(catalog);
  const auto back = read_trace_csv(trace, cat, 100);
  CHECK(back.warnings.empty());
  CHECK(same_instance(back.instance, g.instance));
}

TEST_CASE("trace parsing") {
  const std::vector<Bundle> cat{Bundle{{0.001}}, Bundle{{0.002}}};
  {
    std::istringstream in(
        "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n"
        "0,0,1,0,0.001\n1,2,1,1,0.002\n2,5,3,0,0.003\n");
    const auto t = read_trace_csv(in, cat);
    CHECK(t.instance.customers.size() == 3);
    CHECK(t.instance.horizon == 8);
    CHECK(t.warnings.empty());
  }
  {
    std::istringstream in(
        "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n"
        "0,4,1,0,0.001\n1,2,1,1,0.002\n2,2,1,0,0.003\n");
    const auto t = read_trace_csv(in, cat, 10);
    REQUIRE(t.warnings.size() == 1);
    CHECK(t.instance.customers[0].id == 1);
    CHECK(t.instance.customers[1].id == 2);
    CHECK(t.instance.customers[2].id == 0);
  }
  {
    std::istringstream in(
        "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n"
        "0,0,1,0,0.001\n0,0,1,1,0.004\n");
    const auto t = read_trace_csv(in, cat);
    REQUIRE(t.instance.customers.size() == 1);
    CHECK(t.instance.customers[0].offers.size() == 2);
  }
  {
    std::istringstream in(
        "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n"
        "0,0,1,0,0.001\n1,x,1,0,0.1\n");
    try {
      read_trace_csv(in, cat);
      FAIL("expected a parse error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  std::istringstream bad_header("id,arrival\n");
  CHECK_THROWS_AS(read_trace_csv(bad_header, cat), ValidationError);
  std::istringstream bad_bundle(
      "customer_id,arrival_slot,duration_slots,bundle_index,valuation\n0,0,1,7,0.1\n");
  CHECK_THROWS_AS(read_trace_csv(bad_bundle, cat), ValidationError);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv", "/nonexistent/catalog.csv"),
                  ValidationError);
}

TEST_CASE("validation report") {
  ArrivalInstance inst;
  inst.catalog = {Bundle{{0.01}}, Bundle{{0.5}}};
  inst.horizon = 2;
  Customer c;
  c.id = 0;
  c.offers = {{0, 1.5 * 2.0 * 0.01}};
  inst.customers.push_back(c);
  const auto rep = validate(inst, cpu_only(2.0));
  CHECK_FALSE(rep.ok);
  CHECK(rep.violations.size() == 1);
  CHECK(rep.warnings.size() == 1);  // bundle 1 exceeds the demand cap

  inst.customers[0].offers[0].valuation = 2.0 * 0.01;  // exactly at the bound
  CHECK(validate(inst, cpu_only(2.0)).ok);
}

TEST_CASE("presets") {
  const auto g = google_cluster_like(1.0);
  CHECK(g.setup.resource_count() == 2);
  CHECK(g.catalog.size() == 9);
  CHECK(g.horizon == 3600);
  CHECK(g.n_customers == 4000);
  CHECK(g.setup.resources[0].c_high() == doctest::Approx(0.669));
  CHECK(g.setup.resources[1].p_bar == doctest::Approx(5.0));
  const auto d = preset_by_name("desk", 2.0);
  CHECK(d.n_customers == 500);
  CHECK(d.horizon == 600);
  CHECK(d.setup.resources[0].p_bar == 2.0);
  CHECK_THROWS_AS(preset_by_name("nope", 1.0), ValidationError);
  CHECK(to_string(parse_arrival_case("EI")) == "EI");
  CHECK_THROWS_AS(parse_arrival_case("XX"), ValidationError);
}
