#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "kadlab/errors.hpp"
#include "kadlab/simulator.hpp"

using namespace kadlab;

namespace {

ExperimentConfig small_static(std::int64_t n, int runs, int lookups) {
  ExperimentConfig config;
  config.n = n;
  config.runs = runs;
  config.lookups = lookups;
  config.threads = 1;
  return config;
}

ChurnSpec quick_churn() {
  ChurnSpec spec;
  spec.enabled = true;
  spec.mean_session = 2000.0;
  spec.mean_deadtime = 2000.0;
  return spec;
}

bool same_runs(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.runs.size() != b.runs.size()) return false;
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    if (a.runs[r].hops != b.runs[r].hops || a.runs[r].degree_cdf != b.runs[r].degree_cdf) return false;
  }
  return a.mean == b.mean && a.ci95 == b.ci95 && a.cdf == b.cdf;
}

}  // namespace

TEST_CASE("child seeds are deterministic and distinct") {
  CHECK(derive_seed(42, 1) == derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(42, 2));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("static networks draw distinct identifiers") {
  StaticNetwork net(std::make_shared<const SystemProfile>(uniform_profile("tiny", 12, 4, 3, 2)), 4000,
                    Scheme::Standard, 1);
  for (std::size_t i = 1; i < net.size(); ++i) CHECK(net.id(i - 1) < net.id(i));
  CHECK(net.size() == 4000);
}

TEST_CASE("static tables never hold stale contacts") {
  StaticNetwork net(std::make_shared<const SystemProfile>(kad_profile()), 2000, Scheme::DiversityMax, 2);
  for (std::size_t i = 0; i < 100; ++i) {
    for (const auto& [key, bucket] : net.table(i).buckets()) {
      for (const auto& c : bucket.contacts()) CHECK_FALSE(c.stale);
    }
  }
}

TEST_CASE("experiments are reproducible and independent of the worker count") {
  auto config = small_static(1500, 4, 100);
  const auto profile = kad_profile();
  const auto a = run_experiment(profile, Scheme::DiversityMax, config);
  const auto b = run_experiment(profile, Scheme::DiversityMax, config);
  config.threads = 3;
  const auto c = run_experiment(profile, Scheme::DiversityMax, config);
  CHECK(same_runs(a, b));
  CHECK(same_runs(a, c));
  config.seed = 7;
  CHECK_FALSE(same_runs(a, run_experiment(profile, Scheme::DiversityMax, config)));
}

TEST_CASE("churn experiments are reproducible") {
  auto config = small_static(400, 2, 60);
  config.churn = quick_churn();
  const auto a = run_experiment(kad_profile(), Scheme::Standard, config);
  const auto b = run_experiment(kad_profile(), Scheme::Standard, config);
  CHECK(same_runs(a, b));
}

TEST_CASE("the reported CDF is consistent with the sample mean") {
  const auto report = run_experiment(mdht_profile(), Scheme::Standard, small_static(2000, 3, 200));
  REQUIRE_FALSE(report.cdf.empty());
  double mean = 0.0;
  double previous = 0.0;
  for (std::size_t h = 0; h < report.cdf.size(); ++h) {
    CHECK(report.cdf[h] >= previous);
    mean += static_cast<double>(h + 1) * (report.cdf[h] - previous);
    previous = report.cdf[h];
  }
  CHECK(report.cdf.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.mean == doctest::Approx(mean).epsilon(1e-9));
  std::vector<double> means;
  for (const auto& run : report.runs) means.push_back(run.mean);
  CHECK(report.ci95 == doctest::Approx(student_t_halfwidth(means)));
  CHECK(report.median == doctest::Approx(median_of(means)));
}

TEST_CASE("summary statistics over run means") {
  CHECK(student_t_halfwidth({1, 2, 3, 4, 5}) == doctest::Approx(2.7764451 * std::sqrt(2.5) / std::sqrt(5.0)));
  CHECK(student_t_halfwidth({3.0}) == 0.0);
  CHECK(median_of({5, 1, 3}) == 3.0);
  CHECK(median_of({4, 1, 3, 2}) == 2.5);
  CHECK(hop_cdf({1, 1, 2, 4}) == std::vector<double>{0.5, 0.75, 0.75, 1.0});
}

TEST_CASE("a scheme compared with itself shows no gain") {
  const auto report = run_experiment(kad_profile(), Scheme::Standard, small_static(1000, 3, 80));
  const auto gain = hop_gain(report, report);
  CHECK(gain.point == 0.0);
  CHECK(gain.min <= 0.0);
  CHECK(gain.max >= 0.0);
  CHECK(gain.conservative < 0.0);
}

TEST_CASE("diverse tables are not slower than standard ones on paired seeds") {
  const auto config = small_static(3000, 5, 300);
  for (const auto& profile : {mdht_profile(), kad_profile()}) {
    const auto report = compare_schemes(profile, config);
    INFO(profile.name << " standard " << report.standard.mean << " diverse " << report.diverse.mean);
    CHECK(report.diverse.mean <= report.standard.mean + report.standard.ci95 + report.diverse.ci95);
  }
}

TEST_CASE("churn keeps the online population near its target") {
  for (const auto lifetime : {LifetimeDistribution::Exponential, LifetimeDistribution::Pareto}) {
    auto spec = quick_churn();
    spec.lifetime = lifetime;
    ChurnNetwork net(std::make_shared<const SystemProfile>(kad_profile()), 600, Scheme::DiversityMax, spec, 3);
    for (double t = 2.0 * spec.mean_session; t <= 5.0 * spec.mean_session; t += 500.0) {
      net.advance_to(t);
      CHECK(static_cast<double>(net.online_count()) >= 540.0);
      CHECK(static_cast<double>(net.online_count()) <= 660.0);
    }
    CHECK(net.counters().departures > 600);
    CHECK(net.counters().joins > 600);
    CHECK(net.counters().detections > 0);
  }
}

TEST_CASE("churned tables only reference valid contacts") {
  ChurnNetwork net(std::make_shared<const SystemProfile>(kad_profile()), 500, Scheme::Standard, quick_churn(), 4);
  net.advance_to(6000.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const PeerHandle node = net.random_online(rng);
    const auto& table = net.table(node);
    for (const auto& [key, bucket] : table.buckets()) {
      CHECK(static_cast<int>(bucket.size()) <= bucket.capacity());
      for (const auto& c : bucket.contacts()) {
        CHECK(bucket.covers(c.id));
        CHECK(c.id != table.owner());
        CHECK(c.last_verified >= c.first_seen);
        CHECK(c.first_seen <= net.now());
      }
    }
  }
}

TEST_CASE("diverse maintenance raises the diversity degree under churn") {
  auto config = small_static(800, 1, 40);
  config.churn = quick_churn();
  const auto standard = run_experiment(kad_profile(), Scheme::Standard, config);
  const auto diverse = run_experiment(kad_profile(), Scheme::DiversityMax, config);
  CHECK(diverse.mean_degree > standard.mean_degree);
  CHECK(diverse.mean_degree >= 7.0);
}

TEST_CASE("a one-node network yields trivial reports") {
  const auto report = run_experiment(mdht_profile(), Scheme::Standard, small_static(1, 2, 10));
  CHECK(report.mean == 1.0);
  CHECK(report.cdf == std::vector<double>{1.0});
}

TEST_CASE("invalid experiment settings are rejected") {
  CHECK_THROWS_AS(run_experiment(mdht_profile(), Scheme::Standard, small_static(0, 1, 1)), ContractViolation);
  CHECK_THROWS_AS(run_experiment(mdht_profile(), Scheme::Standard, small_static(10, 0, 1)), ContractViolation);
  auto spec = quick_churn();
  spec.mean_session = 0.0;
  CHECK_THROWS_AS(ChurnNetwork(std::make_shared<const SystemProfile>(kad_profile()), 10, Scheme::Standard, spec, 1),
                  ContractViolation);
}
