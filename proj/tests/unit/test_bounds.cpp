#include <cmath>

#include "doctest.h"
#include "kadlab/bounds.hpp"
#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"

using namespace kadlab;

TEST_CASE("binomial tail matches a direct sum") {
  for (const std::int64_t trials : {5, 40, 200}) {
    for (const double p : {0.001, 0.1, 0.5}) {
      for (const std::int64_t threshold : {0, 2, 7}) {
        double direct = 0.0;
        for (std::int64_t z = threshold + 1; z <= trials; ++z) direct += binom_pmf(trials, z, p);
        CHECK(binomial_ccdf(trials, p, threshold) == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("log-spaced grid covers its range") {
  const auto grid = log_spaced_grid(1e3, 4e6, 60);
  REQUIRE(grid.size() == 60);
  CHECK(grid.front() == 1000);
  CHECK(grid.back() == 4000000);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(log_spaced_grid(5000, 5000, 1) == std::vector<std::int64_t>{5000});
  CHECK_THROWS_AS(log_spaced_grid(1e3, 1e6, 0), ContractViolation);
}

TEST_CASE("bounds are probabilities and small for the built-in profiles") {
  const auto grid = log_spaced_grid(1e3, 4e6, 60);
  const auto mdht = bound_curve(mdht_profile(), grid);
  const auto imdht = bound_curve(imdht_profile(), grid);
  const auto kad = bound_curve(kad_profile(), grid);
  REQUIRE(mdht.points.size() == grid.size());
  double kad_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto* curve : {&mdht, &imdht, &kad}) {
      CHECK(curve->points[i].bound >= 0.0);
      CHECK(curve->points[i].bound <= 1.0);
    }
    CHECK(mdht.points[i].bound < 1e-5);
    CHECK(imdht.points[i].bound == mdht.points[i].bound);
    kad_max = std::max(kad_max, kad.points[i].bound);
  }
  CHECK(kad_max < 5e-4);
  CHECK(kad_max > 1e-5);
}

TEST_CASE("the bound oscillates once per doubling of the network") {
  std::vector<std::int64_t> grid;
  for (double e = 10.0; e <= 20.0; e += 0.125) grid.push_back(std::llround(std::pow(2.0, e)));
  for (const auto& profile : {mdht_profile(), kad_profile()}) {
    const auto curve = bound_curve(profile, grid);
    INFO(profile.name);
    CHECK(count_local_maxima(curve, 1e3, 1e6) >= 3);
  }
}

TEST_CASE("larger buckets never raise the bound") {
  const auto small = uniform_profile("k8", 160, 8, 3, 2);
  const auto large = uniform_profile("k16", 160, 16, 3, 2);
  for (const auto n : log_spaced_grid(1e3, 1e6, 25)) {
    CHECK(empty_bucket_bound(large, n) <= empty_bucket_bound(small, n) + 1e-300);
  }
}

TEST_CASE("local maxima counting on a synthetic curve") {
  BoundCurve curve;
  const double values[] = {1, 3, 2, 4, 1, 5, 0};
  for (int i = 0; i < 7; ++i) curve.points.push_back({1000 + i, values[i]});
  CHECK(count_local_maxima(curve, 0, 1e9) == 3);
  CHECK(count_local_maxima(curve, 1002, 1006) == 2);
}
