#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kadlab/profile.hpp"

namespace kadlab {

struct BoundPoint {
  std::int64_t n = 0;
  double bound = 0.0;
};

struct BoundCurve {
  std::string profile;
  std::vector<BoundPoint> points;
};

// Upper bound on the probability that a lookup is declared finished because
// the target's bucket is empty while the responsible node is not known.
double empty_bucket_bound(const SystemProfile& profile, std::int64_t n);

BoundCurve bound_curve(const SystemProfile& profile, const std::vector<std::int64_t>& grid);

// `points` sizes spaced evenly in log scale over [lo, hi], rounded to integers.
std::vector<std::int64_t> log_spaced_grid(double lo, double hi, int points);

// Strict local maxima of the curve restricted to n in [lo, hi].
int count_local_maxima(const BoundCurve& curve, double lo, double hi);

// P(Bin(trials, p) > threshold)
double binomial_ccdf(std::int64_t trials, double p, std::int64_t threshold);

}  // namespace kadlab
