#include "kadlab/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"

namespace kadlab {

double binomial_ccdf(std::int64_t trials, double p, std::int64_t threshold) {
  if (threshold >= trials || p <= 0.0) return 0.0;
  if (threshold < 0) return 1.0;
  if (p >= 1.0) return 1.0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), p);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(threshold)));
}

namespace {

int ceil_log2(std::int64_t n) {
  int r = 0;
  while ((std::int64_t{1} << r) < n) ++r;
  return r;
}

// P(E1 | D = d, L_d = l): the target's bucket region holds no node.
double empty_target_bucket(const SystemProfile& profile, std::int64_t n, int d, int l) {
  return empty_region_prob(d - l, n, profile.b);
}

// Union bound over the levels between the owner and the target's level.
double deeper_overflow(const SystemProfile& profile, std::int64_t n, int d) {
  const int b = profile.b;
  const double remaining = 1.0 - pow2(d - 1 - b);
  double sum = 0.0;
  for (int i = 2; i <= d; ++i) {
    const double p = pow2(d - i - b) / remaining;
    sum += binomial_ccdf(n - 1, p, profile.capacity(d - i));
  }
  return sum;
}

// R_i = P(C_i > k) + P(C_i = 0) R_{i+1}, R_{a+1} = tail.
template <class Fraction>
double nested_overflow(std::int64_t n, int k, int buckets, double tail, Fraction&& fraction) {
  double r = tail;
  for (int i = buckets; i >= 1; --i) {
    const double q = std::clamp(fraction(i), 0.0, 1.0);
    const double over = binomial_ccdf(n - 1, q, k);
    const double empty = std::exp(static_cast<double>(n - 1) * std::log1p(-q));
    r = over + empty * r;
  }
  return r;
}

double quarter_split_bound(const SystemProfile& profile, std::int64_t n, int lo) {
  const int b = profile.b;
  double best = 0.0;
  for (int d = lo; d <= b; ++d) {
    const int k = profile.capacity(d);
    const double tail = std::min(1.0, 5.0 * deeper_overflow(profile, n, d));
    if (d == b) {
      const double e1 = empty_target_bucket(profile, n, d, 4);
      const double e2 = nested_overflow(n, k, 7, tail, [&](int i) { return pow2(-4) / (1.0 - i * pow2(-4)); });
      best = std::max(best, e1 * std::min(1.0, e2));
      continue;
    }
    const double p3 = pow2(d - 3 - b);
    const double p4 = pow2(d - 4 - b);
    // Target bucket resolved with four digits.
    {
      const double e1 = empty_target_bucket(profile, n, d, 4);
      const double e2 = nested_overflow(n, k, 4, tail, [&](int i) {
        return i == 1 ? p4 / (1.0 - p4) : p3 / (1.0 - 2.0 * p4 - (i - 2) * p3);
      });
      best = std::max(best, e1 * std::min(1.0, e2));
    }
    // Three digits, XOR with the owner starting with 11.
    {
      const double e1 = empty_target_bucket(profile, n, d, 3);
      const double e2 = nested_overflow(n, k, 4, tail, [&](int i) {
        return i <= 2 ? p3 / (1.0 - i * p3) : p4 / (1.0 - 3.0 * p3 - (i - 3) * p4);
      });
      best = std::max(best, e1 * std::min(1.0, e2));
    }
    // Three digits, the two closest other buckets resolve four.
    {
      const double e1 = empty_target_bucket(profile, n, d, 3);
      const double e2 = nested_overflow(n, k, 4, tail, [&](int i) {
        return i <= 2 ? p4 / (1.0 - p3 - (i - 1) * p4) : p4 / (1.0 - p3 - 2.0 * p4 - (i - 3) * p3);
      });
      best = std::max(best, e1 * std::min(1.0, e2));
    }
  }
  return best;
}

double single_digit_bound(const SystemProfile& profile, std::int64_t n, int lo) {
  double best = 0.0;
  for (int d = lo; d <= profile.b; ++d) {
    const double e1 = empty_target_bucket(profile, n, d, 1);
    if (e1 == 0.0) continue;
    best = std::max(best, e1 * std::min(1.0, deeper_overflow(profile, n, d)));
  }
  return best;
}

}  // namespace

double empty_bucket_bound(const SystemProfile& profile, std::int64_t n) {
  require(n >= 2, "empty_bucket_bound needs n >= 2");
  profile.validate();
  const int lo = std::max(0, profile.b - (ceil_log2(n) + 16));
  bool quarter = false;
  for (int d = lo; d <= profile.b; ++d) {
    const auto levels = profile.levels(d);
    if (profile.layout(d) == BucketLayout::QuarterSplit) {
      quarter = true;
    } else if (levels.front().digits != 1 && !(d == profile.b && levels.front().digits == 4)) {
      throw UnsupportedParameter("bound defined for one-digit levels or the quarter-split layout");
    }
  }
  return quarter ? quarter_split_bound(profile, n, lo) : single_digit_bound(profile, n, lo);
}

BoundCurve bound_curve(const SystemProfile& profile, const std::vector<std::int64_t>& grid) {
  BoundCurve curve;
  curve.profile = profile.name;
  for (const auto n : grid) curve.points.push_back({n, empty_bucket_bound(profile, n)});
  return curve;
}

std::vector<std::int64_t> log_spaced_grid(double lo, double hi, int points) {
  require(points >= 1 && lo > 0.0 && hi >= lo, "invalid grid");
  std::vector<std::int64_t> grid;
  if (points == 1) return {static_cast<std::int64_t>(std::llround(lo))};
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    grid.push_back(static_cast<std::int64_t>(std::llround(lo * std::exp(step * i))));
  }
  return grid;
}

int count_local_maxima(const BoundCurve& curve, double lo, double hi) {
  std::vector<double> values;
  for (const auto& p : curve.points) {
    if (static_cast<double>(p.n) >= lo && static_cast<double>(p.n) <= hi) values.push_back(p.bound);
  }
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) ++peaks;
  }
  return peaks;
}

}  // namespace kadlab
