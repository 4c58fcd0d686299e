#include "kadlab/combinatorics.hpp"

#include <algorithm>
#include <cmath>

#include "kadlab/errors.hpp"

namespace kadlab {

double log_choose(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

double binom_pmf(std::int64_t m, std::int64_t z, double p) {
  require(m >= 0 && z >= 0 && z <= m, "binom_pmf: z out of range");
  require(p >= 0.0 && p <= 1.0, "binom_pmf: p out of range");
  if (p == 0.0) return z == 0 ? 1.0 : 0.0;
  if (p == 1.0) return z == m ? 1.0 : 0.0;
  const double md = static_cast<double>(m);
  const double zd = static_cast<double>(z);
  const double log_value = log_choose(md, zd) + zd * std::log(p) + (md - zd) * std::log1p(-p);
  return std::exp(log_value);
}

double over_prob(std::int64_t a, std::int64_t b, std::int64_t c) {
  require(c >= 0 && a >= 0 && a <= b, "over_prob: arguments out of range");
  if (c > a) return 0.0;
  if (c == 0) return 1.0;
  double ratio = 1.0;
  for (std::int64_t i = 0; i < c; ++i) {
    ratio *= static_cast<double>(a - i) / static_cast<double>(b - i);
  }
  return ratio;
}

double pow2(int e) { return std::ldexp(1.0, e); }

double empty_region_prob(int d, std::int64_t n, int b) {
  require(d <= b && n >= 1, "empty_region_prob: arguments out of range");
  if (n == 1) return 1.0;
  const double frac = pow2(d - b);
  if (frac >= 1.0) return 0.0;
  return std::exp(static_cast<double>(n - 1) * std::log1p(-frac));
}

double hypergeometric_pmf(std::int64_t total, std::int64_t special, std::int64_t draws,
                          std::int64_t hits) {
  if (hits < 0 || hits > special || hits > draws || draws - hits > total - special) return 0.0;
  if (draws == 0) return 1.0;
  const double log_value = log_choose(static_cast<double>(special), static_cast<double>(hits)) +
                           log_choose(static_cast<double>(total - special),
                                      static_cast<double>(draws - hits)) -
                           log_choose(static_cast<double>(total), static_cast<double>(draws));
  return std::exp(log_value);
}

std::vector<BinomialTerm> binomial_support(std::int64_t m, double p, double cutoff) {
  std::vector<BinomialTerm> out;
  if (m < 0) return out;
  if (p <= 0.0) return {{0, 1.0}};
  if (p >= 1.0) return {{m, 1.0}};
  const auto mode = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::floor(static_cast<double>(m + 1) * p)), 0, m);
  for (std::int64_t z = mode; z >= 0; --z) {
    const double v = binom_pmf(m, z, p);
    if (v < cutoff && z != mode) break;
    out.push_back({z, v});
  }
  std::reverse(out.begin(), out.end());
  for (std::int64_t z = mode + 1; z <= m; ++z) {
    const double v = binom_pmf(m, z, p);
    if (v < cutoff) break;
    out.push_back({z, v});
  }
  return out;
}

}  // namespace kadlab
