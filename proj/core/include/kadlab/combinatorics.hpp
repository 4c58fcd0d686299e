#pragma once

#include <cstdint>
#include <vector>

namespace kadlab {

double log_choose(double n, double r);

// C(m, z) p^z (1-p)^(m-z), evaluated in log space.
double binom_pmf(std::int64_t m, std::int64_t z, double p);

// C(a, c) / C(b, c); zero when c > a.
double over_prob(std::int64_t a, std::int64_t b, std::int64_t c);

// (1 - 2^(d-b))^(n-1): no node in a region of 2^d identifiers.
double empty_region_prob(int d, std::int64_t n, int b);

// Drawing `draws` items without replacement from `special` marked and
// `total - special` unmarked items: probability of exactly `hits` marked.
double hypergeometric_pmf(std::int64_t total, std::int64_t special, std::int64_t draws,
                          std::int64_t hits);

// 2^e as a double, exact for the whole representable range.
double pow2(int e);

struct BinomialTerm {
  std::int64_t z;
  double probability;
};

// All z with binom_pmf(m, z, p) above `cutoff`, scanning outward from the mode.
std::vector<BinomialTerm> binomial_support(std::int64_t m, double p, double cutoff);

}  // namespace kadlab
