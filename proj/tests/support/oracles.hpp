#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "kadlab/closest_law.hpp"

namespace kadlab::testing {

// Outcome key: {-1} for the terminal outcome, else sorted bit distances.
using Outcome = std::vector<int>;
using Histogram = std::map<Outcome, std::int64_t>;
using Distribution = std::map<Outcome, double>;

// Simulates one bucket of a table whose owner is at bit distance d from the
// target: region population, bucket selection and responsibility by XOR.
Histogram sample_closest(Scheme scheme, const LawQuery& query, std::int64_t samples, std::mt19937_64& rng);

Distribution law_distribution(const ClosestContactLaw& law);

struct GoodnessOfFit {
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double z = 0.0;  // Wilson-Hilferty normal approximation
};

// Pearson chi-square of observed counts against expected probabilities;
// cells expected below min_expected are pooled.
GoodnessOfFit chi_square_fit(const Distribution& expected, const Histogram& observed, std::int64_t samples,
                             double min_expected = 5.0);

// Exact law by enumerating every tuple of `draws` identifiers in a region
// of 2^depth identifiers around the target.
double exhaustive_upsilon(std::span<const int> deltas, int depth, int draws);

}  // namespace kadlab::testing
