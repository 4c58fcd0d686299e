#pragma once

#include <cstdint>
#include <vector>

#include "kadlab/profile.hpp"

namespace kadlab {

// Sorted bit distances of the closest contacts.
using DistanceTuple = std::vector<int>;

struct LawEntry {
  DistanceTuple distances;
  double probability = 0.0;
};

// Conditional law of the bit distances of the gamma closest contacts to a
// target in the table of a node at bit distance d, plus the terminal outcome
// (the table holds the responsible node).
struct ClosestContactLaw {
  int gamma = 0;
  double terminal = 0.0;
  // Mass of tuples with a distance below the requested window.
  double truncated = 0.0;
  std::vector<LawEntry> entries;  // ascending by distances

  // Mass of all outcomes, terminal and truncated included.
  double total() const;
};

enum class LawFormula {
  // Derived here from exact order statistics of the bucket contents.
  Exact,
  // Literal closed forms with binomial occupancy approximations.
  Printed,
};

struct LawQuery {
  int b = 0;
  std::int64_t n = 1;
  int d = 0;       // bit distance of the table owner to the target
  int l = 0;       // digits resolved by the target's bucket
  int k = 1;       // bucket capacity
  int gamma = 1;
  int min_distance = 0;
  double cutoff = 1e-20;
};

// P(C = terminal | D = d, L_d = l).
double success_prob(Scheme scheme, int d, int l, std::int64_t n, int k, int q, int b,
                    LawFormula formula = LawFormula::Exact);

ClosestContactLaw closest_law_standard(const LawQuery& query);
ClosestContactLaw closest_law_diverse(const LawQuery& query);
// Literal closed forms for gamma in {2, 3}; throws UnsupportedParameter otherwise.
ClosestContactLaw closest_law_diverse_printed(const LawQuery& query);

ClosestContactLaw closest_law(Scheme scheme, LawFormula formula, const LawQuery& query);

struct WeightedLaw {
  double weight = 0.0;
  ClosestContactLaw law;
};

// Pointwise weighted sum of laws sharing gamma.
ClosestContactLaw mix_over_levels(const std::vector<WeightedLaw>& parts);

}  // namespace kadlab
