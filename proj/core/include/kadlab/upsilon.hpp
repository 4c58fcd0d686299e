#pragma once

#include <cstdint>
#include <span>

namespace kadlab {

// Law of the bit distance between a fixed target and one identifier drawn
// uniformly from the 2^depth identifiers within bit distance <= depth of it.
class RegionLaw {
 public:
  explicit RegionLaw(int depth);

  int depth() const { return depth_; }
  // P(delta = v)
  double pmf(int v) const;
  // P(delta <= v); 0 for v < 0
  double cdf(int v) const;
  // P(delta > v)
  double survival(int v) const;

 private:
  int depth_;
};

// Probability that the |deltas| closest of `draws` independent identifiers,
// each uniform over the 2^depth identifiers within bit distance <= depth of
// the target, have exactly the bit distances `deltas` (sorted ascending).
double upsilon(std::span<const int> deltas, int depth, std::int64_t draws);

// Same, with the per-identifier law passed explicitly.
double upsilon(std::span<const int> deltas, const RegionLaw& law, std::int64_t draws);

}  // namespace kadlab
