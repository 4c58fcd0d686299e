#include "kadlab/upsilon.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"

namespace kadlab {

RegionLaw::RegionLaw(int depth) : depth_(depth) { require(depth >= 0, "region depth must be >= 0"); }

double RegionLaw::pmf(int v) const {
  if (v < 0 || v > depth_) return 0.0;
  if (v == 0) return pow2(-depth_);
  return pow2(v - 1 - depth_);
}

double RegionLaw::cdf(int v) const {
  if (v < 0) return 0.0;
  if (v >= depth_) return 1.0;
  return pow2(v - depth_);
}

double RegionLaw::survival(int v) const {
  if (v < 0) return 1.0;
  if (v >= depth_) return 0.0;
  return -std::expm1(static_cast<double>(v - depth_) * std::log(2.0));
}

namespace {

double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

// x * log(p) with the convention 0 * log(0) = 0.
double scaled_log(double count, double p) {
  if (count == 0.0) return 0.0;
  return count * safe_log(p);
}

}  // namespace

double upsilon(std::span<const int> deltas, int depth, std::int64_t draws) {
  return upsilon(deltas, RegionLaw(depth), draws);
}

double upsilon(std::span<const int> deltas, const RegionLaw& law, std::int64_t draws) {
  const auto gamma = static_cast<std::int64_t>(deltas.size());
  require(gamma >= 1, "upsilon needs a non-empty tuple");
  require(draws >= gamma, "upsilon needs at least |deltas| draws");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] >= 0 && deltas[i] <= law.depth(), "upsilon: distance outside region");
    if (i > 0) require(deltas[i - 1] <= deltas[i], "upsilon: tuple not sorted");
  }

  // Fixed part: every value except the largest, with multiplicities.
  double log_fixed = 0.0;
  std::int64_t fixed_count = 0;
  const int top = deltas.back();
  std::size_t i = 0;
  while (i < deltas.size() && deltas[i] != top) {
    std::size_t j = i;
    while (j < deltas.size() && deltas[j] == deltas[i]) ++j;
    const auto count = static_cast<double>(j - i);
    log_fixed += scaled_log(count, law.pmf(deltas[i])) - std::lgamma(count + 1.0);
    fixed_count += static_cast<std::int64_t>(j - i);
    i = j;
  }
  const std::int64_t top_count = gamma - fixed_count;
  const double p_top = law.pmf(top);
  const double s_top = law.survival(top);
  const double log_a_fact = std::lgamma(static_cast<double>(draws) + 1.0);

  double total = 0.0;
  for (std::int64_t e = top_count; e <= draws - fixed_count; ++e) {
    const std::int64_t rest = draws - fixed_count - e;
    const double ed = static_cast<double>(e);
    const double rd = static_cast<double>(rest);
    const double log_term = log_a_fact + log_fixed - std::lgamma(ed + 1.0) - std::lgamma(rd + 1.0) +
                            scaled_log(ed, p_top) + scaled_log(rd, s_top);
    if (std::isfinite(log_term)) total += std::exp(log_term);
  }
  return total;
}

}  // namespace kadlab
