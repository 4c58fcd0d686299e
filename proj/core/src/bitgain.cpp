#include "kadlab/bitgain.hpp"

#include <cmath>

#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"
#include "kadlab/profile.hpp"

namespace kadlab {

namespace {

// log F^l(i) for i > l, where F^l(i) = 1 - 2^-(i-l).
double log_prefix_cdf(int i, int l) { return std::log1p(-pow2(-(i - l))); }

constexpr int kMaxTerms = 4000;

}  // namespace

double bitgain_standard(int l, int k, double tail_tolerance) {
  require(l >= 0 && k >= 1, "bitgain_standard: need l >= 0 and k >= 1");
  double sum = static_cast<double>(l);
  for (int i = l + 1; i < l + kMaxTerms; ++i) {
    const double term = -std::expm1(static_cast<double>(k) * log_prefix_cdf(i, l));
    sum += term;
    // Terms decay at least geometrically with ratio 1/2, so the tail is below the last term.
    if (term < tail_tolerance) break;
  }
  return sum;
}

double bitgain_diverse(int l, int k, double tail_tolerance) {
  require(l >= 0 && k >= 1, "bitgain_diverse: need l >= 0 and k >= 1");
  const int q = floor_log2(k);
  const int rest = k - (1 << q);
  double sum = static_cast<double>(l + q);
  for (int i = l + q + 1; i < l + q + kMaxTerms; ++i) {
    const double log_f = log_prefix_cdf(i - q, l) + static_cast<double>(rest) * log_prefix_cdf(i, l);
    const double term = -std::expm1(log_f);
    sum += term;
    if (term < tail_tolerance) break;
  }
  return sum;
}

}  // namespace kadlab
