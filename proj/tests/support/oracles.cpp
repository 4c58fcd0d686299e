#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "kadlab/profile.hpp"

namespace kadlab::testing {

namespace {

int bit_distance_of(std::uint64_t offset) { return static_cast<int>(std::bit_width(offset)); }

}  // namespace

Histogram sample_closest(Scheme scheme, const LawQuery& query, std::int64_t samples, std::mt19937_64& rng) {
  const int depth = query.d - query.l;
  const double p = std::ldexp(1.0, depth - query.b);
  std::binomial_distribution<std::int64_t> population(query.n - 1, p);
  std::uniform_int_distribution<std::uint64_t> offset(0, (std::uint64_t{1} << depth) - 1);
  const int q = std::min(floor_log2(query.k), depth);
  const auto k = static_cast<std::size_t>(query.k);

  Histogram hist;
  std::vector<std::uint64_t> nodes;
  std::vector<std::size_t> order;
  std::vector<std::size_t> bucket;
  for (std::int64_t s = 0; s < samples; ++s) {
    const auto m = static_cast<std::size_t>(population(rng));
    if (m <= k) {
      ++hist[{-1}];
      continue;
    }
    nodes.resize(m);
    for (auto& x : nodes) x = offset(rng);
    order.resize(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    bucket.clear();
    if (scheme == Scheme::Standard) {
      bucket.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      // First member of each class in shuffled order, then others in a fresh order.
      std::vector<bool> seen(std::size_t{1} << q, false);
      std::vector<bool> taken(m, false);
      for (const auto i : order) {
        const auto cls = static_cast<std::size_t>(nodes[i] >> (depth - q));
        if (!seen[cls]) {
          seen[cls] = true;
          taken[i] = true;
          bucket.push_back(i);
        }
      }
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < m; ++i) {
        if (!taken[i]) rest.push_back(i);
      }
      std::shuffle(rest.begin(), rest.end(), rng);
      for (const auto i : rest) {
        if (bucket.size() == k) break;
        bucket.push_back(i);
      }
    }

    // The responsible node is uniform among the nodes at the minimum offset.
    const std::uint64_t best = *std::min_element(nodes.begin(), nodes.end());
    std::size_t responsible = m;
    for (const auto i : order) {
      if (nodes[i] == best) {
        responsible = i;
        break;
      }
    }
    if (std::find(bucket.begin(), bucket.end(), responsible) != bucket.end()) {
      ++hist[{-1}];
      continue;
    }
    Outcome distances;
    for (const auto i : bucket) distances.push_back(bit_distance_of(nodes[i]));
    std::sort(distances.begin(), distances.end());
    distances.resize(static_cast<std::size_t>(query.gamma));
    ++hist[distances];
  }
  return hist;
}

Distribution law_distribution(const ClosestContactLaw& law) {
  Distribution dist;
  dist[{-1}] = law.terminal;
  for (const auto& e : law.entries) dist[e.distances] += e.probability;
  return dist;
}

GoodnessOfFit chi_square_fit(const Distribution& expected, const Histogram& observed, std::int64_t samples,
                             double min_expected) {
  GoodnessOfFit fit;
  const double n = static_cast<double>(samples);
  double pooled_expected = 0.0;
  double pooled_observed = 0.0;
  int cells = 0;
  const auto count_of = [&](const Outcome& key) {
    const auto it = observed.find(key);
    return it == observed.end() ? 0.0 : static_cast<double>(it->second);
  };
  double covered_observed = 0.0;
  for (const auto& [key, prob] : expected) {
    const double e = prob * n;
    const double o = count_of(key);
    covered_observed += o;
    if (e < min_expected) {
      pooled_expected += e;
      pooled_observed += o;
      continue;
    }
    fit.chi_square += (o - e) * (o - e) / e;
    ++cells;
  }
  // Outcomes the law gives no mass to join the pooled cell.
  pooled_observed += n - covered_observed;
  if (pooled_expected > 0.0 || pooled_observed > 0.0) {
    const double e = std::max(pooled_expected, 1e-12);
    fit.chi_square += (pooled_observed - e) * (pooled_observed - e) / e;
    ++cells;
  }
  fit.degrees_of_freedom = std::max(1, cells - 1);
  const double df = fit.degrees_of_freedom;
  const double scale = 2.0 / (9.0 * df);
  fit.z = (std::cbrt(fit.chi_square / df) - (1.0 - scale)) / std::sqrt(scale);
  return fit;
}

double exhaustive_upsilon(std::span<const int> deltas, int depth, int draws) {
  const std::uint64_t size = std::uint64_t{1} << depth;
  std::uint64_t total = 1;
  for (int i = 0; i < draws; ++i) total *= size;
  std::vector<std::uint64_t> tuple(static_cast<std::size_t>(draws), 0);
  std::vector<int> distances(static_cast<std::size_t>(draws));
  std::uint64_t hits = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (int i = 0; i < draws; ++i) {
      distances[static_cast<std::size_t>(i)] = bit_distance_of(rest % size);
      rest /= size;
    }
    std::sort(distances.begin(), distances.end());
    if (std::equal(deltas.begin(), deltas.end(), distances.begin())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace kadlab::testing
