#include "kadlab/closest_law.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>

#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"
#include "kadlab/upsilon.hpp"

namespace kadlab {

double ClosestContactLaw::total() const {
  double sum = terminal + truncated;
  for (const auto& e : entries) sum += e.probability;
  return sum;
}

namespace {

constexpr int kMaxGamma = 8;

struct SmallTuple {
  std::array<std::int16_t, kMaxGamma> v{};
  std::uint8_t size = 0;

  void push(int value) { v[size++] = static_cast<std::int16_t>(value); }
  friend auto operator<=>(const SmallTuple&, const SmallTuple&) = default;
};

SmallTuple concat(const SmallTuple& head, const SmallTuple& tail) {
  SmallTuple out = head;
  for (int i = 0; i < tail.size; ++i) out.push(tail.v[static_cast<std::size_t>(i)]);
  return out;
}

DistanceTuple to_vector(const SmallTuple& t) {
  return DistanceTuple(t.v.begin(), t.v.begin() + t.size);
}

double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

double scaled_log(double count, double p) { return count == 0.0 ? 0.0 : count * log_or_neg_inf(p); }

// P(responsible node not among the bucket's contacts) given that the closest
// contact has distance delta1 with multiplicity c1 among the contacts, and
// `others` further region nodes are not in the bucket. Filled for c1 = 1..a.
void not_known(const RegionLaw& law, int delta1, int a, std::int64_t others, double cutoff,
               std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(a), 0.0);
  if (others == 0) return;
  const double p = law.pmf(delta1);
  const double s = law.survival(delta1);
  const double base = std::exp(static_cast<double>(others) * std::log1p(-law.cdf(delta1 - 1)));
  if (base < 1e-30) {
    std::fill(out.begin(), out.end(), 1.0);
    return;
  }
  const double share = p / (p + s);
  if (s == 0.0) {
    // Every other node sits at delta1 as well.
    for (int c1 = 1; c1 <= a; ++c1) {
      const auto c2 = static_cast<double>(others);
      out[static_cast<std::size_t>(c1 - 1)] = 1.0 - base + base * c2 / (static_cast<double>(c1) + c2);
    }
    return;
  }
  const auto terms = binomial_support(others, share, cutoff);
  for (int c1 = 1; c1 <= a; ++c1) {
    double tie = 0.0;
    for (const auto& term : terms) {
      if (term.z == 0) continue;
      const auto c2 = static_cast<double>(term.z);
      tie += term.probability * c2 / (static_cast<double>(c1) + c2);
    }
    out[static_cast<std::size_t>(c1 - 1)] = 1.0 - base + base * tie;
  }
}

// G[delta1 - lo][c1 - 1] = sum_o weight[o] * not_known(delta1, c1, o).
std::vector<std::vector<double>> not_known_weighted(const RegionLaw& law, int lo, int a,
                                                    const std::vector<double>& weight_by_others,
                                                    double cutoff) {
  const int hi = law.depth();
  std::vector<std::vector<double>> g(static_cast<std::size_t>(std::max(0, hi - lo + 1)),
                                     std::vector<double>(static_cast<std::size_t>(a), 0.0));
  std::vector<double> nk;
  for (std::size_t o = 0; o < weight_by_others.size(); ++o) {
    const double w = weight_by_others[o];
    if (w == 0.0) continue;
    for (int delta1 = lo; delta1 <= hi; ++delta1) {
      not_known(law, delta1, a, static_cast<std::int64_t>(o), cutoff, nk);
      auto& row = g[static_cast<std::size_t>(delta1 - lo)];
      for (int c = 0; c < a; ++c) row[static_cast<std::size_t>(c)] += w * nk[static_cast<std::size_t>(c)];
    }
  }
  return g;
}

// Enumerates sorted tuples of length g = min(a, gamma) with entries in
// [lo, law.depth()] and reports sum_c1 P(top-g of the a contacts = tuple,
// min multiplicity c1) * weights[tuple[0]][c1].
template <class Sink>
void enumerate_prefixes(const RegionLaw& law, int a, int gamma, int lo,
                        const std::vector<std::vector<double>>& weights, Sink&& sink) {
  const int g = std::min(a, gamma);
  const int hi = law.depth();
  if (g == 0) {
    sink(SmallTuple{}, 1.0);
    return;
  }
  if (lo > hi) return;
  SmallTuple tuple;
  tuple.size = static_cast<std::uint8_t>(g);
  const double log_a_fact = std::lgamma(static_cast<double>(a) + 1.0);

  auto evaluate = [&]() {
    const int delta1 = tuple.v[0];
    const auto& row = weights[static_cast<std::size_t>(delta1 - lo)];
    int cs = 1;
    while (cs < g && tuple.v[static_cast<std::size_t>(cs)] == delta1) ++cs;
    const double p = law.pmf(delta1);
    const double s = law.survival(delta1);
    double value = 0.0;
    if (cs < g) {
      const double lead = std::exp(log_choose(a, cs) + scaled_log(cs, p));
      if (lead == 0.0) return;
      const std::vector<int> rest(tuple.v.begin() + cs, tuple.v.begin() + g);
      value = lead * upsilon(rest, law, a - cs) * row[static_cast<std::size_t>(cs - 1)];
    } else {
      for (int c1 = g; c1 <= a; ++c1) {
        const double log_term = log_a_fact - std::lgamma(c1 + 1.0) - std::lgamma(a - c1 + 1.0) +
                                scaled_log(c1, p) + scaled_log(a - c1, s);
        if (std::isfinite(log_term)) value += std::exp(log_term) * row[static_cast<std::size_t>(c1 - 1)];
      }
    }
    if (value > 0.0) sink(tuple, value);
  };

  // Odometer over non-decreasing tuples.
  for (int i = 0; i < g; ++i) tuple.v[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(lo);
  while (true) {
    evaluate();
    int pos = g - 1;
    while (pos >= 0 && tuple.v[static_cast<std::size_t>(pos)] == hi) --pos;
    if (pos < 0) break;
    const auto next = static_cast<std::int16_t>(tuple.v[static_cast<std::size_t>(pos)] + 1);
    for (int i = pos; i < g; ++i) tuple.v[static_cast<std::size_t>(i)] = next;
  }
}

ClosestContactLaw finish(int gamma, std::map<SmallTuple, double>&& acc, double nonempty_total) {
  ClosestContactLaw law;
  law.gamma = gamma;
  double kept = 0.0;
  law.entries.reserve(acc.size());
  for (auto& [tuple, prob] : acc) {
    law.entries.push_back({to_vector(tuple), prob});
    kept += prob;
  }
  law.terminal = std::clamp(1.0 - nonempty_total, 0.0, 1.0);
  law.truncated = std::max(0.0, nonempty_total - kept);
  return law;
}

ClosestContactLaw terminal_law(int gamma) {
  ClosestContactLaw law;
  law.gamma = gamma;
  law.terminal = 1.0;
  return law;
}

void check_query(const LawQuery& q) {
  require(q.b >= 1 && q.n >= 1 && q.k >= 1, "law query: invalid b, n or k");
  require(q.d >= 0 && q.d <= q.b && q.l >= 0, "law query: invalid d or l");
  require(q.gamma >= 0 && q.gamma <= kMaxGamma, "law query: gamma out of range");
}

// Number of occupied urns when throwing balls into equiprobable urns.
class OccupancyTable {
 public:
  explicit OccupancyTable(int urns) : urns_(urns) { rows_.push_back(std::vector<double>(static_cast<std::size_t>(urns + 1), 0.0)); rows_[0][0] = 1.0; }

  double operator()(std::int64_t balls, int occupied) {
    if (occupied < 0 || occupied > urns_ || balls < occupied) return 0.0;
    while (static_cast<std::int64_t>(rows_.size()) <= balls) extend();
    return rows_[static_cast<std::size_t>(balls)][static_cast<std::size_t>(occupied)];
  }

 private:
  void extend() {
    const auto& prev = rows_.back();
    std::vector<double> next(prev.size(), 0.0);
    const double u = urns_;
    for (int e = 0; e <= urns_; ++e) {
      double v = prev[static_cast<std::size_t>(e)] * e / u;
      if (e > 0) v += prev[static_cast<std::size_t>(e - 1)] * (u - e + 1) / u;
      next[static_cast<std::size_t>(e)] = v;
    }
    rows_.push_back(std::move(next));
  }

  int urns_;
  std::vector<std::vector<double>> rows_;
};

// Joint law of the pattern classes other than the target's own class. Class c
// (1..K-1, XOR order) holds identifiers at the fixed distance base + bit_width(c).
class DiverseClasses {
 public:
  struct Piece {
    SmallTuple tail;
    double mass;
  };

  DiverseClasses(int classes, int base, double cutoff) : classes_(classes), base_(base), cutoff_(cutoff) {}

  double occupancy(int urns, std::int64_t balls, int occupied) {
    if (urns == 0) return balls == 0 && occupied == 0 ? 1.0 : 0.0;
    auto& table = occupancy_[urns];
    if (!table) table = std::make_unique<OccupancyTable>(urns);
    return (*table)(balls, occupied);
  }

  // Classes c..K-1 hold `nodes` nodes in `occupied` non-empty classes and
  // receive `extra` non-representative contacts. Lists the distances of the
  // first `slots` contacts. With need_known, the first non-empty class holds
  // the responsible node and the mass is weighted by P(it is not a contact).
  const std::vector<Piece>& suffix(int c, std::int64_t nodes, int occupied, std::int64_t extra, int slots,
                                   bool need_known) {
    const Key key{c, nodes, occupied, extra, slots, need_known};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Piece> out = compute(c, nodes, occupied, extra, slots, need_known);
    return memo_.emplace(key, std::move(out)).first->second;
  }

 private:
  struct Key {
    int c;
    std::int64_t nodes;
    int occupied;
    std::int64_t extra;
    int slots;
    bool need_known;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = static_cast<std::uint64_t>(k.c);
      h = h * 1000003ULL ^ static_cast<std::uint64_t>(k.nodes);
      h = h * 1000003ULL ^ static_cast<std::uint64_t>(k.occupied);
      h = h * 1000003ULL ^ static_cast<std::uint64_t>(k.extra);
      h = h * 1000003ULL ^ static_cast<std::uint64_t>(k.slots * 2 + (k.need_known ? 1 : 0));
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  int distance(int c) const { return base_ + std::bit_width(static_cast<unsigned>(c)); }

  std::vector<Piece> compute(int c, std::int64_t nodes, int occupied, std::int64_t extra, int slots,
                             bool need_known) {
    const int remaining = classes_ - c;
    if (remaining == 0) {
      if (nodes == 0 && occupied == 0 && extra == 0 && !need_known) return {{SmallTuple{}, 1.0}};
      return {};
    }
    if (occupied > remaining || occupied < 0 || nodes < occupied || (occupied == 0 && nodes > 0)) return {};
    if (extra > nodes - occupied) return {};
    if (occupied == 0) {
      if (need_known) return {};
      return {{SmallTuple{}, 1.0}};
    }
    if (slots == 0 && !need_known) {
      const double occ = occupancy(remaining, nodes, occupied);
      if (occ < cutoff_) return {};
      return {{SmallTuple{}, occ}};
    }

    std::map<SmallTuple, double> acc;
    auto absorb = [&](const std::vector<Piece>& sub, const SmallTuple& head, double weight) {
      for (const auto& piece : sub) {
        const double mass = weight * piece.mass;
        if (mass < cutoff_) continue;
        acc[concat(head, piece.tail)] += mass;
      }
    };

    // Class c empty.
    const double empty = remaining == 1 ? (nodes == 0 ? 1.0 : 0.0)
                                        : std::exp(static_cast<double>(nodes) * std::log1p(-1.0 / remaining));
    if (empty > cutoff_) absorb(suffix(c + 1, nodes, occupied, extra, slots, need_known), SmallTuple{}, empty);

    // Class c non-empty.
    std::vector<BinomialTerm> counts;
    if (remaining == 1) {
      counts.push_back({nodes, 1.0});
    } else {
      counts = binomial_support(nodes, 1.0 / remaining, cutoff_);
    }
    const std::int64_t spare = nodes - occupied;
    for (const auto& [count, p_count] : counts) {
      if (count == 0) continue;
      const std::int64_t max_hits = std::min<std::int64_t>(extra, count - 1);
      for (std::int64_t hits = 0; hits <= max_hits; ++hits) {
        const double p_hits = hypergeometric_pmf(spare, count - 1, extra, hits);
        const double w = p_count * p_hits;
        if (w < cutoff_) continue;
        const std::int64_t contacts = 1 + hits;
        const double known_weight =
            need_known ? 1.0 - static_cast<double>(contacts) / static_cast<double>(count) : 1.0;
        if (known_weight <= 0.0) continue;
        const int take = static_cast<int>(std::min<std::int64_t>(contacts, slots));
        SmallTuple head;
        for (int i = 0; i < take; ++i) head.push(distance(c));
        absorb(suffix(c + 1, nodes - count, occupied - 1, extra - hits, slots - take, false), head,
               w * known_weight);
      }
    }
    std::vector<Piece> out;
    out.reserve(acc.size());
    for (auto& [tail, mass] : acc) out.push_back({tail, mass});
    return out;
  }

  int classes_;
  int base_;
  double cutoff_;
  std::unordered_map<Key, std::vector<Piece>, KeyHash> memo_;
  std::unordered_map<int, std::unique_ptr<OccupancyTable>> occupancy_;
};

}  // namespace

ClosestContactLaw closest_law_standard(const LawQuery& query) {
  check_query(query);
  const int depth = query.d - query.l;
  if (depth < 0 || query.n == 1) return terminal_law(query.gamma);
  const RegionLaw region(depth);
  const int k = query.k;
  const auto population = binomial_support(query.n - 1, pow2(depth - query.b), query.cutoff);

  std::vector<double> weight_by_others;
  double nonempty_total = 0.0;
  for (const auto& [m, pm] : population) {
    if (m <= k) continue;
    const auto others = static_cast<std::size_t>(m - k);
    if (weight_by_others.size() <= others) weight_by_others.resize(others + 1, 0.0);
    weight_by_others[others] += pm;
    nonempty_total += pm * (1.0 - static_cast<double>(k) / static_cast<double>(m));
  }

  std::map<SmallTuple, double> acc;
  const int lo = std::max(0, query.min_distance);
  if (!weight_by_others.empty() && lo <= depth) {
    const auto g = not_known_weighted(region, lo, k, weight_by_others, query.cutoff);
    enumerate_prefixes(region, k, query.gamma, lo, g, [&](const SmallTuple& t, double p) {
      if (p >= query.cutoff) acc[t] += p;
    });
  }
  return finish(query.gamma, std::move(acc), nonempty_total);
}

namespace {

struct DiverseResult {
  std::map<SmallTuple, double> acc;
  double nonempty_total = 0.0;
};

DiverseResult diverse_exact(const LawQuery& query, bool with_tuples) {
  DiverseResult result;
  const int depth = query.d - query.l;
  const int q = std::min(floor_log2(query.k), depth);
  const int classes = 1 << q;
  const int base = depth - q;
  const int k = query.k;
  const int gamma = with_tuples ? query.gamma : 0;
  const int lo = std::max(0, query.min_distance);
  const RegionLaw own_class(base);
  DiverseClasses others(classes, base, query.cutoff);

  struct Bucket {
    std::vector<double> weight_by_others;
  };
  std::map<std::pair<int, SmallTuple>, Bucket> own_part;

  const auto population = binomial_support(query.n - 1, pow2(depth - query.b), query.cutoff);
  for (const auto& [m, pm] : population) {
    if (m <= k) continue;
    const std::vector<BinomialTerm> own_counts =
        classes == 1 ? std::vector<BinomialTerm>{{m, 1.0}} : binomial_support(m, 1.0 / classes, query.cutoff);
    const double own_empty = classes == 1 ? 0.0 : std::exp(static_cast<double>(m) * std::log1p(-1.0 / classes));
    for (int occupied = 1; occupied <= classes; ++occupied) {
      if (others.occupancy(classes, m, occupied) < query.cutoff) continue;
      const std::int64_t extra = k - occupied;
      const std::int64_t spare = m - occupied;

      if (occupied < classes && pm * own_empty >= query.cutoff) {
        for (const auto& piece : others.suffix(1, m, occupied, extra, gamma, true)) {
          const double mass = pm * own_empty * piece.mass;
          result.nonempty_total += mass;
          if (with_tuples && (piece.tail.size == 0 || piece.tail.v[0] >= lo) && mass >= query.cutoff) {
            result.acc[piece.tail] += mass;
          }
        }
      }

      for (const auto& [count, p_count] : own_counts) {
        if (count == 0) continue;
        const std::int64_t max_hits = std::min<std::int64_t>(extra, count - 1);
        for (std::int64_t hits = 0; hits <= max_hits; ++hits) {
          const double w = pm * p_count * hypergeometric_pmf(spare, count - 1, extra, hits);
          if (w < query.cutoff) continue;
          const int contacts = static_cast<int>(1 + hits);
          const int head = std::min(contacts, gamma);
          const double p_not_known = 1.0 - static_cast<double>(contacts) / static_cast<double>(count);
          for (const auto& piece : others.suffix(1, m - count, occupied - 1, extra - hits, gamma - head, false)) {
            const double mass = w * piece.mass;
            result.nonempty_total += mass * p_not_known;
            if (!with_tuples || p_not_known <= 0.0) continue;
            auto& bucket = own_part[{contacts, piece.tail}];
            const auto idx = static_cast<std::size_t>(count - contacts);
            if (bucket.weight_by_others.size() <= idx) bucket.weight_by_others.resize(idx + 1, 0.0);
            bucket.weight_by_others[idx] += mass;
          }
        }
      }
    }
  }

  if (!with_tuples) return result;
  for (const auto& [key, bucket] : own_part) {
    const auto& [contacts, tail] = key;
    if (lo > base) continue;
    const auto g = not_known_weighted(own_class, lo, contacts, bucket.weight_by_others, query.cutoff);
    enumerate_prefixes(own_class, contacts, gamma, lo, g, [&](const SmallTuple& head, double p) {
      if (p >= query.cutoff) result.acc[concat(head, tail)] += p;
    });
  }
  return result;
}

}  // namespace

ClosestContactLaw closest_law_diverse(const LawQuery& query) {
  check_query(query);
  const int depth = query.d - query.l;
  if (depth < 0 || query.n == 1) return terminal_law(query.gamma);
  auto result = diverse_exact(query, true);
  return finish(query.gamma, std::move(result.acc), result.nonempty_total);
}

double success_prob(Scheme scheme, int d, int l, std::int64_t n, int k, int q, int b, LawFormula formula) {
  require(n >= 1 && k >= 1 && d <= b, "success_prob: invalid arguments");
  const int depth = d - l;
  if (depth < 0 || n == 1) return 1.0;
  const double cutoff = 1e-20;
  const auto population = binomial_support(n - 1, pow2(depth - b), cutoff);

  if (scheme == Scheme::Standard) {
    double nonempty = 0.0;
    for (const auto& [m, pm] : population) {
      if (m > k) nonempty += pm * (1.0 - static_cast<double>(k) / static_cast<double>(m));
    }
    return 1.0 - nonempty;
  }

  if (formula == LawFormula::Exact) {
    require(q == floor_log2(k), "success_prob: q must equal floor(log2 k)");
    LawQuery query{b, n, d, l, k, 0, 0, cutoff};
    return 1.0 - diverse_exact(query, false).nonempty_total;
  }

  // Literal closed form with the stars-and-bars occupancy weights.
  const std::int64_t patterns = std::int64_t{1} << q;
  double total = binom_pmf(n - 1, 0, pow2(depth - b));
  for (const auto& [m, pm] : population) {
    if (m == 0) continue;
    double inner = binom_pmf(m, 0, 1.0 / static_cast<double>(patterns)) *
                   std::min(1.0, static_cast<double>(k) / static_cast<double>(m));
    for (const auto& [j, pj] : binomial_support(m, 1.0 / static_cast<double>(patterns), cutoff)) {
      if (j == 0) continue;
      double rho = 1.0 / static_cast<double>(j);
      double spread = 0.0;
      for (std::int64_t i = 1; i <= patterns - 1; ++i) {
        if (i - 1 > m - j) break;
        const double log_w = log_choose(static_cast<double>(patterns - 1), static_cast<double>(i)) +
                             log_choose(static_cast<double>(m - j), static_cast<double>(i - 1)) -
                             log_choose(static_cast<double>(m - j + patterns - 2), static_cast<double>(patterns - 2));
        const double reach = std::min(1.0, static_cast<double>(k + patterns - i - 1) /
                                               static_cast<double>(std::max<std::int64_t>(1, m - i - 1)));
        spread += std::exp(log_w) * reach;
      }
      rho += (1.0 - 1.0 / static_cast<double>(j)) * spread;
      inner += pj * rho;
    }
    total += pm * inner;
  }
  return total;
}

namespace {

// C(n, r) allowing arguments outside the usual domain (then 0).
double choose_or_zero(double n, double r) {
  if (r < 0 || n < 0 || r > n) return 0.0;
  return std::exp(log_choose(n, r));
}

double over_or_zero(double a, double b, double c) {
  if (c < 0 || a < 0 || b < 0 || c > a || a > b) return 0.0;
  if (c == 0) return 1.0;
  return std::exp(log_choose(a, c) - log_choose(b, c));
}

double binom_or_zero(double m, double z, double p) {
  if (m < 0 || z < 0 || z > m || p < 0 || p > 1) return 0.0;
  return binom_pmf(static_cast<std::int64_t>(m), static_cast<std::int64_t>(z), p);
}

double pow2_sum(int from, int to) {
  double s = 0.0;
  for (int i = from; i <= to; ++i) s += pow2(i);
  return s;
}

}  // namespace

ClosestContactLaw closest_law_diverse_printed(const LawQuery& query) {
  check_query(query);
  if (query.gamma != 2 && query.gamma != 3) {
    throw UnsupportedParameter("closed-form diverse closest-contact law exists only for gamma 2 and 3");
  }
  const int depth = query.d - query.l;
  if (depth < 0 || query.n == 1) return terminal_law(query.gamma);
  const int q = floor_log2(query.k);
  const int k = query.k;
  const double patterns = pow2(q);
  const int inner_depth = std::max(depth - q - 1, 0);
  const double empty_prefix = empty_region_prob(inner_depth, query.n, query.b);
  const int split = depth - q;  // distances >= split lie outside the own prefix
  const int lo = std::max(0, query.min_distance);
  const int r_max = static_cast<int>(patterns) - 1;

  std::map<SmallTuple, double> raw;
  auto r_weight = [&](int r) { return binom_or_zero(patterns - 1, r, empty_prefix); };

  if (query.gamma == 2) {
    for (int d1 = lo; d1 <= depth; ++d1) {
      for (int d2 = d1; d2 <= depth; ++d2) {
        if (d1 >= split) continue;
        double value = 0.0;
        if (d2 >= split) {
          if (d1 > inner_depth) continue;
          const int eta = depth - d2;
          const int one[] = {d1};
          const double ups = upsilon(one, inner_depth, 1);
          for (int r = 0; r <= r_max; ++r) {
            const double diff = over_or_zero(r, patterns - 1, pow2(q - eta) - 1) -
                                over_or_zero(r, patterns - 1, pow2(q - eta + 1) - 1);
            value += r_weight(r) * binom_or_zero(r + k - patterns, 0, 1.0 / (patterns - r)) * ups * diff;
          }
        } else {
          if (d2 > inner_depth) continue;
          const int two[] = {d1, d2};
          for (int r = 0; r <= r_max; ++r) {
            const double extra = r + k - patterns;
            double inner = 0.0;
            for (int a = 1; a <= static_cast<int>(extra); ++a) {
              inner += binom_or_zero(extra, a, 1.0 / (patterns - r)) * upsilon(two, inner_depth, a + 1);
            }
            value += r_weight(r) * inner;
          }
        }
        if (value > 0.0) {
          SmallTuple t;
          t.push(d1);
          t.push(d2);
          raw[t] += value;
        }
      }
    }
  } else {
    for (int d1 = lo; d1 <= depth; ++d1) {
      for (int d2 = d1; d2 <= depth; ++d2) {
        for (int d3 = d2; d3 <= depth; ++d3) {
          if (d1 >= split) continue;
          double value = 0.0;
          if (d2 >= split) {
            if (d1 > inner_depth) continue;
            const int eta2 = depth - d2;
            const int eta3 = depth - d3;
            const int one[] = {d1};
            const double ups = upsilon(one, inner_depth, 1);
            const double block = pow2(q - eta2);
            for (int r = 0; r <= r_max - 1; ++r) {
              const double p_r = choose_or_zero(patterns - 1 - r, 1) * choose_or_zero(r - block + 1, block - 1) /
                                 choose_or_zero(patterns - block, block);
              const double p_r_safe = std::isfinite(p_r) ? p_r : 0.0;
              const double none_extra = binom_or_zero(k - patterns + r, 0, 1.0 / (patterns - r - 1));
              double tail = 0.0;
              if (eta2 == eta3) {
                tail = (1.0 - over_or_zero(r - block + 1, patterns - block, block) - p_r_safe) +
                       p_r_safe * (1.0 - none_extra);
              } else {
                const double first = pow2_sum(q - eta2 + 2, q - eta3);
                const double second = pow2_sum(q - eta2 + 2, q - eta3 + 1);
                tail = p_r_safe * none_extra *
                       (over_or_zero(r - block + 2, patterns - 2 * block, first) -
                        over_or_zero(r - block + 2, patterns - 2 * block, second));
              }
              value += r_weight(r) * binom_or_zero(r + k - patterns, 0, 1.0 / (patterns - r)) * ups *
                       over_or_zero(r, patterns - 1, block - 1) * tail;
            }
          } else if (d3 >= split) {
            if (d2 > inner_depth) continue;
            const int eta3 = depth - d3;
            const int two[] = {d1, d2};
            const double ups = upsilon(two, inner_depth, 2);
            for (int r = 0; r <= r_max - 1; ++r) {
              const double diff = over_or_zero(r, patterns - 1, pow2(q - eta3) - 1) -
                                  over_or_zero(r, patterns - 1, pow2(q - eta3 + 1) - 1);
              value += r_weight(r) * binom_or_zero(r + k - patterns, 1, 1.0 / (patterns - r)) * ups * diff;
            }
          } else {
            if (d3 > inner_depth) continue;
            const int three[] = {d1, d2, d3};
            for (int r = 0; r <= r_max; ++r) {
              const double extra = r + k - patterns;
              double inner = 0.0;
              for (int a = 2; a <= static_cast<int>(extra); ++a) {
                inner += binom_or_zero(extra, a, 1.0 / (patterns - r)) * upsilon(three, inner_depth, a + 1);
              }
              value += r_weight(r) * inner;
            }
          }
          if (value > 0.0) {
            SmallTuple t;
            t.push(d1);
            t.push(d2);
            t.push(d3);
            raw[t] += value;
          }
        }
      }
    }
  }

  double raw_sum = 0.0;
  for (const auto& [t, v] : raw) raw_sum += v;
  const double terminal = std::clamp(
      success_prob(Scheme::DiversityMax, query.d, query.l, query.n, k, q, query.b, LawFormula::Printed), 0.0, 1.0);
  ClosestContactLaw law;
  law.gamma = query.gamma;
  if (raw_sum <= 0.0) {
    law.terminal = 1.0;
    return law;
  }
  law.terminal = terminal;
  const double scale = (1.0 - terminal) / raw_sum;
  for (const auto& [t, v] : raw) law.entries.push_back({to_vector(t), v * scale});
  return law;
}

ClosestContactLaw closest_law(Scheme scheme, LawFormula formula, const LawQuery& query) {
  if (scheme == Scheme::Standard) return closest_law_standard(query);
  if (formula == LawFormula::Printed) return closest_law_diverse_printed(query);
  return closest_law_diverse(query);
}

ClosestContactLaw mix_over_levels(const std::vector<WeightedLaw>& parts) {
  require(!parts.empty(), "mix_over_levels needs at least one part");
  ClosestContactLaw out;
  out.gamma = parts.front().law.gamma;
  std::map<DistanceTuple, double> acc;
  for (const auto& part : parts) {
    require(part.law.gamma == out.gamma, "mix_over_levels: gamma mismatch");
    out.terminal += part.weight * part.law.terminal;
    out.truncated += part.weight * part.law.truncated;
    for (const auto& e : part.law.entries) acc[e.distances] += part.weight * e.probability;
  }
  out.entries.reserve(acc.size());
  for (auto& [t, p] : acc) out.entries.push_back({t, p});
  return out;
}

}  // namespace kadlab
