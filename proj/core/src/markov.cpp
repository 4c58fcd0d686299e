#include "kadlab/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"

namespace kadlab {

StateDistribution::StateDistribution(int alpha, int lo, int hi) : alpha_(alpha), lo_(lo), hi_(hi) {
  require(alpha >= 1 && alpha <= 8, "alpha must be in [1, 8]");
  require(lo <= hi, "empty distance window");
  require(hi - lo + 2 <= 64, "distance window too wide");
}

std::uint64_t StateDistribution::encode(const DistanceTuple& distances) const {
  require(static_cast<int>(distances.size()) <= alpha_, "state tuple longer than alpha");
  const std::uint64_t base = static_cast<std::uint64_t>(hi_ - lo_ + 2);
  const std::uint64_t missing = base - 1;
  std::uint64_t key = 0;
  std::uint64_t scale = 1;
  for (int i = 0; i < alpha_; ++i) {
    std::uint64_t idx = missing;
    if (i < static_cast<int>(distances.size())) {
      const int v = distances[static_cast<std::size_t>(i)];
      require(v >= lo_ && v <= hi_, "state distance outside window");
      if (i > 0) require(distances[static_cast<std::size_t>(i - 1)] <= v, "state tuple not sorted");
      idx = static_cast<std::uint64_t>(v - lo_);
    }
    key += idx * scale;
    scale *= base;
  }
  return key;
}

DistanceTuple StateDistribution::decode(std::uint64_t key) const {
  const std::uint64_t base = static_cast<std::uint64_t>(hi_ - lo_ + 2);
  DistanceTuple out;
  for (int i = 0; i < alpha_; ++i) {
    const std::uint64_t idx = key % base;
    key /= base;
    if (idx != base - 1) out.push_back(static_cast<int>(idx) + lo_);
  }
  return out;
}

double StateDistribution::probability(const MarkovState& state) const {
  if (state.terminal) return terminal_;
  const auto it = mass_.find(encode(state.distances));
  return it == mass_.end() ? 0.0 : it->second;
}

double StateDistribution::total() const {
  double sum = terminal_;
  for (const auto& [key, p] : mass_) sum += p;
  return sum;
}

std::vector<std::pair<MarkovState, double>> StateDistribution::states() const {
  std::vector<std::pair<MarkovState, double>> out;
  out.reserve(mass_.size() + 1);
  for (const auto& [key, p] : mass_) out.push_back({MarkovState{false, decode(key)}, p});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first.distances < b.first.distances; });
  if (terminal_ > 0.0) out.insert(out.begin(), {MarkovState{true, {}}, terminal_});
  return out;
}

void StateDistribution::add(const MarkovState& state, double p) {
  if (state.terminal) {
    terminal_ += p;
  } else {
    mass_[encode(state.distances)] += p;
  }
}

struct HopCountModel::Outcome {
  double absorb = 0.0;
  double truncated = 0.0;
  std::vector<std::pair<std::uint64_t, double>> next;
};

namespace {

constexpr std::uint8_t kMissing = 0xff;
using Slots = std::array<std::uint8_t, 8>;

int ceil_log2(std::int64_t n) {
  int r = 0;
  while ((std::int64_t{1} << r) < n) ++r;
  return r;
}

// top-alpha of the union of two ascending slot lists.
Slots merge_top(const Slots& a, const Slots& b, int alpha) {
  Slots out;
  out.fill(kMissing);
  int i = 0;
  int j = 0;
  for (int t = 0; t < alpha; ++t) {
    if (a[static_cast<std::size_t>(i)] <= b[static_cast<std::size_t>(j)]) {
      out[static_cast<std::size_t>(t)] = a[static_cast<std::size_t>(i++)];
    } else {
      out[static_cast<std::size_t>(t)] = b[static_cast<std::size_t>(j++)];
    }
  }
  return out;
}

}  // namespace

HopCountModel::HopCountModel(SystemProfile profile, std::int64_t n, Scheme scheme, ModelOptions options)
    : profile_(std::move(profile)), n_(n), scheme_(scheme), options_(options) {
  profile_.validate();
  require(n >= 1, "model needs n >= 1");
  require(profile_.alpha <= 7 && profile_.beta <= 7, "alpha and beta must be at most 7");
  lo_ = std::max(0, profile_.b - (ceil_log2(n) + options_.window_extra));
}

HopCountModel::~HopCountModel() = default;
HopCountModel::HopCountModel(HopCountModel&&) noexcept = default;
HopCountModel& HopCountModel::operator=(HopCountModel&&) noexcept = default;

const ClosestContactLaw& HopCountModel::node_law(int d, int gamma) {
  const std::int64_t key = static_cast<std::int64_t>(d) * 16 + gamma;
  if (auto it = laws_.find(key); it != laws_.end()) return *it->second;
  std::vector<WeightedLaw> parts;
  for (const auto& level : profile_.levels(d)) {
    LawQuery query;
    query.b = profile_.b;
    query.n = n_;
    query.d = d;
    query.l = level.digits;
    query.k = profile_.capacity(d);
    query.gamma = gamma;
    query.min_distance = lo_;
    query.cutoff = options_.law_cutoff;
    parts.push_back({level.weight, closest_law(scheme_, options_.formula, query)});
  }
  auto law = std::make_unique<ClosestContactLaw>(mix_over_levels(parts));
  return *laws_.emplace(key, std::move(law)).first->second;
}

StateDistribution HopCountModel::initial_distribution() {
  const int alpha = profile_.alpha;
  const int b = profile_.b;
  StateDistribution dist(alpha, lo_, b);
  for (int d = 0; d <= b; ++d) {
    const double p_d = d == 0 ? pow2(-b) : pow2(d - 1 - b);
    if (d < lo_) {
      // Requesters this close know the responsible node unless the tiny
      // remaining mass falls below the window.
      double terminal = 0.0;
      for (const auto& level : profile_.levels(d)) {
        terminal += level.weight *
                    success_prob(scheme_, d, level.digits, n_, profile_.capacity(d), profile_.q(d), b);
      }
      dist.add_terminal(p_d * terminal);
      dist.add_truncation(p_d * (1.0 - terminal));
      continue;
    }
    const auto& law = node_law(d, alpha);
    dist.add_terminal(p_d * law.terminal);
    dist.add_truncation(p_d * law.truncated);
    for (const auto& e : law.entries) dist.add(MarkovState{false, e.distances}, p_d * e.probability);
  }
  return dist;
}

const HopCountModel::Outcome& HopCountModel::outcome(std::uint64_t key, const StateDistribution& shape) {
  if (auto it = outcomes_.find(key); it != outcomes_.end()) return *it->second;
  const int alpha = shape.alpha();
  const int beta = profile_.beta;
  const DistanceTuple distances = shape.decode(key);
  auto result = std::make_unique<Outcome>();

  double survive_all = 1.0;
  std::vector<std::pair<Slots, double>> partial{{Slots{}, 1.0}};
  partial.front().first.fill(kMissing);
  std::unordered_map<std::uint64_t, std::size_t> index;
  std::vector<std::pair<Slots, double>> merged;
  double pruned = 0.0;
  const double merge_cutoff = 1e-24;

  for (const int d : distances) {
    const auto& law = node_law(d, beta);
    survive_all *= 1.0 - law.terminal;

    merged.clear();
    index.clear();
    for (const auto& [slots, pa] : partial) {
      for (const auto& e : law.entries) {
        const double p = pa * e.probability;
        if (p < merge_cutoff) {
          pruned += p;
          continue;
        }
        Slots other;
        other.fill(kMissing);
        for (std::size_t t = 0; t < e.distances.size(); ++t) {
          other[t] = static_cast<std::uint8_t>(e.distances[t] - lo_);
        }
        const Slots top = merge_top(slots, other, alpha);
        std::uint64_t packed = 0;
        for (int t = 0; t < alpha; ++t) packed = (packed << 8) | top[static_cast<std::size_t>(t)];
        auto [it, inserted] = index.emplace(packed, merged.size());
        if (inserted) {
          merged.push_back({top, p});
        } else {
          merged[it->second].second += p;
        }
      }
    }
    partial.swap(merged);
  }

  result->absorb = 1.0 - survive_all;
  const double missing_slot = static_cast<double>(shape.hi() - shape.lo() + 1);
  double emitted = 0.0;
  for (const auto& [slots, p] : partial) {
    if (p < options_.state_cutoff * 1e-6) {
      pruned += p;
      continue;
    }
    DistanceTuple next;
    for (int t = 0; t < alpha; ++t) {
      const auto idx = slots[static_cast<std::size_t>(t)];
      if (idx != kMissing && idx < missing_slot) next.push_back(static_cast<int>(idx) + lo_);
    }
    result->next.push_back({shape.encode(next), p});
    emitted += p;
  }
  // Everything that neither absorbs nor lands in a kept state.
  result->truncated = std::max(0.0, survive_all - emitted);
  return *outcomes_.emplace(key, std::move(result)).first->second;
}

StateDistribution HopCountModel::transition_apply(const StateDistribution& dist) {
  StateDistribution out(dist.alpha(), dist.lo(), dist.hi());
  out.add_terminal(dist.terminal());
  out.add_truncation(dist.truncation_loss());
  for (const auto& [key, mass] : dist.raw()) {
    if (mass < options_.state_cutoff) {
      out.add_truncation(mass);
      continue;
    }
    const Outcome& o = outcome(key, dist);
    out.add_terminal(mass * o.absorb);
    out.add_truncation(mass * o.truncated);
    for (const auto& [next, p] : o.next) out.add_raw(next, mass * p);
  }
  return out;
}

HopCountResult HopCountModel::hop_count_cdf(int h_max) {
  require(h_max >= 1, "h_max must be >= 1");
  HopCountResult result;
  StateDistribution dist = initial_distribution();
  for (int h = 1; h <= h_max; ++h) {
    if (h > 1) dist = transition_apply(dist);
    result.cdf.push_back(std::min(1.0, dist.terminal()));
  }
  double previous = 0.0;
  for (int h = 1; h <= h_max; ++h) {
    const double c = result.cdf[static_cast<std::size_t>(h - 1)];
    result.mean += h * (c - previous);
    previous = c;
  }
  result.residual_mass = std::max(0.0, 1.0 - previous);
  result.mean += (h_max + 1) * result.residual_mass;
  result.truncation_loss = dist.truncation_loss();
  result.residual_warning = result.residual_mass > 1e-4;
  if (result.truncation_loss > options_.max_truncation) {
    throw std::runtime_error("model truncation loss exceeds tolerance");
  }
  return result;
}

StateDistribution initial_distribution(const SystemProfile& profile, std::int64_t n, Scheme scheme) {
  return HopCountModel(profile, n, scheme).initial_distribution();
}

StateDistribution transition_apply(const StateDistribution& dist, const SystemProfile& profile, std::int64_t n,
                                   Scheme scheme) {
  HopCountModel model(profile, n, scheme);
  require(dist.lo() == model.window_lo() && dist.hi() == profile.b && dist.alpha() == profile.alpha,
          "distribution window does not match the model");
  return model.transition_apply(dist);
}

HopCountResult hop_count_cdf(const SystemProfile& profile, std::int64_t n, Scheme scheme, int h_max,
                             ModelOptions options) {
  return HopCountModel(profile, n, scheme, options).hop_count_cdf(h_max);
}

}  // namespace kadlab
