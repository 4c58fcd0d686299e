#include "kadlab/simulator.hpp"

#include <algorithm>
#include <unordered_set>

#include "kadlab/errors.hpp"

namespace kadlab {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

IdIndex draw_ids(int width, std::int64_t n, std::mt19937_64& rng) {
  std::unordered_set<NodeId, NodeIdHash> seen;
  std::vector<IdIndex::Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  while (static_cast<std::int64_t>(entries.size()) < n) {
    NodeId id = NodeId::random(width, rng);
    if (seen.insert(id).second) entries.push_back({id, 0});
  }
  IdIndex index(std::move(entries));
  std::vector<IdIndex::Entry> relabeled;
  for (std::size_t i = 0; i < index.size(); ++i) relabeled.push_back({index[i].id, i});
  return IdIndex(std::move(relabeled));
}

// Floyd's algorithm: `count` distinct offsets from [0, m).
std::vector<std::size_t> sample_offsets(std::size_t m, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> chosen;
  std::unordered_set<std::size_t> taken;
  for (std::size_t j = m - count; j < m; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = taken.contains(t) ? j : t;
    taken.insert(pick);
    chosen.push_back(pick);
  }
  return chosen;
}

}  // namespace

StaticNetwork::StaticNetwork(std::shared_ptr<const SystemProfile> profile, std::int64_t n, Scheme scheme,
                             std::uint64_t seed)
    : profile_(std::move(profile)), scheme_(scheme), seed_(seed) {
  require(profile_ != nullptr, "network needs a profile");
  require(n >= 1, "network needs n >= 1");
  profile_->validate();
  std::mt19937_64 rng(derive_seed(seed, 0));
  index_ = draw_ids(profile_->b, n, rng);
  tables_.resize(index_.size());
}

RoutingTable StaticNetwork::build_table(std::size_t node) const {
  RoutingTable table(index_[node].id, profile_, scheme_);
  std::mt19937_64 rng(derive_seed(seed_, node + 1));
  const auto contact = [&](std::size_t i) {
    Contact c;
    c.id = index_[i].id;
    c.peer = index_[i].handle;
    return c;
  };
  for (const auto& key : table.keys_through(index_.deepest_level(node))) {
    Bucket& bucket = table.bucket(key);
    const auto [lo, hi] = index_.range(bucket.prefix(), bucket.prefix_len());
    const std::size_t m = hi - lo;
    const auto capacity = static_cast<std::size_t>(bucket.capacity());
    if (m <= capacity) {
      for (std::size_t i = lo; i < hi; ++i) bucket.insert(contact(i));
      continue;
    }
    if (scheme_ == Scheme::Standard || bucket.q() == 0) {
      for (const auto off : sample_offsets(m, capacity, rng)) bucket.insert(contact(lo + off));
      continue;
    }
    std::unordered_set<std::size_t> used;
    const int cls_len = bucket.prefix_len() + bucket.q();
    for (std::uint32_t pattern = 0; pattern < (1U << bucket.q()); ++pattern) {
      NodeId cls = bucket.prefix();
      cls.set_bits(bucket.prefix_len(), bucket.q(), pattern);
      const auto [clo, chi] = index_.range(cls, cls_len);
      if (clo == chi) continue;
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(clo, chi - 1)(rng);
      used.insert(pick);
      bucket.insert(contact(pick));
    }
    // The remainder is uniform over the region minus the representatives.
    const std::size_t rest = capacity - used.size();
    std::vector<std::size_t> pool;
    for (const auto off : sample_offsets(m - used.size(), rest, rng)) pool.push_back(off);
    std::vector<std::size_t> reps(used.begin(), used.end());
    std::sort(reps.begin(), reps.end());
    for (auto off : pool) {
      std::size_t idx = lo + off;
      for (const auto r : reps) {
        if (r <= idx) ++idx;
      }
      bucket.insert(contact(idx));
    }
  }
  return table;
}

const RoutingTable& StaticNetwork::table(std::size_t node) {
  require(node < tables_.size(), "node index out of range");
  if (!tables_[node]) tables_[node] = std::make_unique<RoutingTable>(build_table(node));
  return *tables_[node];
}

std::size_t StaticNetwork::responsible(const NodeId& target) const {
  return index_.closest(target, 1).front();
}

std::optional<std::vector<Contact>> StaticNetwork::query(const Contact& node, const NodeId& target, int beta) {
  return table(static_cast<std::size_t>(node.peer)).closest_contacts(target, beta);
}

bool StaticNetwork::is_responsible(const NodeId& id, const NodeId& target) {
  if (!last_responsible_ || !(last_responsible_->first == target)) {
    last_responsible_ = std::make_pair(target, responsible(target));
  }
  return index_[last_responsible_->second].id == id;
}

}  // namespace kadlab
