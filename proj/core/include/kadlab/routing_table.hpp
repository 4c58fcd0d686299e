#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kadlab/node_id.hpp"
#include "kadlab/profile.hpp"

namespace kadlab {

using SimTime = double;
using PeerHandle = std::uint64_t;
inline constexpr PeerHandle kNoPeer = ~PeerHandle{0};

struct Contact {
  NodeId id;
  PeerHandle peer = kNoPeer;
  SimTime first_seen = 0.0;
  SimTime last_verified = 0.0;
  bool stale = false;
};

// Identifies a bucket: its level (common prefix length with the owner) and
// the resolved digits starting at that level, the first being the flipped bit.
struct BucketKey {
  int level = 0;
  int digits = 0;
  std::uint32_t pattern = 0;

  int prefix_len() const { return level + digits; }
  friend auto operator<=>(const BucketKey&, const BucketKey&) = default;
};

class Bucket {
 public:
  Bucket(const NodeId& prefix, int prefix_len, int capacity, int q);

  const NodeId& prefix() const { return prefix_; }
  int prefix_len() const { return prefix_len_; }
  int capacity() const { return capacity_; }
  int q() const { return q_; }
  const std::vector<Contact>& contacts() const { return contacts_; }
  std::size_t size() const { return contacts_.size(); }
  bool full() const { return static_cast<int>(contacts_.size()) >= capacity_; }

  bool covers(const NodeId& id) const;
  std::uint32_t pattern_of(const NodeId& id) const;
  DiversityDegree diversity() const;
  int class_count(std::uint32_t pattern) const;
  const Contact* find(const NodeId& id) const;
  Contact* find(const NodeId& id);

  // Raw mutation; callers enforce the selection policy.
  void insert(const Contact& c);
  std::optional<Contact> erase(const NodeId& id);

 private:
  NodeId prefix_;
  int prefix_len_;
  int capacity_;
  int q_;
  std::vector<Contact> contacts_;
  std::vector<int> class_counts_;
  int distinct_ = 0;
};

struct OfferResult {
  enum class Kind { Inserted, Replaced, Rejected };
  Kind kind = Kind::Rejected;
  std::optional<Contact> evicted;
};

// Source of candidate contacts and liveness answers for maintenance.
class PeerOracle {
 public:
  virtual ~PeerOracle() = default;
  virtual bool available() const { return true; }
  // Online nodes other than `exclude` whose ids start with the first
  // prefix_len bits of `prefix`, XOR-closest to `target` first.
  virtual std::vector<Contact> find_candidates(const NodeId& prefix, int prefix_len, const NodeId& target,
                                               int count, const NodeId& exclude, SimTime now) = 0;
  virtual bool is_alive(const Contact& c) = 0;
  // Longest common prefix of `owner` with any other online node, -1 if none.
  virtual int deepest_level(const NodeId& owner) = 0;
};

struct MaintenanceConfig {
  SimTime population_period = 60.0;
  SimTime probe_period = 300.0;
  double long_lived_multiplier = 4.0;

  // Probe period for a contact of the given age.
  SimTime probe_interval(SimTime age) const {
    return age >= probe_period * long_lived_multiplier ? probe_period * long_lived_multiplier : probe_period;
  }
};

struct MaintenanceReport {
  int inserted = 0;
  int evicted = 0;
  int probed = 0;
  int searches = 0;
  std::vector<Contact> added;
};

class RoutingTable {
 public:
  RoutingTable(const NodeId& owner, std::shared_ptr<const SystemProfile> profile, Scheme scheme);
  RoutingTable(const RoutingTable& other);
  RoutingTable& operator=(const RoutingTable& other);
  RoutingTable(RoutingTable&&) noexcept = default;
  RoutingTable& operator=(RoutingTable&&) noexcept = default;

  const NodeId& owner() const { return owner_; }
  const SystemProfile& profile() const { return *profile_; }
  Scheme scheme() const { return scheme_; }

  BucketKey key_for(const NodeId& target) const;
  Bucket& bucket_for(const NodeId& target);
  const Bucket* find_bucket(const NodeId& target) const;
  Bucket& bucket(const BucketKey& key);
  // Every bucket key at levels 0..max_level.
  std::vector<BucketKey> keys_through(int max_level) const;
  NodeId key_prefix(const BucketKey& key) const;

  OfferResult offer_contact(const Contact& c);
  std::optional<Contact> remove(const NodeId& id);
  const Contact* find(const NodeId& id) const;
  Contact* find(const NodeId& id);

  std::vector<Contact> closest_contacts(const NodeId& target, int gamma) const;

  MaintenanceReport maintenance_tick(SimTime now, PeerOracle* oracle, const MaintenanceConfig& config,
                                     std::mt19937_64& rng);
  // Fills one bucket from the oracle according to the scheme.
  MaintenanceReport refill(const BucketKey& key, SimTime now, PeerOracle& oracle, std::mt19937_64& rng);

  const std::map<BucketKey, Bucket>& buckets() const { return buckets_; }
  std::size_t size() const;

  std::string to_json() const;
  static RoutingTable from_json(const std::string& text, std::shared_ptr<const SystemProfile> profile);

 private:
  BucketKey make_key(int level, const NodeId& target) const;
  Bucket make_bucket(const BucketKey& key) const;
  Bucket* lookup_bucket(const BucketKey& key) const;
  void rebuild_index();

  NodeId owner_;
  std::shared_ptr<const SystemProfile> profile_;
  Scheme scheme_;
  std::vector<int> digits_by_distance_;  // 0 marks the quarter split
  std::map<BucketKey, Bucket> buckets_;
  std::vector<std::vector<std::pair<BucketKey, Bucket*>>> by_level_;
};

// Identifier with the first prefix_len bits of `prefix` and random remaining bits.
NodeId random_id_in(const NodeId& prefix, int prefix_len, std::mt19937_64& rng);

struct DiversityCdf {
  int max_degree = 0;
  // Per bucket fill count: cdf[m-1] = fraction of buckets with degree <= m.
  std::map<int, std::vector<double>> by_fill;
  std::map<int, int> bucket_count;
  std::vector<double> all;
  int total_buckets = 0;
};

// Degree CDF of the buckets whose prefix length equals `prefix_len`.
DiversityCdf diversity_cdf(std::span<const RoutingTable* const> tables, int prefix_len);

}  // namespace kadlab
