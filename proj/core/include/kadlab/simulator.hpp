#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kadlab/id_index.hpp"
#include "kadlab/lookup.hpp"
#include "kadlab/profile.hpp"
#include "kadlab/routing_table.hpp"

namespace kadlab {

// Deterministic child seed for a stream of a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Steady-state network without churn. Tables are built on first use, each
// from its own seed, so results do not depend on access order.
class StaticNetwork final : public LookupEnvironment {
 public:
  StaticNetwork(std::shared_ptr<const SystemProfile> profile, std::int64_t n, Scheme scheme, std::uint64_t seed);

  const SystemProfile& profile() const { return *profile_; }
  Scheme scheme() const { return scheme_; }
  std::size_t size() const { return index_.size(); }
  const NodeId& id(std::size_t node) const { return index_[node].id; }
  const RoutingTable& table(std::size_t node);
  std::size_t responsible(const NodeId& target) const;

  std::optional<std::vector<Contact>> query(const Contact& node, const NodeId& target, int beta) override;
  bool is_responsible(const NodeId& id, const NodeId& target) override;

 private:
  RoutingTable build_table(std::size_t node) const;

  std::shared_ptr<const SystemProfile> profile_;
  Scheme scheme_;
  std::uint64_t seed_;
  IdIndex index_;
  std::vector<std::unique_ptr<RoutingTable>> tables_;
  std::optional<std::pair<NodeId, std::size_t>> last_responsible_;
};

enum class LifetimeDistribution { Exponential, Pareto };

struct ChurnSpec {
  bool enabled = false;
  double mean_session = 20000.0;
  double mean_deadtime = 20000.0;
  LifetimeDistribution lifetime = LifetimeDistribution::Exponential;
  double pareto_shape = 2.0;
  double warmup_sessions = 2.0;
  double lookup_spacing = 10.0;  // simulated seconds between measured lookups
  MaintenanceConfig maintenance;
};

struct ChurnCounters {
  std::int64_t joins = 0;
  std::int64_t departures = 0;
  std::int64_t detections = 0;
  std::int64_t refills = 0;
  std::int64_t searches = 0;
};

// Event-driven network with session churn and periodic table maintenance.
class ChurnNetwork final : public LookupEnvironment, public PeerOracle {
 public:
  ChurnNetwork(std::shared_ptr<const SystemProfile> profile, std::int64_t n, Scheme scheme, ChurnSpec spec,
               std::uint64_t seed);
  ~ChurnNetwork() override;
  ChurnNetwork(const ChurnNetwork&) = delete;
  ChurnNetwork& operator=(const ChurnNetwork&) = delete;

  SimTime now() const { return now_; }
  // Processes every event up to and including time t.
  void advance_to(SimTime t);
  std::size_t online_count() const { return online_.size(); }
  // Handle of a uniformly chosen online node.
  PeerHandle random_online(std::mt19937_64& rng) const;
  const RoutingTable& table(PeerHandle node) const;
  bool is_online(PeerHandle node) const;
  std::vector<const RoutingTable*> online_tables() const;
  const ChurnCounters& counters() const { return counters_; }

  std::optional<std::vector<Contact>> query(const Contact& node, const NodeId& target, int beta) override;
  bool is_responsible(const NodeId& id, const NodeId& target) override;

  std::vector<Contact> find_candidates(const NodeId& prefix, int prefix_len, const NodeId& target, int count,
                                       const NodeId& exclude, SimTime now) override;
  bool is_alive(const Contact& c) override;
  int deepest_level(const NodeId& owner) override;

 private:
  struct Node;
  struct Event;
  struct EventQueue;

  double draw_session();
  double draw_deadtime();
  void join(SimTime t);
  void depart(PeerHandle node);
  void detect(PeerHandle owner, PeerHandle gone);
  void refill_dirty(PeerHandle owner);
  void record_added(PeerHandle owner, const std::vector<Contact>& added);
  SimTime next_tick(PeerHandle owner, SimTime t) const;
  SimTime detection_time(PeerHandle owner, Contact& c, SimTime departed) const;

  std::shared_ptr<const SystemProfile> profile_;
  std::int64_t target_size_;
  Scheme scheme_;
  ChurnSpec spec_;
  std::mt19937_64 rng_;
  SimTime now_ = 0.0;
  IdIndex online_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::unique_ptr<EventQueue> events_;
  ChurnCounters counters_;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<int> hops;
  double mean = 0.0;
  bool aborted = false;
  std::map<Termination, int> terminations;
  std::vector<double> degree_cdf;  // top-level full buckets, index m-1
  double mean_degree = 0.0;
  int degree_buckets = 0;
};

struct ExperimentReport {
  std::string profile;
  Scheme scheme = Scheme::Standard;
  std::int64_t n = 0;
  ChurnSpec churn;
  std::vector<RunResult> runs;
  double mean = 0.0;
  double ci95 = 0.0;   // Student t half-width over run means
  double median = 0.0; // median of run means
  std::vector<double> cdf;  // cdf[h-1] over pooled samples
  double mean_degree = 0.0;
  std::vector<double> degree_cdf;
};

struct ExperimentConfig {
  std::int64_t n = 10000;
  ChurnSpec churn;
  int lookups = 500;
  int runs = 10;
  std::uint64_t seed = 42;  // run r uses seed + r
  LookupMode mode = LookupMode::Strict;
  int threads = 0;          // 0 reads KADLAB_THREADS, default hardware concurrency
};

RunResult run_once(const SystemProfile& profile, Scheme scheme, const ExperimentConfig& config, std::uint64_t seed);
ExperimentReport run_experiment(const SystemProfile& profile, Scheme scheme, const ExperimentConfig& config);

struct Gain {
  double conservative = 0.0;  // ((std - ci) - (div + ci)) / (std - ci), percent
  double point = 0.0;         // (std - div) / std, percent
  double min = 0.0;           // over paired runs, percent
  double max = 0.0;
};

struct ComparisonReport {
  ExperimentReport standard;
  ExperimentReport diverse;
  Gain gain;
};

Gain hop_gain(const ExperimentReport& standard, const ExperimentReport& diverse);
ComparisonReport compare_schemes(const SystemProfile& profile, const ExperimentConfig& config);

// Summary statistics over run means.
double student_t_halfwidth(const std::vector<double>& values, double confidence = 0.95);
double median_of(std::vector<double> values);
std::vector<double> hop_cdf(const std::vector<int>& hops);

int worker_count(int requested);

}  // namespace kadlab
