#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "kadlab/errors.hpp"
#include "kadlab/simulator.hpp"

namespace kadlab {

struct ChurnNetwork::Node {
  NodeId id;
  bool online = true;
  SimTime phase = 0.0;
  std::unique_ptr<RoutingTable> table;
  std::vector<PeerHandle> holders;
  std::set<BucketKey> dirty;
  bool refill_pending = false;
  std::mt19937_64 rng;
};

struct ChurnNetwork::Event {
  enum class Kind { Arrive, Depart, Detect, Refill };
  SimTime time = 0.0;
  std::uint64_t seq = 0;
  Kind kind = Kind::Arrive;
  PeerHandle a = kNoPeer;
  PeerHandle b = kNoPeer;

  bool operator>(const Event& other) const {
    return time != other.time ? time > other.time : seq > other.seq;
  }
};

struct ChurnNetwork::EventQueue {
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap;
  std::uint64_t next_seq = 0;

  void push(SimTime t, Event::Kind kind, PeerHandle a = kNoPeer, PeerHandle b = kNoPeer) {
    heap.push(Event{t, next_seq++, kind, a, b});
  }
};

ChurnNetwork::ChurnNetwork(std::shared_ptr<const SystemProfile> profile, std::int64_t n, Scheme scheme,
                           ChurnSpec spec, std::uint64_t seed)
    : profile_(std::move(profile)),
      target_size_(n),
      scheme_(scheme),
      spec_(spec),
      rng_(derive_seed(seed, 0)),
      events_(std::make_unique<EventQueue>()) {
  require(profile_ != nullptr, "network needs a profile");
  require(n >= 1, "network needs n >= 1");
  require(spec_.mean_session > 0.0 && spec_.mean_deadtime >= 0.0, "invalid churn timing");
  require(spec_.lifetime != LifetimeDistribution::Pareto || spec_.pareto_shape > 1.0,
          "Pareto shape must exceed 1");
  profile_->validate();

  for (std::int64_t i = 0; i < n; ++i) {
    auto node = std::make_unique<Node>();
    do {
      node->id = NodeId::random(profile_->b, rng_);
    } while (online_.contains(node->id));
    node->rng.seed(derive_seed(seed, nodes_.size() + 1));
    node->phase = std::uniform_real_distribution<double>(0.0, spec_.maintenance.population_period)(node->rng);
    node->table = std::make_unique<RoutingTable>(node->id, profile_, scheme_);
    online_.insert(node->id, nodes_.size());
    nodes_.push_back(std::move(node));
  }
  for (PeerHandle h = 0; h < nodes_.size(); ++h) {
    Node& node = *nodes_[h];
    for (const auto& key : node.table->keys_through(online_.deepest_level(node.id))) {
      const auto report = node.table->refill(key, 0.0, *this, node.rng);
      record_added(h, report.added);
    }
    events_->push(draw_session(), Event::Kind::Depart, h);
  }
  // Offline peers waiting to rejoin keep the online population near n.
  if (spec_.mean_deadtime > 0.0) {
    const auto offline = static_cast<std::int64_t>(std::llround(static_cast<double>(n) * spec_.mean_deadtime /
                                                                spec_.mean_session));
    for (std::int64_t i = 0; i < offline; ++i) events_->push(draw_deadtime(), Event::Kind::Arrive);
  }
}

ChurnNetwork::~ChurnNetwork() = default;

double ChurnNetwork::draw_session() {
  if (spec_.lifetime == LifetimeDistribution::Pareto) {
    const double shape = spec_.pareto_shape;
    const double scale = spec_.mean_session * (shape - 1.0) / shape;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    return scale * std::pow(1.0 - u, -1.0 / shape);
  }
  return std::exponential_distribution<double>(1.0 / spec_.mean_session)(rng_);
}

double ChurnNetwork::draw_deadtime() {
  if (spec_.mean_deadtime <= 0.0) return 0.0;
  return std::exponential_distribution<double>(1.0 / spec_.mean_deadtime)(rng_);
}

SimTime ChurnNetwork::next_tick(PeerHandle owner, SimTime t) const {
  const double period = spec_.maintenance.population_period;
  const double phase = nodes_[owner]->phase;
  return phase + period * std::ceil((t - phase) / period);
}

SimTime ChurnNetwork::detection_time(PeerHandle owner, Contact& c, SimTime departed) const {
  const auto& m = spec_.maintenance;
  const double long_period = m.probe_period * m.long_lived_multiplier;
  const double ticks_per_long = long_period / m.population_period;
  const bool aligned = std::abs(ticks_per_long - std::round(ticks_per_long)) < 1e-9;
  while (true) {
    SimTime t = next_tick(owner, c.last_verified + m.probe_period);
    if (t - c.first_seen >= long_period) t = next_tick(owner, c.last_verified + long_period);
    if (t >= departed) return t;
    c.last_verified = t;
    // Long-lived probes repeat on a fixed grid, so whole periods can be skipped.
    if (aligned && t - c.first_seen >= long_period) {
      const double skip = std::floor((departed - t) / long_period);
      if (skip >= 1.0) c.last_verified = t + (skip - 1.0) * long_period;
    }
  }
}

void ChurnNetwork::record_added(PeerHandle owner, const std::vector<Contact>& added) {
  for (const auto& c : added) nodes_[c.peer]->holders.push_back(owner);
}

void ChurnNetwork::join(SimTime t) {
  const PeerHandle h = nodes_.size();
  auto node = std::make_unique<Node>();
  do {
    node->id = NodeId::random(profile_->b, rng_);
  } while (online_.contains(node->id));
  node->rng.seed(derive_seed(rng_(), h));
  node->phase = std::uniform_real_distribution<double>(0.0, spec_.maintenance.population_period)(node->rng);
  node->table = std::make_unique<RoutingTable>(node->id, profile_, scheme_);
  online_.insert(node->id, h);
  nodes_.push_back(std::move(node));
  Node& self = *nodes_[h];
  ++counters_.joins;

  for (const auto& key : self.table->keys_through(online_.deepest_level(self.id))) {
    const auto report = self.table->refill(key, t, *this, self.rng);
    counters_.searches += report.searches;
    record_added(h, report.added);
  }

  // Nodes near the newcomer see its bootstrap lookup and offer it.
  Contact me;
  me.id = self.id;
  me.peer = h;
  me.first_seen = t;
  me.last_verified = t;
  const int notify = 2 * profile_->capacity(profile_->b);
  for (const auto i : online_.closest(self.id, notify + 1)) {
    const PeerHandle other = online_[i].handle;
    if (other == h) continue;
    const auto r = nodes_[other]->table->offer_contact(me);
    if (r.kind != OfferResult::Kind::Rejected) self.holders.push_back(other);
  }
  events_->push(t + draw_session(), Event::Kind::Depart, h);
}

void ChurnNetwork::depart(PeerHandle h) {
  Node& node = *nodes_[h];
  if (!node.online) return;
  node.online = false;
  online_.erase(node.id);
  ++counters_.departures;
  std::sort(node.holders.begin(), node.holders.end());
  node.holders.erase(std::unique(node.holders.begin(), node.holders.end()), node.holders.end());
  for (const auto owner : node.holders) {
    Node& other = *nodes_[owner];
    if (!other.online) continue;
    Contact* c = other.table->find(node.id);
    if (c == nullptr) continue;
    events_->push(detection_time(owner, *c, now_), Event::Kind::Detect, owner, h);
  }
  node.holders.clear();
  node.holders.shrink_to_fit();
  node.table.reset();
  node.dirty.clear();
  if (spec_.mean_deadtime > 0.0) {
    events_->push(now_ + draw_deadtime(), Event::Kind::Arrive);
  } else {
    events_->push(now_, Event::Kind::Arrive);
  }
}

void ChurnNetwork::detect(PeerHandle owner, PeerHandle gone) {
  Node& node = *nodes_[owner];
  if (!node.online) return;
  const NodeId& id = nodes_[gone]->id;
  if (!node.table->remove(id)) return;
  ++counters_.detections;
  const BucketKey key = node.table->key_for(id);
  if (scheme_ == Scheme::DiversityMax) {
    const auto report = node.table->refill(key, now_, *this, node.rng);
    ++counters_.refills;
    counters_.searches += report.searches;
    record_added(owner, report.added);
    return;
  }
  node.dirty.insert(key);
  if (!node.refill_pending) {
    node.refill_pending = true;
    events_->push(next_tick(owner, now_ + spec_.maintenance.population_period / 2), Event::Kind::Refill, owner);
  }
}

void ChurnNetwork::refill_dirty(PeerHandle owner) {
  Node& node = *nodes_[owner];
  node.refill_pending = false;
  if (!node.online) return;
  for (const auto& key : node.dirty) {
    if (node.table->bucket(key).full()) continue;
    const auto report = node.table->refill(key, now_, *this, node.rng);
    ++counters_.refills;
    counters_.searches += report.searches;
    record_added(owner, report.added);
  }
  node.dirty.clear();
}

void ChurnNetwork::advance_to(SimTime t) {
  while (!events_->heap.empty() && events_->heap.top().time <= t) {
    const Event e = events_->heap.top();
    events_->heap.pop();
    now_ = std::max(now_, e.time);
    switch (e.kind) {
      case Event::Kind::Arrive: join(now_); break;
      case Event::Kind::Depart: depart(e.a); break;
      case Event::Kind::Detect: detect(e.a, e.b); break;
      case Event::Kind::Refill: refill_dirty(e.a); break;
    }
  }
  now_ = std::max(now_, t);
}

PeerHandle ChurnNetwork::random_online(std::mt19937_64& rng) const {
  require(!online_.empty(), "no online nodes");
  const auto i = std::uniform_int_distribution<std::size_t>(0, online_.size() - 1)(rng);
  return online_[i].handle;
}

const RoutingTable& ChurnNetwork::table(PeerHandle node) const {
  require(node < nodes_.size() && nodes_[node]->table != nullptr, "node is not online");
  return *nodes_[node]->table;
}

bool ChurnNetwork::is_online(PeerHandle node) const { return node < nodes_.size() && nodes_[node]->online; }

std::vector<const RoutingTable*> ChurnNetwork::online_tables() const {
  std::vector<const RoutingTable*> out;
  for (std::size_t i = 0; i < online_.size(); ++i) out.push_back(nodes_[online_[i].handle]->table.get());
  return out;
}

std::optional<std::vector<Contact>> ChurnNetwork::query(const Contact& node, const NodeId& target, int beta) {
  if (!is_online(node.peer)) return std::nullopt;
  return nodes_[node.peer]->table->closest_contacts(target, beta);
}

bool ChurnNetwork::is_responsible(const NodeId& id, const NodeId& target) {
  if (online_.empty()) return false;
  return online_[online_.closest(target, 1).front()].id == id;
}

std::vector<Contact> ChurnNetwork::find_candidates(const NodeId& prefix, int prefix_len, const NodeId& target,
                                                   int count, const NodeId& exclude, SimTime now) {
  std::vector<Contact> out;
  for (const auto i : online_.closest(target, count + 1, prefix, prefix_len)) {
    if (online_[i].id == exclude || static_cast<int>(out.size()) == count) continue;
    Contact c;
    c.id = online_[i].id;
    c.peer = online_[i].handle;
    c.first_seen = now;
    c.last_verified = now;
    out.push_back(c);
  }
  return out;
}

bool ChurnNetwork::is_alive(const Contact& c) { return is_online(c.peer); }

int ChurnNetwork::deepest_level(const NodeId& owner) { return online_.deepest_level(owner); }

}  // namespace kadlab
