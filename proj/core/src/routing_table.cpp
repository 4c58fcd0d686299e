#include "kadlab/routing_table.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

#include "kadlab/errors.hpp"

namespace kadlab {

Bucket::Bucket(const NodeId& prefix, int prefix_len, int capacity, int q)
    : prefix_(prefix.prefix(prefix_len)), prefix_len_(prefix_len), capacity_(capacity), q_(q) {
  require(capacity >= 1, "bucket capacity must be positive");
  require(q >= 0 && q <= 20 && prefix_len + q <= prefix.width(), "invalid bucket class width");
  class_counts_.assign(std::size_t{1} << q, 0);
}

bool Bucket::covers(const NodeId& id) const {
  return id.width() == prefix_.width() && common_prefix_length(id, prefix_) >= prefix_len_;
}

std::uint32_t Bucket::pattern_of(const NodeId& id) const {
  return q_ == 0 ? 0U : static_cast<std::uint32_t>(id.bits(prefix_len_, q_));
}

DiversityDegree Bucket::diversity() const { return {distinct_, 1 << q_}; }

int Bucket::class_count(std::uint32_t pattern) const { return class_counts_.at(pattern); }

const Contact* Bucket::find(const NodeId& id) const {
  const auto it = std::find_if(contacts_.begin(), contacts_.end(), [&](const Contact& c) { return c.id == id; });
  return it == contacts_.end() ? nullptr : &*it;
}

Contact* Bucket::find(const NodeId& id) {
  const auto it = std::find_if(contacts_.begin(), contacts_.end(), [&](const Contact& c) { return c.id == id; });
  return it == contacts_.end() ? nullptr : &*it;
}

void Bucket::insert(const Contact& c) {
  require(covers(c.id), "contact outside the bucket region");
  require(!full(), "bucket is full");
  require(find(c.id) == nullptr, "duplicate contact");
  contacts_.push_back(c);
  if (class_counts_[pattern_of(c.id)]++ == 0) ++distinct_;
}

std::optional<Contact> Bucket::erase(const NodeId& id) {
  const auto it = std::find_if(contacts_.begin(), contacts_.end(), [&](const Contact& c) { return c.id == id; });
  if (it == contacts_.end()) return std::nullopt;
  Contact out = *it;
  contacts_.erase(it);
  if (--class_counts_[pattern_of(out.id)] == 0) --distinct_;
  return out;
}

RoutingTable::RoutingTable(const NodeId& owner, std::shared_ptr<const SystemProfile> profile, Scheme scheme)
    : owner_(owner), profile_(std::move(profile)), scheme_(scheme) {
  require(profile_ != nullptr, "routing table needs a profile");
  require(owner_.width() == profile_->b, "owner width differs from the profile");
  const int b = profile_->b;
  digits_by_distance_.resize(static_cast<std::size_t>(b + 1), 0);
  for (int d = 1; d <= b; ++d) {
    if (profile_->layout(d) == BucketLayout::Uniform) {
      digits_by_distance_[static_cast<std::size_t>(d)] = profile_->levels(d).front().digits;
    }
  }
  by_level_.resize(static_cast<std::size_t>(b));
}

RoutingTable::RoutingTable(const RoutingTable& other)
    : owner_(other.owner_),
      profile_(other.profile_),
      scheme_(other.scheme_),
      digits_by_distance_(other.digits_by_distance_),
      buckets_(other.buckets_) {
  rebuild_index();
}

RoutingTable& RoutingTable::operator=(const RoutingTable& other) {
  if (this != &other) {
    RoutingTable copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void RoutingTable::rebuild_index() {
  by_level_.assign(static_cast<std::size_t>(profile_->b), {});
  for (auto& [key, bucket] : buckets_) by_level_[static_cast<std::size_t>(key.level)].push_back({key, &bucket});
}

Bucket* RoutingTable::lookup_bucket(const BucketKey& key) const {
  for (const auto& [k, bucket] : by_level_[static_cast<std::size_t>(key.level)]) {
    if (k.digits == key.digits && k.pattern == key.pattern) return bucket;
  }
  return nullptr;
}

BucketKey RoutingTable::make_key(int level, const NodeId& target) const {
  const int b = profile_->b;
  int digits = digits_by_distance_[static_cast<std::size_t>(b - level)];
  if (digits == 0) {
    const bool near = level + 2 < b && target.bit(level + 1) == owner_.bit(level + 1) &&
                      target.bit(level + 2) == owner_.bit(level + 2);
    digits = near ? 4 : 3;
  }
  digits = std::clamp(digits, 1, b - level);
  return {level, digits, static_cast<std::uint32_t>(target.bits(level, digits))};
}

BucketKey RoutingTable::key_for(const NodeId& target) const {
  require(target.width() == owner_.width(), "target width differs from the owner");
  const int level = common_prefix_length(owner_, target);
  require(level < profile_->b, "the owner has no bucket for itself");
  return make_key(level, target);
}

NodeId RoutingTable::key_prefix(const BucketKey& key) const {
  NodeId prefix = owner_.prefix(key.level);
  prefix.set_bits(key.level, key.digits, key.pattern);
  return prefix;
}

Bucket RoutingTable::make_bucket(const BucketKey& key) const {
  const int d = profile_->b - key.level;
  const int q = std::min(profile_->q(d), profile_->b - key.prefix_len());
  return Bucket(key_prefix(key), key.prefix_len(), profile_->capacity(d), q);
}

Bucket& RoutingTable::bucket(const BucketKey& key) {
  require(key.level >= 0 && key.level < profile_->b, "bucket level out of range");
  if (Bucket* found = lookup_bucket(key)) return *found;
  Bucket& created = buckets_.emplace(key, make_bucket(key)).first->second;
  by_level_[static_cast<std::size_t>(key.level)].push_back({key, &created});
  return created;
}

Bucket& RoutingTable::bucket_for(const NodeId& target) { return bucket(key_for(target)); }

const Bucket* RoutingTable::find_bucket(const NodeId& target) const {
  return lookup_bucket(key_for(target));
}

std::vector<BucketKey> RoutingTable::keys_through(int max_level) const {
  std::vector<BucketKey> keys;
  const int b = profile_->b;
  for (int level = 0; level <= std::min(max_level, b - 1); ++level) {
    NodeId probe = owner_;
    probe.set_bit(level, !owner_.bit(level));
    const int span = std::min(4, b - level);
    std::vector<BucketKey> seen;
    for (std::uint64_t tail = 0; tail < (std::uint64_t{1} << (span - 1)); ++tail) {
      NodeId t = probe;
      if (span > 1) t.set_bits(level + 1, span - 1, tail);
      const BucketKey key = make_key(level, t);
      if (std::find(seen.begin(), seen.end(), key) == seen.end()) seen.push_back(key);
    }
    keys.insert(keys.end(), seen.begin(), seen.end());
  }
  return keys;
}

const Contact* RoutingTable::find(const NodeId& id) const {
  if (id == owner_) return nullptr;
  const Bucket* bucket = find_bucket(id);
  return bucket == nullptr ? nullptr : bucket->find(id);
}

Contact* RoutingTable::find(const NodeId& id) {
  if (id == owner_) return nullptr;
  Bucket* bucket = lookup_bucket(key_for(id));
  return bucket == nullptr ? nullptr : bucket->find(id);
}

std::optional<Contact> RoutingTable::remove(const NodeId& id) {
  if (id == owner_) return std::nullopt;
  Bucket* bucket = lookup_bucket(key_for(id));
  return bucket == nullptr ? std::nullopt : bucket->erase(id);
}

namespace {

const Contact* oldest_stale(const Bucket& bucket) {
  const Contact* best = nullptr;
  for (const auto& c : bucket.contacts()) {
    if (c.stale && (best == nullptr || c.last_verified < best->last_verified)) best = &c;
  }
  return best;
}

// A member of the most represented class (lowest pattern on ties), stale
// first, then the most recently seen.
const Contact* diversity_victim(const Bucket& bucket) {
  std::uint32_t crowded = 0;
  int most = -1;
  for (const auto& c : bucket.contacts()) {
    const auto pattern = bucket.pattern_of(c.id);
    const int count = bucket.class_count(pattern);
    if (count > most || (count == most && pattern < crowded)) {
      most = count;
      crowded = pattern;
    }
  }
  const Contact* best = nullptr;
  for (const auto& c : bucket.contacts()) {
    if (bucket.pattern_of(c.id) != crowded) continue;
    if (best == nullptr || (c.stale && !best->stale) ||
        (c.stale == best->stale && c.first_seen > best->first_seen)) {
      best = &c;
    }
  }
  return best;
}

}  // namespace

OfferResult RoutingTable::offer_contact(const Contact& c) {
  if (c.id == owner_) return {};
  Bucket& target = bucket_for(c.id);
  if (Contact* existing = target.find(c.id)) {
    existing->last_verified = std::max(existing->last_verified, c.last_verified);
    existing->stale = false;
    return {};
  }
  if (!target.full()) {
    target.insert(c);
    return {OfferResult::Kind::Inserted, std::nullopt};
  }
  const Contact* victim = nullptr;
  if (scheme_ == Scheme::DiversityMax) {
    const auto pattern = target.pattern_of(c.id);
    if (target.class_count(pattern) == 0) {
      victim = diversity_victim(target);
      if (victim != nullptr && target.class_count(target.pattern_of(victim->id)) < 2) victim = nullptr;
    } else if (const Contact* stale = oldest_stale(target);
               stale != nullptr &&
               (target.pattern_of(stale->id) == pattern || target.class_count(target.pattern_of(stale->id)) > 1)) {
      victim = stale;
    }
  } else {
    victim = oldest_stale(target);
  }
  if (victim == nullptr) return {};
  auto evicted = target.erase(victim->id);
  target.insert(c);
  return {OfferResult::Kind::Replaced, evicted};
}

std::vector<Contact> RoutingTable::closest_contacts(const NodeId& target, int gamma) const {
  std::vector<Contact> all;
  for (const auto& [key, bucket] : buckets_) {
    for (const auto& c : bucket.contacts()) {
      if (!c.stale) all.push_back(c);
    }
  }
  const auto count = std::min<std::size_t>(all.size(), static_cast<std::size_t>(std::max(gamma, 0)));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count), all.end(),
                    [&](const Contact& a, const Contact& b) { return closer_to(target, a.id, b.id); });
  all.resize(count);
  return all;
}

std::size_t RoutingTable::size() const {
  std::size_t total = 0;
  for (const auto& [key, bucket] : buckets_) total += bucket.size();
  return total;
}

NodeId random_id_in(const NodeId& prefix, int prefix_len, std::mt19937_64& rng) {
  NodeId id = NodeId::random(prefix.width(), rng);
  for (int pos = 0; pos < prefix_len; pos += 64) {
    const int count = std::min(64, prefix_len - pos);
    id.set_bits(pos, count, prefix.bits(pos, count));
  }
  return id;
}

MaintenanceReport RoutingTable::refill(const BucketKey& key, SimTime now, PeerOracle& oracle,
                                       std::mt19937_64& rng) {
  MaintenanceReport report;
  Bucket& target = bucket(key);
  const auto offer = [&](const Contact& found) {
    Contact c = found;
    c.first_seen = now;
    c.last_verified = now;
    c.stale = false;
    const auto r = offer_contact(c);
    if (r.kind != OfferResult::Kind::Rejected) {
      ++report.inserted;
      report.added.push_back(c);
    }
    if (r.evicted) ++report.evicted;
  };

  if (scheme_ == Scheme::DiversityMax && target.q() > 0) {
    std::vector<std::uint32_t> missing;
    for (std::uint32_t p = 0; p < (1U << target.q()); ++p) {
      if (target.class_count(p) == 0) missing.push_back(p);
    }
    std::shuffle(missing.begin(), missing.end(), rng);
    for (const auto pattern : missing) {
      NodeId cls = target.prefix();
      cls.set_bits(target.prefix_len(), target.q(), pattern);
      const int cls_len = target.prefix_len() + target.q();
      const NodeId aim = random_id_in(cls, cls_len, rng);
      ++report.searches;
      const auto found = oracle.find_candidates(cls, cls_len, aim, 1, owner_, now);
      if (!found.empty()) offer(found.front());
    }
  }
  if (!target.full()) {
    const NodeId aim = random_id_in(target.prefix(), target.prefix_len(), rng);
    ++report.searches;
    auto found = oracle.find_candidates(target.prefix(), target.prefix_len(), aim, target.capacity(), owner_, now);
    if (scheme_ == Scheme::DiversityMax) {
      std::stable_partition(found.begin(), found.end(),
                            [&](const Contact& c) { return target.class_count(target.pattern_of(c.id)) == 0; });
    }
    for (const auto& c : found) {
      if (target.full()) break;
      offer(c);
    }
  }
  return report;
}

MaintenanceReport RoutingTable::maintenance_tick(SimTime now, PeerOracle* oracle, const MaintenanceConfig& config,
                                                 std::mt19937_64& rng) {
  MaintenanceReport report;
  if (oracle == nullptr || !oracle->available()) return report;
  const auto merge = [&](const MaintenanceReport& r) {
    report.inserted += r.inserted;
    report.evicted += r.evicted;
    report.probed += r.probed;
    report.searches += r.searches;
    report.added.insert(report.added.end(), r.added.begin(), r.added.end());
  };

  const int deepest = oracle->deepest_level(owner_);
  for (const auto& key : keys_through(deepest)) {
    if (!bucket(key).full()) merge(refill(key, now, *oracle, rng));
  }

  std::vector<BucketKey> emptied;
  for (auto& [key, bucket] : buckets_) {
    std::vector<NodeId> dead;
    std::vector<NodeId> due;
    for (const auto& c : bucket.contacts()) {
      if (now - c.last_verified >= config.probe_interval(now - c.first_seen)) due.push_back(c.id);
    }
    for (const auto& id : due) {
      Contact* c = bucket.find(id);
      ++report.probed;
      if (oracle->is_alive(*c)) {
        c->last_verified = now;
      } else {
        c->stale = true;
        dead.push_back(id);
      }
    }
    for (const auto& id : dead) {
      bucket.erase(id);
      ++report.evicted;
    }
    if (!dead.empty()) emptied.push_back(key);
  }
  if (scheme_ == Scheme::DiversityMax) {
    for (const auto& key : emptied) merge(refill(key, now, *oracle, rng));
  }
  return report;
}

std::string RoutingTable::to_json() const {
  nlohmann::json doc;
  doc["owner"] = owner_.to_hex();
  doc["profile"] = profile_->name;
  doc["scheme"] = std::string(scheme_name(scheme_));
  auto& list = doc["buckets"] = nlohmann::json::array();
  for (const auto& [key, bucket] : buckets_) {
    nlohmann::json entry;
    entry["level"] = key.level;
    entry["digits"] = key.digits;
    entry["pattern"] = key.pattern;
    entry["prefix"] = bucket.prefix().to_bits().substr(0, static_cast<std::size_t>(bucket.prefix_len()));
    entry["capacity"] = bucket.capacity();
    entry["q"] = bucket.q();
    entry["diversity_degree"] = bucket.diversity().value;
    auto& contacts = entry["contacts"] = nlohmann::json::array();
    for (const auto& c : bucket.contacts()) {
      contacts.push_back({{"id", c.id.to_hex()},
                          {"first_seen", c.first_seen},
                          {"last_verified", c.last_verified},
                          {"stale", c.stale}});
    }
    list.push_back(std::move(entry));
  }
  return doc.dump();
}

RoutingTable RoutingTable::from_json(const std::string& text, std::shared_ptr<const SystemProfile> profile) {
  const auto doc = nlohmann::json::parse(text);
  const int b = profile->b;
  RoutingTable table(NodeId::from_hex(doc.at("owner").get<std::string>(), b), std::move(profile),
                     parse_scheme(doc.at("scheme").get<std::string>()));
  for (const auto& entry : doc.at("buckets")) {
    const BucketKey key{entry.at("level").get<int>(), entry.at("digits").get<int>(),
                        entry.at("pattern").get<std::uint32_t>()};
    Bucket& bucket = table.bucket(key);
    for (const auto& c : entry.at("contacts")) {
      Contact contact;
      contact.id = NodeId::from_hex(c.at("id").get<std::string>(), b);
      contact.first_seen = c.value("first_seen", 0.0);
      contact.last_verified = c.value("last_verified", 0.0);
      contact.stale = c.value("stale", false);
      bucket.insert(contact);
    }
  }
  return table;
}

DiversityCdf diversity_cdf(std::span<const RoutingTable* const> tables, int prefix_len) {
  DiversityCdf out;
  std::map<int, std::vector<int>> histograms;
  std::vector<int> overall;
  for (const RoutingTable* table : tables) {
    for (const auto& [key, bucket] : table->buckets()) {
      if (bucket.prefix_len() != prefix_len || bucket.size() == 0) continue;
      const auto degree = bucket.diversity();
      out.max_degree = std::max(out.max_degree, degree.max_value);
      auto& h = histograms[static_cast<int>(bucket.size())];
      if (static_cast<int>(h.size()) < degree.max_value) h.resize(static_cast<std::size_t>(degree.max_value), 0);
      if (static_cast<int>(overall.size()) < degree.max_value) {
        overall.resize(static_cast<std::size_t>(degree.max_value), 0);
      }
      ++h[static_cast<std::size_t>(degree.value - 1)];
      ++overall[static_cast<std::size_t>(degree.value - 1)];
      ++out.total_buckets;
    }
  }
  const auto to_cdf = [&](std::vector<int> h) {
    h.resize(static_cast<std::size_t>(out.max_degree), 0);
    const double total = std::accumulate(h.begin(), h.end(), 0.0);
    std::vector<double> cdf(h.size(), 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      running += h[i];
      cdf[i] = total > 0.0 ? running / total : 0.0;
    }
    return cdf;
  };
  for (const auto& [fill, h] : histograms) {
    out.bucket_count[fill] = std::accumulate(h.begin(), h.end(), 0);
    out.by_fill[fill] = to_cdf(h);
  }
  out.all = to_cdf(overall);
  return out;
}

}  // namespace kadlab
