#include "kadlab/lookup.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "kadlab/errors.hpp"

namespace kadlab {

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::FoundResponsible: return "found_responsible";
    case Termination::NoCloserContacts: return "no_closer_contacts";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

namespace {

void sort_by_distance(std::vector<Contact>& contacts, const NodeId& target) {
  std::sort(contacts.begin(), contacts.end(),
            [&](const Contact& a, const Contact& b) { return closer_to(target, a.id, b.id); });
}

void emit_trace(std::ostream* out, int round, const NodeId& target, const std::vector<Contact>& queried,
                const std::vector<Contact>& returned) {
  if (out == nullptr) return;
  nlohmann::json line;
  line["round"] = round;
  auto& q = line["queried"] = nlohmann::json::array();
  for (const auto& c : queried) q.push_back(bit_distance(c.id, target));
  auto& r = line["returned"] = nlohmann::json::array();
  for (const auto& c : returned) r.push_back(bit_distance(c.id, target));
  *out << line.dump() << '\n';
}

LookupResult strict_lookup(const RoutingTable& origin, const NodeId& target, LookupEnvironment& env,
                           const LookupConfig& config, int max_rounds) {
  LookupResult result;
  result.target = target;
  std::unordered_set<NodeId, NodeIdHash> queried{origin.owner()};
  std::vector<Contact> batch = origin.closest_contacts(target, config.alpha);
  std::optional<NodeId> best;

  while (true) {
    if (batch.empty()) {
      result.hops = std::max(result.rounds, 1);
      result.terminated_by = Termination::NoCloserContacts;
      return result;
    }
    if (result.rounds == max_rounds) {
      result.hops = result.rounds;
      result.terminated_by = Termination::Timeout;
      return result;
    }
    ++result.rounds;
    bool found = false;
    std::vector<Contact> returned;
    for (const auto& c : batch) {
      queried.insert(c.id);
      ++result.queried;
      if (!best || closer_to(target, c.id, *best)) best = c.id;
      if (env.is_responsible(c.id, target)) found = true;
      if (auto reply = env.query(c, target, config.beta)) {
        for (auto& r : *reply) returned.push_back(std::move(r));
      }
    }
    emit_trace(config.trace, result.rounds, target, batch, returned);
    if (found) {
      result.hops = result.rounds;
      result.terminated_by = Termination::FoundResponsible;
      return result;
    }
    std::vector<Contact> next;
    std::unordered_set<NodeId, NodeIdHash> seen;
    for (const auto& c : returned) {
      if (queried.contains(c.id) || !seen.insert(c.id).second) continue;
      next.push_back(c);
    }
    sort_by_distance(next, target);
    if (next.empty() || !closer_to(target, next.front().id, *best)) {
      result.hops = result.rounds;
      result.terminated_by = Termination::NoCloserContacts;
      return result;
    }
    if (static_cast<int>(next.size()) > config.alpha) next.resize(static_cast<std::size_t>(config.alpha));
    batch = std::move(next);
  }
}

// Replies are processed in issue order; each one frees a slot that is
// refilled with the closest unqueried candidate.
LookupResult loose_lookup(const RoutingTable& origin, const NodeId& target, LookupEnvironment& env,
                          const LookupConfig& config, int max_rounds) {
  LookupResult result;
  result.target = target;
  struct Pending {
    Contact contact;
    int depth;
  };
  std::vector<Pending> candidates;
  std::unordered_map<NodeId, int, NodeIdHash> depth_of;
  std::unordered_set<NodeId, NodeIdHash> queried{origin.owner()};
  std::deque<Pending> outstanding;
  std::optional<NodeId> best;
  const int budget = max_rounds * config.alpha;

  const auto add_candidate = [&](const Contact& c, int depth) {
    if (queried.contains(c.id)) return;
    auto [it, inserted] = depth_of.emplace(c.id, depth);
    if (!inserted) {
      it->second = std::min(it->second, depth);
      return;
    }
    candidates.push_back({c, depth});
  };
  const auto issue = [&]() {
    while (static_cast<int>(outstanding.size()) < config.alpha && !candidates.empty()) {
      auto it = std::min_element(candidates.begin(), candidates.end(), [&](const Pending& a, const Pending& b) {
        return closer_to(target, a.contact.id, b.contact.id);
      });
      if (best && !closer_to(target, it->contact.id, *best) && !outstanding.empty()) break;
      Pending p = *it;
      candidates.erase(it);
      p.depth = depth_of[p.contact.id];
      queried.insert(p.contact.id);
      ++result.queried;
      outstanding.push_back(p);
    }
  };

  for (const auto& c : origin.closest_contacts(target, config.alpha)) add_candidate(c, 1);
  issue();
  int max_depth = 0;
  while (!outstanding.empty()) {
    if (result.queried > budget) {
      result.hops = max_depth;
      result.rounds = max_depth;
      result.terminated_by = Termination::Timeout;
      return result;
    }
    const Pending p = outstanding.front();
    outstanding.pop_front();
    max_depth = std::max(max_depth, p.depth);
    if (!best || closer_to(target, p.contact.id, *best)) best = p.contact.id;
    if (env.is_responsible(p.contact.id, target)) {
      result.hops = p.depth;
      result.rounds = max_depth;
      result.terminated_by = Termination::FoundResponsible;
      return result;
    }
    if (auto reply = env.query(p.contact, target, config.beta)) {
      emit_trace(config.trace, p.depth, target, {p.contact}, *reply);
      for (const auto& r : *reply) add_candidate(r, p.depth + 1);
    }
    issue();
  }
  result.hops = std::max(max_depth, 1);
  result.rounds = result.hops;
  result.terminated_by = Termination::NoCloserContacts;
  return result;
}

}  // namespace

LookupResult lookup(const RoutingTable& origin, const NodeId& target, LookupEnvironment& env,
                    const LookupConfig& config) {
  require(config.alpha >= 1 && config.beta >= 1, "alpha and beta must be positive");
  require(target.width() == origin.owner().width(), "target width differs from the origin");
  const int max_rounds = config.max_rounds > 0 ? config.max_rounds : 2 * origin.profile().b;
  return config.mode == LookupMode::Strict ? strict_lookup(origin, target, env, config, max_rounds)
                                           : loose_lookup(origin, target, env, config, max_rounds);
}

}  // namespace kadlab
