#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kadlab/lookup.hpp"
#include "kadlab/simulator.hpp"

using namespace kadlab;

namespace {

std::shared_ptr<const SystemProfile> shared(SystemProfile p) {
  return std::make_shared<const SystemProfile>(std::move(p));
}

// Forwards to a network but drops every query to a fixed set of nodes.
class LossyEnvironment final : public LookupEnvironment {
 public:
  LossyEnvironment(LookupEnvironment& inner, std::set<PeerHandle> silent)
      : inner_(inner), silent_(std::move(silent)) {}

  std::optional<std::vector<Contact>> query(const Contact& node, const NodeId& target, int beta) override {
    if (silent_.contains(node.peer)) return std::nullopt;
    return inner_.query(node, target, beta);
  }
  bool is_responsible(const NodeId& id, const NodeId& target) override {
    return inner_.is_responsible(id, target);
  }

 private:
  LookupEnvironment& inner_;
  std::set<PeerHandle> silent_;
};

bool same(const LookupResult& a, const LookupResult& b) {
  return a.target == b.target && a.hops == b.hops && a.rounds == b.rounds && a.queried == b.queried &&
         a.terminated_by == b.terminated_by;
}

}  // namespace

TEST_CASE("a target held in the origin's table is found in one hop") {
  for (const auto scheme : {Scheme::Standard, Scheme::DiversityMax}) {
    StaticNetwork net(shared(kad_profile()), 2000, scheme, 3);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
      const std::size_t origin = rng() % net.size();
      const auto contacts = net.table(origin).closest_contacts(NodeId::random(128, rng), 1);
      REQUIRE(contacts.size() == 1);
      for (const auto mode : {LookupMode::Strict, LookupMode::Loose}) {
        LookupConfig config;
        config.mode = mode;
        const auto r = lookup(net.table(origin), contacts.front().id, net, config);
        CHECK(r.hops == 1);
        CHECK(r.terminated_by == Termination::FoundResponsible);
      }
    }
  }
}

TEST_CASE("a lone node finishes in one hop without closer contacts") {
  StaticNetwork net(shared(mdht_profile()), 1, Scheme::Standard, 1);
  std::mt19937_64 rng(2);
  for (const auto mode : {LookupMode::Strict, LookupMode::Loose}) {
    LookupConfig config;
    config.mode = mode;
    const auto r = lookup(net.table(0), NodeId::random(160, rng), net, config);
    CHECK(r.hops == 1);
    CHECK(r.terminated_by == Termination::NoCloserContacts);
  }
}

TEST_CASE("strict lookups in a static network always reach the responsible node") {
  for (const auto& profile : {mdht_profile(), kad_profile()}) {
    StaticNetwork net(shared(profile), 3000, Scheme::Standard, 5);
    std::mt19937_64 rng(3);
    LookupConfig config;
    for (int i = 0; i < 300; ++i) {
      const std::size_t origin = rng() % net.size();
      const NodeId target = NodeId::random(profile.b, rng);
      if (net.responsible(target) == origin) continue;
      const auto r = lookup(net.table(origin), target, net, config);
      CHECK(r.hops >= 1);
      CHECK(r.hops <= profile.b);
      CHECK(r.terminated_by == Termination::FoundResponsible);
      CHECK(r.queried <= config.alpha * r.rounds);
    }
  }
}

TEST_CASE("the closest queried distance never grows from round to round") {
  StaticNetwork net(shared(kad_profile()), 3000, Scheme::DiversityMax, 9);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    std::ostringstream trace;
    LookupConfig config;
    config.trace = &trace;
    const NodeId target = NodeId::random(128, rng);
    const auto r = lookup(net.table(rng() % net.size()), target, net, config);
    std::istringstream lines(trace.str());
    std::string line;
    int rounds = 0;
    int previous = 129;
    while (std::getline(lines, line)) {
      const auto doc = nlohmann::json::parse(line);
      CHECK(doc.at("round").get<int>() == ++rounds);
      int closest = 129;
      for (const int d : doc.at("queried")) closest = std::min(closest, d);
      CHECK(closest <= previous);
      previous = closest;
      CHECK(doc.at("returned").is_array());
    }
    CHECK(rounds == r.rounds);
  }
}

TEST_CASE("lookups are deterministic") {
  std::mt19937_64 rng(5);
  StaticNetwork first(shared(mdht_profile()), 2000, Scheme::Standard, 77);
  StaticNetwork second(shared(mdht_profile()), 2000, Scheme::Standard, 77);
  for (int i = 0; i < 100; ++i) {
    const std::size_t origin = rng() % first.size();
    const NodeId target = NodeId::random(160, rng);
    for (const auto mode : {LookupMode::Strict, LookupMode::Loose}) {
      LookupConfig config;
      config.mode = mode;
      const auto a = lookup(first.table(origin), target, first, config);
      const auto b = lookup(second.table(origin), target, second, config);
      const auto c = lookup(first.table(origin), target, first, config);
      CHECK(same(a, b));
      CHECK(same(a, c));
    }
  }
}

TEST_CASE("loose lookups find the responsible node within the query budget") {
  StaticNetwork net(shared(kad_profile()), 3000, Scheme::Standard, 12);
  std::mt19937_64 rng(6);
  LookupConfig config;
  config.mode = LookupMode::Loose;
  for (int i = 0; i < 300; ++i) {
    const std::size_t origin = rng() % net.size();
    const NodeId target = NodeId::random(128, rng);
    if (net.responsible(target) == origin) continue;
    const auto r = lookup(net.table(origin), target, net, config);
    CHECK(r.terminated_by == Termination::FoundResponsible);
    CHECK(r.hops >= 1);
    CHECK(r.hops <= r.rounds);
  }
}

TEST_CASE("silent nodes do not stall a lookup") {
  StaticNetwork net(shared(kad_profile()), 2000, Scheme::Standard, 13);
  std::set<PeerHandle> silent;
  for (PeerHandle p = 0; p < net.size(); p += 3) silent.insert(p);
  LossyEnvironment env(net, silent);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    for (const auto mode : {LookupMode::Strict, LookupMode::Loose}) {
      LookupConfig config;
      config.mode = mode;
      const auto r = lookup(net.table(rng() % net.size()), NodeId::random(128, rng), env, config);
      CHECK(r.hops >= 1);
      CHECK(r.rounds <= 2 * 128);
    }
  }
}

TEST_CASE("the round limit ends a lookup with a timeout") {
  StaticNetwork net(shared(mdht_profile()), 5000, Scheme::Standard, 14);
  std::mt19937_64 rng(8);
  int timeouts = 0;
  for (int i = 0; i < 100; ++i) {
    LookupConfig config;
    config.max_rounds = 1;
    const auto r = lookup(net.table(rng() % net.size()), NodeId::random(160, rng), net, config);
    CHECK(r.rounds <= 1);
    if (r.terminated_by == Termination::Timeout) ++timeouts;
  }
  CHECK(timeouts > 0);
}

TEST_CASE("termination reasons have stable names") {
  CHECK(termination_name(Termination::FoundResponsible) == "found_responsible");
  CHECK(termination_name(Termination::NoCloserContacts) == "no_closer_contacts");
  CHECK(termination_name(Termination::Timeout) == "timeout");
}
