#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "kadlab/node_id.hpp"
#include "kadlab/routing_table.hpp"

namespace kadlab {

enum class LookupMode { Strict, Loose };
enum class Termination { FoundResponsible, NoCloserContacts, Timeout };

std::string_view termination_name(Termination t);

struct LookupResult {
  NodeId target;
  int hops = 0;     // query rounds, or path edges in loose mode
  int rounds = 0;   // query rounds in both modes
  int queried = 0;  // query messages sent
  Termination terminated_by = Termination::NoCloserContacts;
};

// What a lookup can observe about the rest of the network.
class LookupEnvironment {
 public:
  virtual ~LookupEnvironment() = default;
  // The beta contacts of `node` closest to target, or nothing if the node
  // does not answer.
  virtual std::optional<std::vector<Contact>> query(const Contact& node, const NodeId& target, int beta) = 0;
  virtual bool is_responsible(const NodeId& id, const NodeId& target) = 0;
};

struct LookupConfig {
  int alpha = 3;
  int beta = 2;
  LookupMode mode = LookupMode::Strict;
  int max_rounds = 0;  // 0 selects 2 b
  std::ostream* trace = nullptr;  // JSON lines, one per round
};

LookupResult lookup(const RoutingTable& origin, const NodeId& target, LookupEnvironment& env,
                    const LookupConfig& config);

}  // namespace kadlab
