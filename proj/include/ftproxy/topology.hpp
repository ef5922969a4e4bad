#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ftproxy/envelope.hpp"

namespace ftproxy {

enum class LinkState { Connecting, Up, Down };
const char* link_state_name(LinkState s);

// Proxy fabric tree: one ROBOT root, REPLICA leaves, GATEWAY (or a forwarding
// replica) in between. Children are shared_ptrs so malformed cyclic inputs can
// be represented — and rejected.
struct TopologyNode {
  enum class Kind { Robot, Gateway, Replica };

  Kind kind = Kind::Replica;
  std::string endpoint;
  std::vector<std::shared_ptr<TopologyNode>> children;

  static std::shared_ptr<TopologyNode> robot(std::vector<std::shared_ptr<TopologyNode>> children);
  static std::shared_ptr<TopologyNode> gateway(std::string endpoint,
                                               std::vector<std::shared_ptr<TopologyNode>> children);
  static std::shared_ptr<TopologyNode> replica(std::string endpoint,
                                               std::vector<std::shared_ptr<TopologyNode>> children = {});
};

class InvalidTopology : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PeerLinkSpec {
  ServiceIdentity service_id;
  std::string endpoint;
  uint64_t replica_id = 0;  // 0 until resolved via discovery
  LinkState link_state = LinkState::Connecting;
};

// The robot's direct-dial peer set: one link per direct child. Gateway (and
// forwarding-replica) children dial their own subtrees. Throws InvalidTopology
// on cycles, a non-robot root, nested robots, or childless gateways.
std::vector<PeerLinkSpec> flatten_topology(const TopologyNode& root, const ServiceIdentity& sid);

}  // namespace ftproxy
