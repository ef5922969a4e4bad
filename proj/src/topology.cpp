#include "ftproxy/topology.hpp"

#include <unordered_set>

namespace ftproxy {

const char* link_state_name(LinkState s) {
  switch (s) {
    case LinkState::Connecting: return "CONNECTING";
    case LinkState::Up: return "UP";
    case LinkState::Down: return "DOWN";
  }
  return "?";
}

std::shared_ptr<TopologyNode> TopologyNode::robot(
    std::vector<std::shared_ptr<TopologyNode>> children) {
  auto n = std::make_shared<TopologyNode>();
  n->kind = Kind::Robot;
  n->children = std::move(children);
  return n;
}

std::shared_ptr<TopologyNode> TopologyNode::gateway(
    std::string endpoint, std::vector<std::shared_ptr<TopologyNode>> children) {
  auto n = std::make_shared<TopologyNode>();
  n->kind = Kind::Gateway;
  n->endpoint = std::move(endpoint);
  n->children = std::move(children);
  return n;
}

std::shared_ptr<TopologyNode> TopologyNode::replica(
    std::string endpoint, std::vector<std::shared_ptr<TopologyNode>> children) {
  auto n = std::make_shared<TopologyNode>();
  n->kind = Kind::Replica;
  n->endpoint = std::move(endpoint);
  n->children = std::move(children);
  return n;
}

namespace {

void validate(const TopologyNode& node, bool is_root,
              std::unordered_set<const TopologyNode*>& on_path) {
  if (!on_path.insert(&node).second) throw InvalidTopology("topology contains a cycle");
  if (node.kind == TopologyNode::Kind::Robot && !is_root)
    throw InvalidTopology("ROBOT node below the root");
  if (node.kind != TopologyNode::Kind::Robot && is_root)
    throw InvalidTopology("root must be a ROBOT node");
  if (node.kind == TopologyNode::Kind::Gateway && node.children.empty())
    throw InvalidTopology("GATEWAY node '" + node.endpoint + "' has no children");
  if (node.kind == TopologyNode::Kind::Robot && node.children.empty())
    throw InvalidTopology("robot has no peers");
  if (node.children.empty() && node.kind != TopologyNode::Kind::Replica)
    throw InvalidTopology("every leaf must be a REPLICA");
  for (const auto& child : node.children) {
    if (!child) throw InvalidTopology("null child node");
    validate(*child, false, on_path);
  }
  on_path.erase(&node);
}

}  // namespace

std::vector<PeerLinkSpec> flatten_topology(const TopologyNode& root, const ServiceIdentity& sid) {
  std::unordered_set<const TopologyNode*> on_path;
  validate(root, true, on_path);

  std::vector<PeerLinkSpec> links;
  links.reserve(root.children.size());
  for (const auto& child : root.children)
    links.push_back(PeerLinkSpec{sid, child->endpoint, 0, LinkState::Connecting});
  return links;
}

}  // namespace ftproxy
