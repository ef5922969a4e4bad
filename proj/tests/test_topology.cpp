#include "doctest.h"
#include "ftproxy/topology.hpp"

using namespace ftproxy;

namespace {
ServiceIdentity sid() {
  return derive_service_identity("svc", std::array<uint8_t, 32>{}, 1);
}
}  // namespace

TEST_CASE("flat tree yields one link per replica") {
  auto root = TopologyNode::robot({TopologyNode::replica("sim://a"), TopologyNode::replica("sim://b")});
  auto links = flatten_topology(*root, sid());
  REQUIRE(links.size() == 2);
  CHECK(links[0].endpoint == "sim://a");
  CHECK(links[1].endpoint == "sim://b");
  CHECK(links[0].link_state == LinkState::Connecting);
}

TEST_CASE("gateway subtree collapses to a single robot link") {
  auto root = TopologyNode::robot({TopologyNode::gateway(
      "sim://gw", {TopologyNode::replica("sim://a"), TopologyNode::replica("sim://b"),
                   TopologyNode::replica("sim://c")})});
  auto links = flatten_topology(*root, sid());
  REQUIRE(links.size() == 1);
  CHECK(links[0].endpoint == "sim://gw");
}

TEST_CASE("forwarding replica keeps its own subtree") {
  auto root = TopologyNode::robot(
      {TopologyNode::replica("sim://a", {TopologyNode::replica("sim://b")})});
  auto links = flatten_topology(*root, sid());
  REQUIRE(links.size() == 1);
  CHECK(links[0].endpoint == "sim://a");
}

TEST_CASE("malformed topologies are rejected") {
  CHECK_THROWS_AS(flatten_topology(*TopologyNode::replica("sim://a"), sid()), InvalidTopology);
  CHECK_THROWS_AS(flatten_topology(*TopologyNode::robot({}), sid()), InvalidTopology);
  CHECK_THROWS_AS(
      flatten_topology(*TopologyNode::robot({TopologyNode::gateway("sim://gw", {})}), sid()),
      InvalidTopology);
  CHECK_THROWS_AS(
      flatten_topology(*TopologyNode::robot({TopologyNode::robot({TopologyNode::replica("x")})}),
                       sid()),
      InvalidTopology);

  auto a = TopologyNode::gateway("sim://a", {});
  auto b = TopologyNode::gateway("sim://b", {a});
  a->children.push_back(b);  // cycle
  auto root = TopologyNode::robot({a});
  CHECK_THROWS_AS(flatten_topology(*root, sid()), InvalidTopology);
}
