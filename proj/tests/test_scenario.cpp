#include "doctest.h"
#include "ftproxy/scenario.hpp"

using namespace ftproxy;

namespace {
const char* kMinimal = R"(
schema_version: 1
name: mini
seed: 7
service: objdet
topology: direct
replicas:
  - {name: a, region: us-west-1, kind: spot, hourly_cost: 0.17,
     service_latency: {kind: exponential, mean_ms: 40}}
  - {name: b, region: us-west-2, kind: spot, hourly_cost: 0.17,
     service_latency: {kind: lognormal, mu_ln: 3.0, sigma_ln: 0.4},
     network_latency: {kind: fixed, value_ms: 2}}
workload: {requests: 10, inter_arrival_ms: 100, timeout_ms: 1000}
)";
}  // namespace

TEST_CASE("scenario parses models, workload, and faults") {
  auto s = Scenario::from_yaml_string(kMinimal);
  CHECK(s.name == "mini");
  CHECK(s.seed == 7);
  REQUIRE(s.replicas.size() == 2);
  CHECK(s.replicas[0].service_latency.kind == LatencyModel::Kind::Exponential);
  CHECK(s.replicas[1].network_latency.mean_ms == 2);
  CHECK(s.workload.timeout_ms == 1000);
  CHECK(s.topology == TopologyKind::Direct);
  CHECK(s.service_id() == derive_service_identity("objdet", std::array<uint8_t, 32>{}, 1));
}

TEST_CASE("faults sections parse") {
  std::string text = std::string(kMinimal) + R"(
faults:
  regional_slowdown:
    - {region: us-west-1, added_latency_ms: 100, start_ms: 0, end_ms: 50000}
  contention:
    - {replica: a, period_ms: 200, service_ms: 80}
  preemption:
    - {replica: b, at_ms: 3000}
  discovery_outage:
    - {start_ms: 1000, end_ms: 2000}
)";
  auto s = Scenario::from_yaml_string(text);
  REQUIRE(s.regional_slowdown.size() == 1);
  CHECK(s.regional_slowdown[0].added_latency_ms == 100);
  REQUIRE(s.contention.size() == 1);
  CHECK(s.contention[0].replica == "a");
  REQUIRE(s.preemption.size() == 1);
  CHECK(s.preemption[0].at_ms == 3000.0);
  REQUIRE(s.discovery_outage.size() == 1);
}

TEST_CASE("validation lists every offending field") {
  std::string text = R"(
schema_version: 3
name: broken
replicas:
  - {name: a}
  - {name: a}
workload: {requests: 5, inter_arrival_ms: -1}
faults:
  regional_slowdown:
    - {region: '', added_latency_ms: -5, start_ms: 10, end_ms: 5}
  contention:
    - {replica: nope, period_ms: 0, service_ms: 0}
)";
  try {
    Scenario::from_yaml_string(text);
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.fields.size() >= 7);
    std::string what = e.what();
    CHECK(what.find("schema_version") != std::string::npos);
    CHECK(what.find("duplicate name") != std::string::npos);
    CHECK(what.find("inter_arrival_ms") != std::string::npos);
    CHECK(what.find("unknown replica") != std::string::npos);
  }
}

TEST_CASE("empty replica list is invalid") {
  CHECK_THROWS_AS(Scenario::from_yaml_string("schema_version: 1\nreplicas: []\n"), ScenarioError);
}

TEST_CASE("bundled scenarios parse and validate") {
  for (const char* name :
       {"stochastic-planner", "regional-slowdown", "contention", "preemption-timeline"}) {
    auto s = Scenario::from_yaml_file(std::string(FTPROXY_SCENARIO_DIR) + "/" + name + ".yaml");
    CHECK(s.name == name);
    CHECK(!s.replicas.empty());
  }
}
