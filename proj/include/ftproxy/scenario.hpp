#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ftproxy/latency_model.hpp"
#include "ftproxy/pool.hpp"
#include "ftproxy/sim_net.hpp"

namespace ftproxy {

struct ReplicaSpec {
  std::string name;
  std::string provider = "sim";
  std::string region;
  ReplicaKind kind = ReplicaKind::Spot;
  double hourly_cost = 0;
  LatencyModel service_latency = LatencyModel::fixed(1);
  LatencyModel network_latency = LatencyModel::fixed(0);
};

struct ContentionSpec {
  std::string replica;
  double period_ms = 0;
  double service_ms = 0;
  TimeMs start_ms = 0;
  TimeMs end_ms = 0;  // 0 = whole run
};

struct PreemptionSpec {
  std::string replica;
  std::optional<TimeMs> at_ms;                  // scripted one-shot
  std::optional<double> mean_interval_ms;       // seeded renewal process
};

struct DiscoveryOutage {
  TimeMs start_ms = 0;
  TimeMs end_ms = 0;  // 0 = never restarted
};

struct WorkloadSpec {
  uint64_t requests = 0;
  double inter_arrival_ms = 100;
  uint64_t timeout_ms = 0;  // 0 = no deadline
  size_t payload_bytes = 64;
  TimeMs start_ms = 1'000;
};

enum class TopologyKind { Direct, Gateway };

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string what, std::vector<std::string> fields)
      : std::runtime_error(std::move(what)), fields(std::move(fields)) {}
  std::vector<std::string> fields;
};

// One fully deterministic experiment: topology + latency models + faults +
// workload, all derived from a single seed.
struct Scenario {
  int schema_version = 1;
  std::string name = "scenario";
  uint64_t seed = 1;
  std::string service_name = "service";
  uint32_t protocol_version = 1;
  TopologyKind topology = TopologyKind::Direct;
  LatencyModel gateway_hop = LatencyModel::fixed(0);
  std::vector<ReplicaSpec> replicas;
  WorkloadSpec workload;
  LatencyModel relaunch_delay = LatencyModel::fixed(1'200'000);
  TimeMs monitor_interval_ms = 1'000;
  std::vector<SlowdownWindow> regional_slowdown;
  std::vector<ContentionSpec> contention;
  std::vector<PreemptionSpec> preemption;
  std::vector<DiscoveryOutage> discovery_outage;

  ServiceIdentity service_id() const;
  const ReplicaSpec* replica_spec(const std::string& name) const;

  // Throws ScenarioError listing every offending field.
  void validate() const;

  static Scenario from_yaml_file(const std::string& path);
  static Scenario from_yaml_string(const std::string& text);
};

}  // namespace ftproxy
