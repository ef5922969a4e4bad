#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ftproxy/discovery.hpp"
#include "ftproxy/proxy.hpp"
#include "ftproxy/scenario.hpp"

namespace ftproxy {

struct RequestRecord {
  enum class Status { Ok, Timeout, Unavailable, ServiceError };

  RequestId request_id;
  TimeMs submit_ms = 0;
  TimeMs deliver_ms = 0;
  double latency_ms = 0;
  std::string winner = "-";
  Status status = Status::Ok;

  static const char* status_name(Status s);
};

struct RunReport {
  std::string scenario_name;
  uint64_t seed = 0;
  std::vector<RequestRecord> records;
  uint64_t submitted = 0;
  uint64_t delivered = 0;
  uint64_t timed_out = 0;
  uint64_t unavailable = 0;
  double mean_ms = 0;
  double p50_ms = 0;
  double p99_ms = 0;
  double success_rate = 0;
  double cost_usd = 0;
  std::vector<LifecycleEvent> pool_events;

  void finalize();  // aggregates from records (delivered latencies only)
  std::string aggregate_line() const;
};

// Builds and drives one scenario: discovery, pool-provisioned replicas,
// optional gateway, robot proxy, fault injection, and the open-loop workload,
// all on one virtual clock. Exposed so tests can intervene mid-run.
class SimCluster {
 public:
  explicit SimCluster(Scenario scenario);
  ~SimCluster();

  void run_until(TimeMs t) { loop_.run_until(t); }
  // Runs the workload to completion (plus drain) and finalizes the report.
  RunReport run_all();

  EventLoop& loop() { return loop_; }
  SimNetwork& net() { return net_; }
  RobotProxy& robot() { return *robot_; }
  PoolManager& pool() { return *pool_; }
  DiscoveryServer* discovery() { return discovery_.get(); }
  ReplicaServer* current_replica(const std::string& name);
  GatewayNode* gateway() { return gateway_.get(); }

  void kill_discovery();
  void restart_discovery();
  void preempt(const std::string& replica_name);
  void kill_replica_silently(const std::string& replica_name);

  // Snapshot of outcomes recorded so far (submission order).
  RunReport report_so_far() const;
  uint64_t outcomes_recorded() const { return resolved_; }

 private:
  void build();
  void monitor_loop();
  std::string provision(const ReplicaRecord& rec);
  void retire(const ReplicaRecord& rec);
  void schedule_workload();
  void schedule_faults();
  void schedule_renewal_preemption(const std::string& name, std::shared_ptr<StreamRng> rng,
                                   LatencyModel interval);
  void submit_one(uint64_t index);
  std::string winner_name(uint64_t replica_id) const;
  RunReport make_report() const;

  Scenario scenario_;
  EventLoop loop_;
  SimNetwork net_;
  std::unique_ptr<PoolManager> pool_;
  std::unique_ptr<DiscoveryServer> discovery_;
  SimHost* discovery_host_ = nullptr;
  std::vector<std::unique_ptr<DiscoveryServer>> dead_discovery_;
  std::unique_ptr<RobotProxy> robot_;
  SimHost* robot_host_ = nullptr;
  std::unique_ptr<GatewayNode> gateway_;
  std::vector<std::unique_ptr<ReplicaServer>> replicas_;
  std::unordered_map<std::string, ReplicaServer*> current_replica_;  // slot name -> live node
  std::unordered_map<std::string, std::string> slot_node_name_;      // slot name -> sim node name
  std::vector<RequestRecord> outcomes_;
  uint64_t resolved_ = 0;
  uint64_t submitted_ = 0;
};

RunReport run_scenario(const Scenario& scenario);

// Per-request CSV (header: request_id,submit_ms,deliver_ms,latency_ms,winner,status)
// plus one trailing aggregate comment line. Byte-stable for a fixed seed.
void emit_report(const RunReport& report, const std::string& csv_path);

// Empirical CDF of delivered latencies: "latency_ms,cum_fraction" rows.
void emit_cdf(const RunReport& report, const std::string& path);

// Pool lifecycle timeline: time_ms,replica_id,name,from,to,endpoint rows.
void emit_pool_events(const RunReport& report, const std::string& path);

}  // namespace ftproxy
