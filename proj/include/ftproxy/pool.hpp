#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ftproxy/envelope.hpp"
#include "ftproxy/latency_model.hpp"

namespace ftproxy {

enum class ReplicaKind { Spot, OnDemand };
enum class ReplicaState { Provisioning, Running, Preempted, Relaunching };

const char* replica_kind_name(ReplicaKind k);
const char* replica_state_name(ReplicaState s);

struct Placement {
  std::string provider;
  std::string region;
  ReplicaKind kind = ReplicaKind::Spot;
  double hourly_cost = 0;
  std::string name;  // optional slot name; auto-assigned when taken or empty
};

struct ReplicaRecord {
  uint64_t replica_id = 0;
  std::string name;  // stable slot name; keys latency streams across relaunches
  ServiceIdentity service_id;
  std::string provider;
  std::string region;
  ReplicaKind kind = ReplicaKind::Spot;
  ReplicaState state = ReplicaState::Provisioning;
  std::string endpoint;
  double hourly_cost = 0;
  TimeMs state_since = 0;
  TimeMs created_at = 0;
  int incarnation = 0;
  TimeMs due_at = 0;          // Provisioning/Relaunching: when the VM comes up
  double accrued_usd = 0;     // billed time already folded in
};

struct PoolConfig {
  int desired_replicas = 2;   // at least two replicas in distinct regions by default
  std::vector<Placement> placements;
  LatencyModel relaunch_delay = LatencyModel::fixed(1'200'000);  // 20 min bound
  TimeMs monitor_interval_ms = 1'000;
};

struct LifecycleEvent {
  TimeMs time = 0;
  uint64_t replica_id = 0;
  std::string name;
  ReplicaState from = ReplicaState::Provisioning;
  ReplicaState to = ReplicaState::Provisioning;
  std::string endpoint;

  std::string str() const;
};

// Replica lifecycle manager: keeps the pool converging on desired_replicas,
// reacts to preemptions (it never generates them — fault injection does),
// relaunches in the same placement slot with a fresh endpoint and the same
// ServiceIdentity, and accrues cost over billable (PROVISIONING + RUNNING)
// time. Single logical control loop; queries are read-only snapshots.
class PoolManager {
 public:
  // Returns the new endpoint once a replica (re)starts serving.
  using ProvisionFn = std::function<std::string(const ReplicaRecord&)>;
  // Tears down a running replica (scale-down victim or preemption side effect).
  using RetireFn = std::function<void(const ReplicaRecord&)>;
  // Fired after the peer set changed (relaunch completed, scale applied).
  using PoolChangeFn = std::function<void()>;

  PoolManager(PoolConfig cfg, ServiceIdentity service_id, uint64_t seed);

  void set_provision_fn(ProvisionFn fn) { provision_fn_ = std::move(fn); }
  void set_retire_fn(RetireFn fn) { retire_fn_ = std::move(fn); }
  void set_pool_change_fn(PoolChangeFn fn) { pool_change_fn_ = std::move(fn); }

  // Creates the initial desired_replicas records (PROVISIONING, due now).
  void bootstrap(TimeMs now);

  std::vector<LifecycleEvent> monitor_tick(TimeMs now);

  // Fault-injection entry: marks a RUNNING replica preempted and retires its
  // node. ON_DEMAND replicas are not preemptible.
  bool mark_preempted(uint64_t replica_id, TimeMs now);

  // UP provisions count new replicas (placements cycled); DOWN retires the
  // most expensive first (tie-break: youngest), never below one replica.
  int scale(bool up, int count, TimeMs now);

  double accrue_cost(TimeMs now) const;

  int desired_replicas() const { return desired_; }
  size_t running_count() const;
  std::vector<ReplicaRecord> snapshot() const { return records_; }
  const std::vector<LifecycleEvent>& event_log() const { return event_log_; }
  std::optional<std::string> name_of(uint64_t replica_id) const;

 private:
  ReplicaRecord& add_record(TimeMs now);
  void transition(ReplicaRecord& rec, ReplicaState to, TimeMs now, std::vector<LifecycleEvent>* out);
  void settle_billing(ReplicaRecord& rec, TimeMs now);
  bool billable(ReplicaState s) const {
    return s == ReplicaState::Provisioning || s == ReplicaState::Running;
  }

  PoolConfig cfg_;
  ServiceIdentity service_id_;
  StreamRng relaunch_rng_;
  int desired_ = 0;
  uint64_t next_replica_id_ = 1;
  size_t next_placement_ = 0;
  std::vector<ReplicaRecord> records_;
  std::vector<LifecycleEvent> event_log_;
  double retired_cost_ = 0;
  ProvisionFn provision_fn_;
  RetireFn retire_fn_;
  PoolChangeFn pool_change_fn_;
};

}  // namespace ftproxy
