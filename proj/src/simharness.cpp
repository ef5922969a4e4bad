#include "ftproxy/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace ftproxy {

const char* RequestRecord::status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::Timeout: return "timeout";
    case Status::Unavailable: return "unavailable";
    case Status::ServiceError: return "service_error";
  }
  return "?";
}

void RunReport::finalize() {
  submitted = records.size();
  delivered = timed_out = unavailable = 0;
  std::vector<double> latencies;
  latencies.reserve(records.size());
  for (const auto& r : records) {
    switch (r.status) {
      case RequestRecord::Status::Ok:
      case RequestRecord::Status::ServiceError:
        ++delivered;
        latencies.push_back(r.latency_ms);
        break;
      case RequestRecord::Status::Timeout:
        ++timed_out;
        break;
      case RequestRecord::Status::Unavailable:
        ++unavailable;
        break;
    }
  }
  if (!latencies.empty()) {
    double sum = 0;
    for (double v : latencies) sum += v;
    mean_ms = sum / static_cast<double>(latencies.size());
    p50_ms = percentile(latencies, 0.5);
    p99_ms = percentile(latencies, 0.99);
  } else {
    mean_ms = p50_ms = p99_ms = 0;
  }
  success_rate = submitted == 0 ? 0 : static_cast<double>(delivered) / static_cast<double>(submitted);
}

std::string RunReport::aggregate_line() const {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "# aggregate requests=%llu delivered=%llu timeouts=%llu unavailable=%llu "
                "mean_ms=%.3f p50_ms=%.3f p99_ms=%.3f success_rate=%.6f cost_usd=%.6f",
                static_cast<unsigned long long>(submitted),
                static_cast<unsigned long long>(delivered),
                static_cast<unsigned long long>(timed_out),
                static_cast<unsigned long long>(unavailable), mean_ms, p50_ms, p99_ms,
                success_rate, cost_usd);
  return buf;
}

SimCluster::SimCluster(Scenario scenario)
    : scenario_(std::move(scenario)), net_(loop_, scenario_.seed) {
  scenario_.validate();
  build();
}

SimCluster::~SimCluster() = default;

void SimCluster::build() {
  // Per-replica data-link latency models, keyed by slot name so a relaunched
  // incarnation keeps its stream.
  for (const auto& spec : scenario_.replicas)
    net_.set_link_model(spec.name, spec.network_latency);
  if (scenario_.topology == TopologyKind::Gateway)
    net_.set_link_model("gateway", scenario_.gateway_hop);
  for (const auto& w : scenario_.regional_slowdown) net_.add_slowdown(w);

  discovery_host_ = net_.add_node("discovery");
  discovery_.reset(new DiscoveryServer(*discovery_host_));
  discovery_->start();

  PoolConfig pool_cfg;
  pool_cfg.desired_replicas = static_cast<int>(scenario_.replicas.size());
  for (const auto& spec : scenario_.replicas)
    pool_cfg.placements.push_back(
        Placement{spec.provider, spec.region, spec.kind, spec.hourly_cost, spec.name});
  pool_cfg.relaunch_delay = scenario_.relaunch_delay;
  pool_cfg.monitor_interval_ms = scenario_.monitor_interval_ms;
  pool_ = std::make_unique<PoolManager>(pool_cfg, scenario_.service_id(), scenario_.seed);
  pool_->set_provision_fn([this](const ReplicaRecord& rec) { return provision(rec); });
  pool_->set_retire_fn([this](const ReplicaRecord& rec) { retire(rec); });
  pool_->set_pool_change_fn([this] {
    if (robot_) robot_->refresh_peers();
    if (gateway_) gateway_->children().refresh_peers();
  });
  pool_->bootstrap(0);
  pool_->monitor_tick(0);
  loop_.schedule_at(scenario_.monitor_interval_ms, [this] { monitor_loop(); });

  if (scenario_.topology == TopologyKind::Gateway) {
    SimHost* gw_host = net_.add_node("gateway");
    FanoutCore::Config children;
    children.service_id = scenario_.service_id();
    children.discovery_endpoint = discovery_host_->endpoint();
    gateway_.reset(new GatewayNode(*gw_host, children));
    gateway_->start();
  }

  robot_host_ = net_.add_node("robot");
  FanoutCore::Config robot_cfg;
  robot_cfg.service_id = scenario_.service_id();
  if (scenario_.topology == TopologyKind::Gateway)
    robot_cfg.static_endpoints = {"sim://gateway"};
  else
    robot_cfg.discovery_endpoint = discovery_host_->endpoint();
  uint64_t guid = derive_seed(scenario_.seed, "robot/guid");
  robot_cfg.sender_tag = guid;
  robot_.reset(new RobotProxy(*robot_host_, robot_cfg, guid));
  robot_->start();

  schedule_workload();
  schedule_faults();
}

void SimCluster::monitor_loop() {
  pool_->monitor_tick(loop_.now());
  loop_.schedule_in(scenario_.monitor_interval_ms, [this] { monitor_loop(); });
}

std::string SimCluster::provision(const ReplicaRecord& rec) {
  const ReplicaSpec* spec = scenario_.replica_spec(rec.name);
  std::string node_name = rec.name + "#" + std::to_string(rec.incarnation);
  SimHost* host = net_.add_node(node_name, rec.region);

  ReplicaServer::Config cfg;
  cfg.service_id = rec.service_id;
  cfg.replica_id = rec.replica_id;
  cfg.name = rec.name;
  cfg.discovery_endpoint = "sim://discovery";
  cfg.scenario_seed = scenario_.seed;
  auto replica = std::make_unique<ReplicaServer>(
      *host, cfg, [](const Bytes& payload) { return payload; });
  replica->set_service_model(spec ? spec->service_latency
                                  : scenario_.replicas.front().service_latency);
  replica->start();
  current_replica_[rec.name] = replica.get();
  slot_node_name_[rec.name] = node_name;
  replicas_.push_back(std::move(replica));
  return host->endpoint();
}

void SimCluster::retire(const ReplicaRecord& rec) {
  auto it = slot_node_name_.find(rec.name);
  if (it == slot_node_name_.end()) return;
  net_.kill(it->second);
  current_replica_.erase(rec.name);
}

ReplicaServer* SimCluster::current_replica(const std::string& name) {
  auto it = current_replica_.find(name);
  return it == current_replica_.end() ? nullptr : it->second;
}

void SimCluster::kill_discovery() {
  net_.kill("discovery");
}

void SimCluster::restart_discovery() {
  dead_discovery_.push_back(std::move(discovery_));
  discovery_host_ = net_.add_node("discovery");
  discovery_.reset(new DiscoveryServer(*discovery_host_));
  discovery_->start();
}

void SimCluster::preempt(const std::string& replica_name) {
  for (const auto& rec : pool_->snapshot()) {
    if (rec.name == replica_name && rec.state == ReplicaState::Running) {
      pool_->mark_preempted(rec.replica_id, loop_.now());
      return;
    }
  }
}

void SimCluster::kill_replica_silently(const std::string& replica_name) {
  auto it = slot_node_name_.find(replica_name);
  if (it != slot_node_name_.end()) net_.kill(it->second);
}

void SimCluster::schedule_workload() {
  for (uint64_t k = 0; k < scenario_.workload.requests; ++k) {
    TimeMs t = scenario_.workload.start_ms + static_cast<double>(k) * scenario_.workload.inter_arrival_ms;
    loop_.schedule_at(t, [this, k] { submit_one(k); });
  }
  outcomes_.resize(scenario_.workload.requests);
}

void SimCluster::submit_one(uint64_t index) {
  ++submitted_;
  Bytes payload(scenario_.workload.payload_bytes, static_cast<uint8_t>(index & 0xFF));
  robot_->submit(std::move(payload), scenario_.workload.timeout_ms, [this, index](const RequestOutcome& out) {
    RequestRecord rec;
    rec.request_id = out.request_id;
    rec.submit_ms = out.submit_ms;
    rec.deliver_ms = std::min(out.resolve_ms, loop_.now());
    rec.latency_ms = rec.deliver_ms - rec.submit_ms;
    if (out.unavailable) {
      rec.status = RequestRecord::Status::Unavailable;
      rec.latency_ms = 0;
    } else if (out.status == ResponseStatus::TimeoutSynthetic) {
      rec.status = RequestRecord::Status::Timeout;
    } else if (out.status == ResponseStatus::ServiceError) {
      rec.status = RequestRecord::Status::ServiceError;
      rec.winner = winner_name(out.winner_replica_id);
    } else {
      rec.status = RequestRecord::Status::Ok;
      rec.winner = winner_name(out.winner_replica_id);
    }
    outcomes_[index] = rec;
    ++resolved_;
  });
}

std::string SimCluster::winner_name(uint64_t replica_id) const {
  auto name = pool_->name_of(replica_id);
  return name ? *name : std::to_string(replica_id);
}

void SimCluster::schedule_faults() {
  for (const auto& c : scenario_.contention) {
    TimeMs end = c.end_ms > 0 ? c.end_ms
                              : scenario_.workload.start_ms +
                                    static_cast<double>(scenario_.workload.requests) *
                                        scenario_.workload.inter_arrival_ms;
    for (TimeMs t = c.start_ms; t < end; t += c.period_ms) {
      loop_.schedule_at(t, [this, name = c.replica, ms = c.service_ms] {
        if (ReplicaServer* r = current_replica(name)) r->occupy(ms);
      });
    }
  }
  for (const auto& p : scenario_.preemption) {
    if (p.at_ms) {
      loop_.schedule_at(*p.at_ms, [this, name = p.replica] { preempt(name); });
    } else {
      // Seeded renewal process: each event schedules the next.
      auto rng = std::make_shared<StreamRng>(scenario_.seed, "fault/preempt/" + p.replica);
      auto interval = LatencyModel::exponential(*p.mean_interval_ms);
      schedule_renewal_preemption(p.replica, rng, interval);
    }
  }
  for (const auto& o : scenario_.discovery_outage) {
    loop_.schedule_at(o.start_ms, [this] { kill_discovery(); });
    if (o.end_ms > 0) loop_.schedule_at(o.end_ms, [this] { restart_discovery(); });
  }
}

void SimCluster::schedule_renewal_preemption(const std::string& name,
                                             std::shared_ptr<StreamRng> rng,
                                             LatencyModel interval) {
  TimeMs next = loop_.now() + interval.sample(*rng);
  loop_.schedule_at(next, [this, name, rng, interval] {
    preempt(name);
    schedule_renewal_preemption(name, rng, interval);
  });
}

RunReport SimCluster::make_report() const {
  RunReport report;
  report.scenario_name = scenario_.name;
  report.seed = scenario_.seed;
  report.records = outcomes_;
  report.pool_events = pool_->event_log();
  report.finalize();
  report.cost_usd = pool_->accrue_cost(loop_.now());
  return report;
}

RunReport SimCluster::report_so_far() const { return make_report(); }

RunReport SimCluster::run_all() {
  const auto& w = scenario_.workload;
  TimeMs workload_end = w.start_ms + static_cast<double>(w.requests) * w.inter_arrival_ms;
  TimeMs horizon = workload_end + static_cast<double>(w.timeout_ms);

  loop_.run_until(horizon);
  // Drain stragglers (no-deadline scenarios, relaunch tails).
  TimeMs cap = horizon + 600'000;
  while (resolved_ < w.requests && loop_.now() < cap)
    loop_.run_until(loop_.now() + 1'000);
  if (resolved_ < w.requests) {
    // Requests lost to dead replicas with no deadline configured: account
    // them as timeouts at the drain cap rather than dropping them.
    robot_->registry().expire(kNoDeadline);
  }
  return make_report();
}

RunReport run_scenario(const Scenario& scenario) {
  SimCluster cluster(scenario);
  return cluster.run_all();
}

// --- report emission ---------------------------------------------------------

namespace {
std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}
}  // namespace

void emit_report(const RunReport& report, const std::string& csv_path) {
  auto out = open_or_throw(csv_path);
  out << "request_id,submit_ms,deliver_ms,latency_ms,winner,status\n";
  char buf[256];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof buf, "%s,%.3f,%.3f,%.3f,%s,%s\n", r.request_id.str().c_str(),
                  r.submit_ms, r.deliver_ms, r.latency_ms, r.winner.c_str(),
                  RequestRecord::status_name(r.status));
    out << buf;
  }
  out << report.aggregate_line() << "\n";
  if (!out) throw std::runtime_error("write failed: " + csv_path);
}

void emit_cdf(const RunReport& report, const std::string& path) {
  auto out = open_or_throw(path);
  std::vector<double> latencies;
  for (const auto& r : report.records)
    if (r.status == RequestRecord::Status::Ok || r.status == RequestRecord::Status::ServiceError)
      latencies.push_back(r.latency_ms);
  std::sort(latencies.begin(), latencies.end());
  out << "latency_ms,cum_fraction\n";
  char buf[80];
  for (size_t i = 0; i < latencies.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%.6f\n", latencies[i],
                  static_cast<double>(i + 1) / static_cast<double>(latencies.size()));
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_pool_events(const RunReport& report, const std::string& path) {
  auto out = open_or_throw(path);
  out << "time_ms,replica_id,name,from,to,endpoint\n";
  for (const auto& ev : report.pool_events) out << ev.str() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ftproxy
