#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ftproxy/host.hpp"
#include "ftproxy/latency_model.hpp"
#include "ftproxy/registry.hpp"
#include "ftproxy/topology.hpp"

namespace ftproxy {

class ThreadPool;

struct PeerView {
  std::string key;       // replica id (decimal) for discovery peers, endpoint for static
  std::string endpoint;
  uint64_t replica_id = 0;
  LinkState state = LinkState::Connecting;
};

// Dial-side peer set shared by the robot proxy and gateway forwarder: resolves
// peers through the discovery server (or a static endpoint list), dials them,
// heartbeats, detects failures (3 missed heartbeats, or a reset), reports
// disconnects, and fans frames out to every UP link. Requests are never queued
// for DOWN links; a relaunched replica rejoins via discovery and serves
// subsequent requests only.
class FanoutCore {
 public:
  struct Config {
    ServiceIdentity service_id;
    std::string discovery_endpoint;            // empty: static peers only
    std::vector<std::string> static_endpoints;
    TimeMs heartbeat_interval_ms = 1'000;
    int heartbeat_miss_limit = 3;
    TimeMs lookup_retry_ms = 2'000;
    uint64_t sender_tag = 0;
  };

  struct Stats {
    uint64_t peer_resets = 0;
    uint64_t lookups_sent = 0;
    uint64_t disconnects_reported = 0;
  };

  FanoutCore(Host& host, Config cfg);

  void start();
  void tick();
  size_t fanout(const Bytes& frame_bytes);
  void refresh_peers();  // pool-change notification: force a lookup

  bool is_discovery_link(LinkId link) const;
  bool is_peer_link(LinkId link) const;
  void handle_link_up(LinkId link, const std::string& remote);
  void handle_link_reset(LinkId link);
  void handle_heartbeat(LinkId link);
  void handle_peer_list(const PeerListBody& body);
  void note_activity(LinkId link);  // any inbound frame proves the peer alive

  size_t up_count() const;
  std::vector<PeerView> peer_table() const;
  const Stats& stats() const { return stats_; }
  std::optional<uint64_t> replica_id_for_link(LinkId link) const;
  const ServiceIdentity& service_id() const { return cfg_.service_id; }

 private:
  struct Peer {
    std::string key;
    std::string endpoint;
    uint64_t replica_id = 0;
    bool from_discovery = false;
    LinkId link = 0;
    LinkState state = LinkState::Down;
    TimeMs last_seen = 0;
  };

  void dial_peer(Peer& peer);
  void send_lookup();

  Host& host_;
  Config cfg_;
  mutable std::mutex mu_;
  std::map<std::string, Peer> peers_;
  std::map<LinkId, std::string> link_to_peer_;
  LinkId discovery_link_ = 0;
  LinkState discovery_state_ = LinkState::Down;
  bool lookup_outstanding_ = false;
  TimeMs lookup_sent_at_ = 0;
  bool want_lookup_ = false;
  Stats stats_;
};

// --- robot-side proxy --------------------------------------------------------

struct RequestOutcome {
  RequestId request_id;
  TimeMs submit_ms = 0;
  TimeMs resolve_ms = 0;
  ResponseStatus status = ResponseStatus::Ok;
  bool unavailable = false;  // fan-out found zero UP links; distinct from timeout
  uint64_t winner_replica_id = 0;
  Bytes payload;
};

// Fans each request out to every UP replica link, delivers exactly the first
// response, and synthesizes a timeout response when the deadline passes.
// Replication is invisible on both sides: one request in, one outcome out.
class RobotProxy : public HostCallbacks {
 public:
  using OutcomeFn = std::function<void(const RequestOutcome&)>;

  struct Stats {
    std::atomic<uint64_t> submitted{0};
    std::atomic<uint64_t> delivered{0};
    std::atomic<uint64_t> duplicates{0};
    std::atomic<uint64_t> timeouts{0};
    std::atomic<uint64_t> unavailable{0};
    std::atomic<uint64_t> unknown_responses{0};
    std::atomic<uint64_t> decode_errors{0};
  };

  RobotProxy(Host& host, FanoutCore::Config cfg, uint64_t client_guid,
             TimeMs retention_ms = PendingRegistry::kDefaultRetentionMs);

  void start();

  // Asynchronous: cb fires exactly once, immediately on unavailable.
  void submit(Bytes payload, uint64_t timeout_ms, OutcomeFn cb);

  void refresh_peers() { core_.refresh_peers(); }
  void sweep_expired() { drain_expired(); }

  FanoutCore& peers() { return core_; }
  PendingRegistry& registry() { return registry_; }
  const Stats& stats() const { return stats_; }
  uint64_t client_guid() const { return id_gen_.client_guid(); }

  void on_link_up(LinkId link, const std::string& remote) override;
  void on_link_reset(LinkId link) override;
  void on_frame(LinkId link, const Frame& frame) override;
  void on_frame_error(LinkId link, DecodeStatus error) override;

 private:
  void drain_expired();
  void tick_loop();

  Host& host_;
  FanoutCore core_;
  PendingRegistry registry_;
  RequestIdGenerator id_gen_;
  Stats stats_;
};

// --- service-side adapter ----------------------------------------------------

// Wraps a stateless handler as a replica: REQUEST in, RESPONSE with the same
// request id out. Service time comes either from a synthetic queue model
// (simulation: one FIFO server, work-conserving) or from real handler
// execution on a worker pool (wall-clock). An optional forwarding child list
// turns the replica into a serve-and-forward node.
class ReplicaServer : public HostCallbacks {
 public:
  using Handler = std::function<Bytes(const Bytes&)>;

  struct Config {
    ServiceIdentity service_id;
    uint64_t replica_id = 0;
    std::string name;  // stable across relaunches; keys the service-time stream
    std::string discovery_endpoint;
    TimeMs register_interval_ms = 2'000;
    std::vector<std::string> forward_children;
    uint64_t scenario_seed = 0;
  };

  struct Stats {
    std::atomic<uint64_t> served{0};
    std::atomic<uint64_t> handler_errors{0};
    std::atomic<uint64_t> forwarded_down{0};
    std::atomic<uint64_t> relayed_up{0};
    std::atomic<uint64_t> decode_errors{0};
  };

  struct ServiceTrace {
    TimeMs arrival = 0;
    TimeMs start = 0;
    TimeMs finish = 0;
    double service_ms = 0;
  };

  ReplicaServer(Host& host, Config cfg, Handler handler);

  // Simulation timing: FIFO single-server queue with sampled service times.
  void set_service_model(LatencyModel model);
  // Wall-clock timing: handler runs (and takes real time) on this pool.
  void set_executor(ThreadPool* pool);

  // Contention injection: a competing request occupies the server for
  // `service_ms` starting no earlier than now.
  void occupy(double service_ms);

  void start();
  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<ServiceTrace>& trace() const { return trace_; }
  const Stats& stats() const { return stats_; }

  void on_link_up(LinkId link, const std::string& remote) override;
  void on_link_reset(LinkId link) override;
  void on_frame(LinkId link, const Frame& frame) override;
  void on_frame_error(LinkId link, DecodeStatus error) override;

 private:
  void serve(LinkId link, const Frame& frame);
  void register_tick();
  void send_register();
  void forward_tick();

  Host& host_;
  Config cfg_;
  Handler handler_;
  std::optional<LatencyModel> service_model_;
  std::optional<StreamRng> service_rng_;
  ThreadPool* executor_ = nullptr;
  TimeMs busy_until_ = 0;
  LinkId discovery_link_ = 0;
  LinkState discovery_state_ = LinkState::Down;
  std::vector<LinkId> parent_links_;
  std::optional<FanoutCore> forward_core_;
  bool trace_enabled_ = false;
  std::vector<ServiceTrace> trace_;
  Stats stats_;
};

// --- gateway forwarder ---------------------------------------------------------

// Bandwidth amplifier for a constrained robot: duplicates DOWNSTREAM REQUEST
// frames to every UP child and relays UPSTREAM RESPONSE frames unmodified.
// No deduplication here — that happens only at the robot registry.
class GatewayNode : public HostCallbacks {
 public:
  struct Stats {
    std::atomic<uint64_t> forwarded_requests{0};
    std::atomic<uint64_t> relayed_responses{0};
    std::atomic<uint64_t> dropped_no_children{0};
    std::atomic<uint64_t> decode_errors{0};
  };

  GatewayNode(Host& host, FanoutCore::Config children_cfg);

  void start();
  FanoutCore& children() { return core_; }
  const Stats& stats() const { return stats_; }

  void on_link_up(LinkId link, const std::string& remote) override;
  void on_link_reset(LinkId link) override;
  void on_frame(LinkId link, const Frame& frame) override;
  void on_frame_error(LinkId link, DecodeStatus error) override;

 private:
  void tick_loop();

  Host& host_;
  FanoutCore core_;
  std::vector<LinkId> parent_links_;
  Stats stats_;
};

}  // namespace ftproxy
