#include "ftproxy/proxy.hpp"

#include <algorithm>

#include "ftproxy/thread_pool.hpp"

namespace ftproxy {

// --- FanoutCore ---------------------------------------------------------------

FanoutCore::FanoutCore(Host& host, Config cfg) : host_(host), cfg_(std::move(cfg)) {}

void FanoutCore::start() {
  std::lock_guard lock(mu_);
  for (const auto& ep : cfg_.static_endpoints) {
    Peer peer;
    peer.key = ep;
    peer.endpoint = ep;
    peer.from_discovery = false;
    peers_.emplace(ep, peer);
    dial_peer(peers_.at(ep));
  }
  if (!cfg_.discovery_endpoint.empty()) {
    discovery_link_ = host_.dial(cfg_.discovery_endpoint);
    discovery_state_ = LinkState::Connecting;
    want_lookup_ = true;
  }
}

void FanoutCore::dial_peer(Peer& peer) {
  peer.link = host_.dial(peer.endpoint);
  peer.state = LinkState::Connecting;
  peer.last_seen = host_.now_ms();
  link_to_peer_[peer.link] = peer.key;
}

void FanoutCore::send_lookup() {
  PeerListBody query;
  query.service_id = cfg_.service_id;
  host_.send(discovery_link_, encode_frame(MsgType::PeerList, encode_peer_list_body(query)));
  lookup_outstanding_ = true;
  lookup_sent_at_ = host_.now_ms();
  ++stats_.lookups_sent;
}

void FanoutCore::tick() {
  TimeMs now = host_.now_ms();
  Bytes heartbeat = encode_frame(
      MsgType::Heartbeat, encode_heartbeat_body({cfg_.service_id, cfg_.sender_tag}));

  std::lock_guard lock(mu_);
  for (auto& [key, peer] : peers_) {
    if (peer.state == LinkState::Up) {
      if (now - peer.last_seen > cfg_.heartbeat_miss_limit * cfg_.heartbeat_interval_ms) {
        peer.state = LinkState::Down;
        host_.close_link(peer.link);
        link_to_peer_.erase(peer.link);
        peer.link = 0;
      } else {
        host_.send(peer.link, heartbeat);
      }
    } else if (peer.state == LinkState::Down && !peer.from_discovery) {
      dial_peer(peer);  // static infrastructure: keep trying
    }
  }

  if (cfg_.discovery_endpoint.empty()) return;
  if (discovery_state_ == LinkState::Down) {
    discovery_link_ = host_.dial(cfg_.discovery_endpoint);
    discovery_state_ = LinkState::Connecting;
    return;
  }
  bool any_missing = std::any_of(peers_.begin(), peers_.end(),
                                 [](const auto& kv) { return kv.second.state != LinkState::Up; });
  bool retry_due = lookup_outstanding_ && now - lookup_sent_at_ >= cfg_.lookup_retry_ms;
  if (discovery_state_ == LinkState::Up &&
      ((want_lookup_ && !lookup_outstanding_) || any_missing || retry_due))
    send_lookup();
}

size_t FanoutCore::fanout(const Bytes& frame_bytes) {
  std::vector<LinkId> targets;
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, peer] : peers_)
      if (peer.state == LinkState::Up) targets.push_back(peer.link);
  }
  size_t sent = 0;
  for (LinkId link : targets)
    if (host_.send(link, frame_bytes)) ++sent;
  return sent;
}

void FanoutCore::refresh_peers() {
  std::lock_guard lock(mu_);
  want_lookup_ = true;
  if (discovery_state_ == LinkState::Up && !lookup_outstanding_) send_lookup();
}

bool FanoutCore::is_discovery_link(LinkId link) const {
  std::lock_guard lock(mu_);
  return !cfg_.discovery_endpoint.empty() && link == discovery_link_;
}

bool FanoutCore::is_peer_link(LinkId link) const {
  std::lock_guard lock(mu_);
  return link_to_peer_.contains(link);
}

void FanoutCore::handle_link_up(LinkId link, const std::string& remote) {
  std::lock_guard lock(mu_);
  if (link == discovery_link_) {
    discovery_state_ = LinkState::Up;
    if (want_lookup_ || !peers_.empty()) send_lookup();
    return;
  }
  auto it = link_to_peer_.find(link);
  if (it == link_to_peer_.end()) return;
  Peer& peer = peers_.at(it->second);
  peer.state = LinkState::Up;
  peer.last_seen = host_.now_ms();
}

void FanoutCore::handle_link_reset(LinkId link) {
  std::lock_guard lock(mu_);
  if (link == discovery_link_) {
    discovery_state_ = LinkState::Down;
    lookup_outstanding_ = false;
    return;
  }
  auto it = link_to_peer_.find(link);
  if (it == link_to_peer_.end()) return;
  Peer& peer = peers_.at(it->second);
  bool was_connected = peer.state != LinkState::Down;
  peer.state = LinkState::Down;
  link_to_peer_.erase(it);
  peer.link = 0;
  if (!was_connected) return;
  ++stats_.peer_resets;
  if (peer.from_discovery && discovery_state_ == LinkState::Up) {
    DisconnectReportBody report{cfg_.service_id, peer.replica_id};
    host_.send(discovery_link_, encode_frame(MsgType::DisconnectReport, encode_disconnect_body(report)));
    ++stats_.disconnects_reported;
    if (!lookup_outstanding_) send_lookup();
  }
  want_lookup_ = true;
}

void FanoutCore::handle_heartbeat(LinkId link) { note_activity(link); }

void FanoutCore::note_activity(LinkId link) {
  std::lock_guard lock(mu_);
  auto it = link_to_peer_.find(link);
  if (it == link_to_peer_.end()) return;
  peers_.at(it->second).last_seen = host_.now_ms();
}

void FanoutCore::handle_peer_list(const PeerListBody& body) {
  if (body.status != 0 || body.service_id != cfg_.service_id) return;
  std::lock_guard lock(mu_);
  lookup_outstanding_ = false;
  want_lookup_ = false;
  for (const auto& entry : body.peers) {
    std::string key = std::to_string(entry.replica_id);
    auto [it, inserted] = peers_.try_emplace(key);
    Peer& peer = it->second;
    if (inserted) {
      peer.key = key;
      peer.replica_id = entry.replica_id;
      peer.from_discovery = true;
      peer.endpoint = entry.endpoint;
      peer.state = LinkState::Down;
    }
    if (peer.endpoint != entry.endpoint) {
      // Relaunched at a new machine: same replica slot, fresh endpoint.
      if (peer.link != 0) {
        host_.close_link(peer.link);
        link_to_peer_.erase(peer.link);
        peer.link = 0;
      }
      peer.endpoint = entry.endpoint;
      peer.state = LinkState::Down;
    }
    if (peer.state == LinkState::Down) dial_peer(peer);
  }
  // Forget retired replicas the directory no longer lists.
  for (auto it = peers_.begin(); it != peers_.end();) {
    const Peer& peer = it->second;
    bool listed = std::any_of(body.peers.begin(), body.peers.end(), [&](const PeerEntry& e) {
      return peer.from_discovery && e.replica_id == peer.replica_id;
    });
    if (peer.from_discovery && !listed && peer.state == LinkState::Down)
      it = peers_.erase(it);
    else
      ++it;
  }
}

size_t FanoutCore::up_count() const {
  std::lock_guard lock(mu_);
  size_t n = 0;
  for (const auto& [key, peer] : peers_)
    if (peer.state == LinkState::Up) ++n;
  return n;
}

std::vector<PeerView> FanoutCore::peer_table() const {
  std::lock_guard lock(mu_);
  std::vector<PeerView> out;
  out.reserve(peers_.size());
  for (const auto& [key, peer] : peers_)
    out.push_back(PeerView{key, peer.endpoint, peer.replica_id, peer.state});
  return out;
}

std::optional<uint64_t> FanoutCore::replica_id_for_link(LinkId link) const {
  std::lock_guard lock(mu_);
  auto it = link_to_peer_.find(link);
  if (it == link_to_peer_.end()) return std::nullopt;
  return peers_.at(it->second).replica_id;
}

// --- RobotProxy ---------------------------------------------------------------

RobotProxy::RobotProxy(Host& host, FanoutCore::Config cfg, uint64_t client_guid,
                       TimeMs retention_ms)
    : host_(host), core_(host, std::move(cfg)), registry_(retention_ms), id_gen_(client_guid) {
  host_.bind(this);
}

void RobotProxy::start() {
  core_.start();
  host_.schedule(1'000, [this] { tick_loop(); });
}

void RobotProxy::tick_loop() {
  core_.tick();
  drain_expired();
  host_.schedule(1'000, [this] { tick_loop(); });
}

void RobotProxy::submit(Bytes payload, uint64_t timeout_ms, OutcomeFn cb) {
  stats_.submitted.fetch_add(1, std::memory_order_relaxed);
  TimeMs now = host_.now_ms();
  if (core_.up_count() == 0) {
    stats_.unavailable.fetch_add(1, std::memory_order_relaxed);
    RequestOutcome outcome;
    outcome.request_id = id_gen_.next();
    outcome.submit_ms = now;
    outcome.resolve_ms = now;
    outcome.unavailable = true;
    cb(outcome);
    return;
  }

  RequestId id = id_gen_.next();
  TimeMs deadline = timeout_ms > 0 ? now + static_cast<TimeMs>(timeout_ms) : kNoDeadline;

  RequestEnvelope env;
  env.request_id = id;
  env.service_id = core_.service_id();
  env.deadline_ms = timeout_ms;
  env.payload = std::move(payload);
  Bytes frame = encode_frame(MsgType::Request, encode_request_body(env));

  registry_.register_request(
      id, now, deadline,
      [this, cb, id, now](const ResponseEnvelope& resp) {
        stats_.delivered.fetch_add(1, std::memory_order_relaxed);
        RequestOutcome outcome;
        outcome.request_id = id;
        outcome.submit_ms = now;
        outcome.resolve_ms = host_.now_ms();
        outcome.status = resp.status;
        outcome.winner_replica_id = resp.replica_id;
        outcome.payload = resp.payload;
        cb(outcome);
      },
      [this, cb, id, now, deadline](const ResponseEnvelope& resp) {
        stats_.timeouts.fetch_add(1, std::memory_order_relaxed);
        RequestOutcome outcome;
        outcome.request_id = id;
        outcome.submit_ms = now;
        outcome.resolve_ms = deadline;
        outcome.status = ResponseStatus::TimeoutSynthetic;
        cb(outcome);
      });

  if (core_.fanout(frame) == 0) {
    // Every link dropped between the availability check and the sends.
    registry_.cancel(id);
    stats_.unavailable.fetch_add(1, std::memory_order_relaxed);
    RequestOutcome outcome;
    outcome.request_id = id;
    outcome.submit_ms = now;
    outcome.resolve_ms = now;
    outcome.unavailable = true;
    cb(outcome);
    return;
  }
  if (deadline != kNoDeadline)
    host_.schedule(static_cast<TimeMs>(timeout_ms), [this] { drain_expired(); });
}

void RobotProxy::drain_expired() { registry_.expire(host_.now_ms()); }

void RobotProxy::on_link_up(LinkId link, const std::string& remote) {
  core_.handle_link_up(link, remote);
}

void RobotProxy::on_link_reset(LinkId link) { core_.handle_link_reset(link); }

void RobotProxy::on_frame(LinkId link, const Frame& frame) {
  switch (frame.msg_type) {
    case MsgType::Response: {
      core_.note_activity(link);
      ResponseEnvelope resp;
      try {
        resp = decode_response_body(frame.body);
      } catch (const ProtocolError&) {
        stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
        return;
      }
      switch (registry_.complete(resp)) {
        case CompleteResult::Delivered:
          break;  // the registered action handled delivery
        case CompleteResult::Duplicate:
          stats_.duplicates.fetch_add(1, std::memory_order_relaxed);
          break;
        case CompleteResult::Unknown:
          stats_.unknown_responses.fetch_add(1, std::memory_order_relaxed);
          break;
      }
      break;
    }
    case MsgType::Heartbeat:
      core_.handle_heartbeat(link);
      break;
    case MsgType::PeerList: {
      try {
        core_.handle_peer_list(decode_peer_list_body(frame.body));
      } catch (const ProtocolError&) {
        stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
      }
      break;
    }
    default:
      break;
  }
}

void RobotProxy::on_frame_error(LinkId link, DecodeStatus error) {
  // Link is suspect; the frame is dropped and counted.
  stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
}

// --- ReplicaServer --------------------------------------------------------------

ReplicaServer::ReplicaServer(Host& host, Config cfg, Handler handler)
    : host_(host), cfg_(std::move(cfg)), handler_(std::move(handler)) {
  host_.bind(this);
  if (!cfg_.forward_children.empty()) {
    FanoutCore::Config fc;
    fc.service_id = cfg_.service_id;
    fc.static_endpoints = cfg_.forward_children;
    fc.sender_tag = cfg_.replica_id;
    forward_core_.emplace(host_, fc);
  }
}

void ReplicaServer::set_service_model(LatencyModel model) {
  service_model_ = std::move(model);
  service_rng_.emplace(cfg_.scenario_seed, "svc/" + cfg_.name);
}

void ReplicaServer::set_executor(ThreadPool* pool) { executor_ = pool; }

void ReplicaServer::occupy(double service_ms) {
  TimeMs now = host_.now_ms();
  busy_until_ = std::max(busy_until_, now) + service_ms;
}

void ReplicaServer::start() {
  if (forward_core_) forward_core_->start();
  if (!cfg_.discovery_endpoint.empty()) {
    discovery_link_ = host_.dial(cfg_.discovery_endpoint);
    discovery_state_ = LinkState::Connecting;
    host_.schedule(cfg_.register_interval_ms, [this] { register_tick(); });
  }
  if (forward_core_)
    host_.schedule(1'000, [this] { forward_tick(); });
}

void ReplicaServer::forward_tick() {
  forward_core_->tick();
  host_.schedule(1'000, [this] { forward_tick(); });
}

void ReplicaServer::register_tick() {
  if (discovery_state_ == LinkState::Up) {
    send_register();
  } else if (discovery_state_ == LinkState::Down) {
    discovery_link_ = host_.dial(cfg_.discovery_endpoint);
    discovery_state_ = LinkState::Connecting;
  }
  host_.schedule(cfg_.register_interval_ms, [this] { register_tick(); });
}

void ReplicaServer::send_register() {
  RegisterBody reg{cfg_.service_id, cfg_.replica_id, host_.endpoint()};
  host_.send(discovery_link_, encode_frame(MsgType::Register, encode_register_body(reg)));
}

void ReplicaServer::on_link_up(LinkId link, const std::string& remote) {
  if (!cfg_.discovery_endpoint.empty() && link == discovery_link_) {
    discovery_state_ = LinkState::Up;
    send_register();
    return;
  }
  if (forward_core_ && (forward_core_->is_peer_link(link) || forward_core_->is_discovery_link(link))) {
    forward_core_->handle_link_up(link, remote);
    return;
  }
  parent_links_.push_back(link);
}

void ReplicaServer::on_link_reset(LinkId link) {
  if (!cfg_.discovery_endpoint.empty() && link == discovery_link_) {
    discovery_state_ = LinkState::Down;
    return;
  }
  if (forward_core_ && forward_core_->is_peer_link(link)) {
    forward_core_->handle_link_reset(link);
    return;
  }
  std::erase(parent_links_, link);
}

void ReplicaServer::on_frame(LinkId link, const Frame& frame) {
  switch (frame.msg_type) {
    case MsgType::Request:
      serve(link, frame);
      if (forward_core_) {
        forward_core_->fanout(encode_frame(MsgType::Request, frame.body));
      }
      break;
    case MsgType::Response:
      // From a forwarding child: relay upstream unmodified.
      if (forward_core_ && forward_core_->is_peer_link(link)) {
        forward_core_->note_activity(link);
        Bytes relay = encode_frame(MsgType::Response, frame.body);
        for (LinkId parent : parent_links_) host_.send(parent, relay);
        stats_.relayed_up.fetch_add(1, std::memory_order_relaxed);
      }
      break;
    case MsgType::Heartbeat:
      if (forward_core_ && forward_core_->is_peer_link(link)) {
        forward_core_->handle_heartbeat(link);
      } else {
        HeartbeatBody echo{cfg_.service_id, cfg_.replica_id};
        host_.send(link, encode_frame(MsgType::Heartbeat, encode_heartbeat_body(echo)));
      }
      break;
    case MsgType::PeerList:
      break;  // registration ack
    default:
      break;
  }
}

void ReplicaServer::on_frame_error(LinkId link, DecodeStatus error) {
  stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
}

void ReplicaServer::serve(LinkId link, const Frame& frame) {
  RequestEnvelope req;
  try {
    req = decode_request_body(frame.body);
  } catch (const ProtocolError&) {
    stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  if (req.service_id != cfg_.service_id) {
    stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  stats_.served.fetch_add(1, std::memory_order_relaxed);

  auto respond = [this, link, id = req.request_id](const Bytes& payload) {
    ResponseEnvelope resp;
    resp.request_id = id;
    resp.replica_id = cfg_.replica_id;
    try {
      resp.payload = handler_(payload);
      resp.status = ResponseStatus::Ok;
    } catch (...) {
      stats_.handler_errors.fetch_add(1, std::memory_order_relaxed);
      resp.status = ResponseStatus::ServiceError;
    }
    host_.send(link, encode_frame(MsgType::Response, encode_response_body(resp)));
  };

  if (service_model_) {
    // One FIFO server, work-conserving; contention occupies the same queue.
    TimeMs now = host_.now_ms();
    double service_ms = service_model_->sample(*service_rng_);
    TimeMs start = std::max(now, busy_until_);
    TimeMs finish = start + service_ms;
    busy_until_ = finish;
    if (trace_enabled_) trace_.push_back({now, start, finish, service_ms});
    host_.schedule(finish - now, [respond, payload = req.payload] { respond(payload); });
  } else if (executor_) {
    executor_->post([respond, payload = req.payload] { respond(payload); });
  } else {
    respond(req.payload);
  }
}

// --- GatewayNode ----------------------------------------------------------------

GatewayNode::GatewayNode(Host& host, FanoutCore::Config children_cfg)
    : host_(host), core_(host, std::move(children_cfg)) {
  host_.bind(this);
}

void GatewayNode::start() {
  core_.start();
  host_.schedule(1'000, [this] { tick_loop(); });
}

void GatewayNode::tick_loop() {
  core_.tick();
  host_.schedule(1'000, [this] { tick_loop(); });
}

void GatewayNode::on_link_up(LinkId link, const std::string& remote) {
  if (core_.is_peer_link(link) || core_.is_discovery_link(link)) {
    core_.handle_link_up(link, remote);
    return;
  }
  parent_links_.push_back(link);
}

void GatewayNode::on_link_reset(LinkId link) {
  if (core_.is_peer_link(link) || core_.is_discovery_link(link)) {
    core_.handle_link_reset(link);
    return;
  }
  std::erase(parent_links_, link);
}

void GatewayNode::on_frame(LinkId link, const Frame& frame) {
  switch (frame.msg_type) {
    case MsgType::Request: {
      // DOWNSTREAM: duplicate to every UP child, ids untouched, no dedup.
      size_t sent = core_.fanout(encode_frame(MsgType::Request, frame.body));
      if (sent == 0)
        stats_.dropped_no_children.fetch_add(1, std::memory_order_relaxed);
      else
        stats_.forwarded_requests.fetch_add(1, std::memory_order_relaxed);
      break;
    }
    case MsgType::Response: {
      // UPSTREAM: relay unmodified to the parent; the robot registry dedups.
      core_.note_activity(link);
      Bytes relay = encode_frame(MsgType::Response, frame.body);
      for (LinkId parent : parent_links_) host_.send(parent, relay);
      stats_.relayed_responses.fetch_add(1, std::memory_order_relaxed);
      break;
    }
    case MsgType::Heartbeat:
      if (core_.is_peer_link(link)) {
        core_.handle_heartbeat(link);
      } else {
        HeartbeatBody echo{core_.service_id(), 0};
        host_.send(link, encode_frame(MsgType::Heartbeat, encode_heartbeat_body(echo)));
      }
      break;
    case MsgType::PeerList: {
      try {
        core_.handle_peer_list(decode_peer_list_body(frame.body));
      } catch (const ProtocolError&) {
        stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
      }
      break;
    }
    default:
      break;
  }
}

void GatewayNode::on_frame_error(LinkId link, DecodeStatus error) {
  stats_.decode_errors.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace ftproxy
