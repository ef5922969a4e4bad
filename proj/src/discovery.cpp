#include "ftproxy/discovery.hpp"

namespace ftproxy {

DiscoveryServer::DiscoveryServer(Host& host, TimeMs expiry_ms, TimeMs sweep_interval_ms)
    : host_(host), expiry_ms_(expiry_ms), sweep_interval_ms_(sweep_interval_ms) {
  host_.bind(this);
}

void DiscoveryServer::start() {
  host_.schedule(sweep_interval_ms_, [this] { sweep(); });
}

void DiscoveryServer::sweep() {
  TimeMs now = host_.now_ms();
  for (auto sit = records_.begin(); sit != records_.end();) {
    auto& by_replica = sit->second;
    for (auto rit = by_replica.begin(); rit != by_replica.end();) {
      if (now - rit->second.last_heartbeat > expiry_ms_) {
        ++stats_.evicted;
        rit = by_replica.erase(rit);
      } else {
        ++rit;
      }
    }
    if (by_replica.empty())
      sit = records_.erase(sit);
    else
      ++sit;
  }
  host_.schedule(sweep_interval_ms_, [this] { sweep(); });
}

bool DiscoveryServer::is_live(const PeerRecord& rec) const {
  return host_.now_ms() - rec.last_heartbeat <= expiry_ms_;
}

void DiscoveryServer::register_peer(const ServiceIdentity& sid, const std::string& endpoint,
                                    uint64_t replica_id) {
  ++stats_.registrations;
  TimeMs now = host_.now_ms();
  auto& rec = records_[sid][replica_id];
  if (rec.endpoint.empty()) rec.registered_at = now;
  rec.service_id = sid;
  rec.endpoint = endpoint;
  rec.replica_id = replica_id;
  rec.last_heartbeat = now;
}

std::vector<PeerEntry> DiscoveryServer::lookup(const ServiceIdentity& sid) const {
  std::vector<PeerEntry> out;
  auto sit = records_.find(sid);
  if (sit == records_.end()) return out;
  for (const auto& [replica_id, rec] : sit->second)
    if (is_live(rec)) out.push_back(PeerEntry{replica_id, rec.endpoint});
  return out;
}

void DiscoveryServer::report_disconnect(const ServiceIdentity& sid, uint64_t replica_id) {
  ++stats_.disconnect_reports;
  auto sit = records_.find(sid);
  if (sit == records_.end()) return;
  sit->second.erase(replica_id);
  if (sit->second.empty()) records_.erase(sit);
}

size_t DiscoveryServer::record_count() const {
  size_t n = 0;
  for (const auto& [sid, by_replica] : records_) n += by_replica.size();
  return n;
}

void DiscoveryServer::reply_peers(LinkId link, const ServiceIdentity& sid, uint8_t status) {
  PeerListBody body;
  body.status = status;
  body.service_id = sid;
  if (status == 0) body.peers = lookup(sid);
  host_.send(link, encode_frame(MsgType::PeerList, encode_peer_list_body(body)));
}

void DiscoveryServer::on_frame(LinkId link, const Frame& frame) {
  try {
    switch (frame.msg_type) {
      case MsgType::Register: {
        RegisterBody reg = decode_register_body(frame.body);
        register_peer(reg.service_id, reg.endpoint, reg.replica_id);
        reply_peers(link, reg.service_id, 0);
        break;
      }
      case MsgType::PeerList: {
        PeerListBody query = decode_peer_list_body(frame.body);
        ++stats_.lookups;
        reply_peers(link, query.service_id, 0);
        break;
      }
      case MsgType::DisconnectReport: {
        DisconnectReportBody d = decode_disconnect_body(frame.body);
        report_disconnect(d.service_id, d.replica_id);
        reply_peers(link, d.service_id, 0);
        break;
      }
      case MsgType::Heartbeat: {
        HeartbeatBody hb = decode_heartbeat_body(frame.body);
        auto sit = records_.find(hb.service_id);
        if (sit != records_.end()) {
          auto rit = sit->second.find(hb.sender_tag);
          if (rit != sit->second.end()) rit->second.last_heartbeat = host_.now_ms();
        }
        break;
      }
      case MsgType::Request:
      case MsgType::Response: {
        // Application data never transits the metadata server.
        ++stats_.rejected_data_frames;
        reply_peers(link, ServiceIdentity{}, 1);
        break;
      }
    }
  } catch (const ProtocolError&) {
    ++stats_.protocol_errors;
    reply_peers(link, ServiceIdentity{}, 1);
  }
}

void DiscoveryServer::on_frame_error(LinkId link, DecodeStatus error) {
  ++stats_.protocol_errors;
  reply_peers(link, ServiceIdentity{}, 1);
}

}  // namespace ftproxy
