#pragma once

#include <map>
#include <string>
#include <vector>

#include "ftproxy/host.hpp"

namespace ftproxy {

struct PeerRecord {
  ServiceIdentity service_id;
  std::string endpoint;
  uint64_t replica_id = 0;
  TimeMs registered_at = 0;
  TimeMs last_heartbeat = 0;
};

// Metadata server: maps ServiceIdentity -> live replica endpoints. Strictly
// off the data path — REQUEST/RESPONSE frames are rejected, so application
// payloads cannot transit here and losing the server only stalls discovery of
// new peers. Records expire when not refreshed within the expiry window;
// replicas refresh by periodic re-REGISTER.
class DiscoveryServer : public HostCallbacks {
 public:
  struct Stats {
    uint64_t registrations = 0;
    uint64_t lookups = 0;
    uint64_t disconnect_reports = 0;
    uint64_t rejected_data_frames = 0;
    uint64_t protocol_errors = 0;
    uint64_t evicted = 0;
  };

  explicit DiscoveryServer(Host& host, TimeMs expiry_ms = 10'000, TimeMs sweep_interval_ms = 1'000);

  void start();  // begins the eviction sweep

  // Directory operations (also reachable over the wire).
  void register_peer(const ServiceIdentity& sid, const std::string& endpoint, uint64_t replica_id);
  std::vector<PeerEntry> lookup(const ServiceIdentity& sid) const;
  void report_disconnect(const ServiceIdentity& sid, uint64_t replica_id);

  size_t record_count() const;
  const Stats& stats() const { return stats_; }

  void on_frame(LinkId link, const Frame& frame) override;
  void on_frame_error(LinkId link, DecodeStatus error) override;

 private:
  void sweep();
  bool is_live(const PeerRecord& rec) const;
  void reply_peers(LinkId link, const ServiceIdentity& sid, uint8_t status);

  Host& host_;
  TimeMs expiry_ms_;
  TimeMs sweep_interval_ms_;
  std::map<ServiceIdentity, std::map<uint64_t, PeerRecord>> records_;
  Stats stats_;
};

}  // namespace ftproxy
