#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ftproxy/event_loop.hpp"
#include "ftproxy/host.hpp"
#include "ftproxy/latency_model.hpp"

namespace ftproxy {

class SimNetwork;

// One simulated node's view of the network. Endpoint form: "sim://<name>".
// Scheduled closures and inbound frames are dropped once the node is killed.
class SimHost : public Host {
 public:
  TimeMs now_ms() override;
  void schedule(TimeMs delay_ms, std::function<void()> fn) override;
  LinkId dial(const std::string& endpoint) override;
  bool send(LinkId link, const Bytes& frame_bytes) override;
  void close_link(LinkId link) override;
  std::string endpoint() const override { return "sim://" + name_; }
  void bind(HostCallbacks* callbacks) override { callbacks_ = callbacks; }

  const std::string& name() const { return name_; }
  // Stream keys and per-link latency models are shared across relaunch
  // incarnations: "replica-a#2" has base name "replica-a".
  std::string base_name() const;
  const std::string& region() const { return region_; }
  bool alive() const { return alive_; }

 private:
  friend class SimNetwork;
  SimHost(SimNetwork& net, std::string name, std::string region)
      : net_(net), name_(std::move(name)), region_(std::move(region)) {}

  SimNetwork& net_;
  std::string name_;
  std::string region_;
  bool alive_ = true;
  bool responsive_ = true;
  HostCallbacks* callbacks_ = nullptr;
};

struct SlowdownWindow {
  std::string region;
  double added_latency_ms = 0;
  TimeMs start = 0;
  TimeMs end = 0;
};

// In-memory transport driven by the virtual clock. Data frames (REQUEST /
// RESPONSE) sample a per-link latency model from a stream keyed by the dialed
// node's base name; control frames travel at a constant latency and never
// touch an RNG. A regional slowdown adds its latency to every frame *sent by*
// a node in that region while the window is active.
class SimNetwork {
 public:
  SimNetwork(EventLoop& loop, uint64_t seed) : loop_(loop), seed_(seed) {}

  SimHost* add_node(const std::string& name, const std::string& region = "");
  // Closes all links immediately: peers see a connection reset at kill time,
  // and frames still in flight on those links are dropped.
  void kill(const std::string& name);
  // Silent failure: the node stops receiving frames but links stay open, so
  // peers only notice via missed heartbeats.
  void hang(const std::string& name);
  bool node_alive(const std::string& name) const;

  // Latency model for data frames on links dialed toward nodes whose base
  // name matches `base_name`. Default: fixed 0.
  void set_link_model(const std::string& base_name, LatencyModel model);
  void set_control_latency(TimeMs ms) { control_latency_ms_ = ms; }
  void add_slowdown(SlowdownWindow w) { slowdowns_.push_back(std::move(w)); }

  EventLoop& loop() { return loop_; }
  uint64_t frames_dropped() const { return frames_dropped_; }

 private:
  friend class SimHost;

  struct LinkState {
    SimHost* dialer = nullptr;
    LinkId dialer_link = 0;
    SimHost* target = nullptr;
    LinkId target_link = 0;
    std::string stream_key;  // data-latency stream + model key (target base name)
    bool open = false;
  };

  LinkId dial_from(SimHost* from, const std::string& endpoint);
  bool send_from(SimHost* from, LinkId link, const Bytes& frame_bytes);
  void close_from(SimHost* from, LinkId link);
  void deliver(uint64_t pair_id, SimHost* to, LinkId to_link, Bytes bytes);
  TimeMs transit_delay(SimHost* sender, uint8_t raw_msg_type, const LinkState& link);
  StreamRng& link_stream(const std::string& key);

  EventLoop& loop_;
  uint64_t seed_;
  TimeMs control_latency_ms_ = 0;
  uint64_t next_link_id_ = 1;
  uint64_t next_pair_id_ = 1;
  std::vector<std::unique_ptr<SimHost>> hosts_;
  std::unordered_map<std::string, SimHost*> by_name_;  // latest incarnation wins
  std::unordered_map<uint64_t, LinkState> links_;      // pair id -> state
  std::unordered_map<LinkId, uint64_t> link_to_pair_;
  std::map<std::string, LatencyModel> link_models_;
  std::map<std::string, std::unique_ptr<StreamRng>> link_streams_;
  std::vector<SlowdownWindow> slowdowns_;
  uint64_t frames_dropped_ = 0;
};

}  // namespace ftproxy
