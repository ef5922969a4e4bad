#pragma once

#include <functional>
#include <string>

#include "ftproxy/common.hpp"
#include "ftproxy/envelope.hpp"

namespace ftproxy {

using LinkId = uint64_t;

// Node-side events. The host serializes all callbacks per node: the simulated
// host runs on the event-loop thread, the TCP host takes a per-node mutex, so
// node logic never sees two callbacks racing.
class HostCallbacks {
 public:
  virtual ~HostCallbacks() = default;
  virtual void on_link_up(LinkId link, const std::string& remote_endpoint) {}
  virtual void on_link_reset(LinkId link) {}
  virtual void on_frame(LinkId link, const Frame& frame) {}
  virtual void on_frame_error(LinkId link, DecodeStatus error) {}
};

// Transport seam. Proxy, gateway, replica, and discovery logic are written
// against this; the virtual-clock simulation and wall-clock TCP supply it.
class Host {
 public:
  virtual ~Host() = default;

  virtual TimeMs now_ms() = 0;
  virtual void schedule(TimeMs delay_ms, std::function<void()> fn) = 0;

  // Async connect; outcome arrives as on_link_up or on_link_reset.
  virtual LinkId dial(const std::string& endpoint) = 0;

  // Returns false if the link is closed or unknown. FIFO per link.
  virtual bool send(LinkId link, const Bytes& frame_bytes) = 0;
  virtual void close_link(LinkId link) = 0;

  virtual std::string endpoint() const = 0;
  virtual void bind(HostCallbacks* callbacks) = 0;
};

}  // namespace ftproxy
