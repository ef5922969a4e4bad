#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>

#include "ftproxy/host.hpp"

namespace ftproxy {

// Wall-clock transport: listens and dials 127.0.0.1 TCP, one reader thread per
// connection, incremental frame decoding, and a timer thread for schedule().
// Callbacks into the bound node are serialized by a per-host mutex so node
// logic sees the same single-threaded world as in simulation.
class TcpHost : public Host {
 public:
  explicit TcpHost(uint16_t port = 0);  // 0 = ephemeral port
  ~TcpHost() override;

  TimeMs now_ms() override;
  void schedule(TimeMs delay_ms, std::function<void()> fn) override;
  LinkId dial(const std::string& endpoint) override;
  bool send(LinkId link, const Bytes& frame_bytes) override;
  void close_link(LinkId link) override;
  std::string endpoint() const override;
  void bind(HostCallbacks* callbacks) override;

  uint16_t port() const { return port_; }
  void shutdown();

 private:
  struct Conn {
    int fd = -1;
    LinkId link = 0;
    std::mutex write_mu;
    FrameDecoder decoder;
    std::thread reader;
    std::atomic<bool> closed{false};
  };

  void accept_loop();
  void reader_loop(std::shared_ptr<Conn> conn);
  void timer_loop();
  std::shared_ptr<Conn> make_conn(int fd);
  void with_callbacks(const std::function<void(HostCallbacks&)>& fn);

  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  HostCallbacks* callbacks_ = nullptr;
  std::mutex node_mu_;  // serializes all callbacks into the node

  std::mutex conns_mu_;
  std::map<LinkId, std::shared_ptr<Conn>> conns_;
  std::atomic<uint64_t> next_link_{1};
  std::thread accept_thread_;
  std::vector<std::thread> dial_threads_;
  std::mutex dial_mu_;

  struct TimerEntry {
    TimeMs at;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const TimerEntry& o) const {
      return at != o.at ? at > o.at : seq > o.seq;
    }
  };
  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  std::priority_queue<TimerEntry, std::vector<TimerEntry>, std::greater<>> timers_;
  uint64_t timer_seq_ = 0;
  std::thread timer_thread_;
};

}  // namespace ftproxy
