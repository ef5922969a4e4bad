#include "ftproxy/tcp_net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace ftproxy {

namespace {

std::chrono::steady_clock::time_point process_epoch() {
  static const auto epoch = std::chrono::steady_clock::now();
  return epoch;
}

bool parse_endpoint(const std::string& endpoint, sockaddr_in& addr) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) return false;
  std::string host = endpoint.substr(0, colon);
  int port = std::atoi(endpoint.c_str() + colon + 1);
  if (port <= 0 || port > 65535) return false;
  std::memset(&addr, 0, sizeof addr);
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  return inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1;
}

}  // namespace

TcpHost::TcpHost(uint16_t port) {
  process_epoch();
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("bind() failed on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("listen() failed");
  }
  accept_thread_ = std::thread([this] { accept_loop(); });
  timer_thread_ = std::thread([this] { timer_loop(); });
}

TcpHost::~TcpHost() { shutdown(); }

void TcpHost::shutdown() {
  bool expected = false;
  if (!stopping_.compare_exchange_strong(expected, true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  timer_cv_.notify_all();
  {
    std::lock_guard lock(conns_mu_);
    for (auto& [id, conn] : conns_)
      if (!conn->closed.exchange(true)) ::shutdown(conn->fd, SHUT_RDWR);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  if (timer_thread_.joinable()) timer_thread_.join();
  {
    std::lock_guard lock(dial_mu_);
    for (auto& t : dial_threads_)
      if (t.joinable()) t.join();
  }
  std::map<LinkId, std::shared_ptr<Conn>> conns;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
  }
  for (auto& [id, conn] : conns) {
    if (conn->reader.joinable()) conn->reader.join();
    ::close(conn->fd);
  }
}

TimeMs TcpHost::now_ms() {
  auto dt = std::chrono::steady_clock::now() - process_epoch();
  return std::chrono::duration<double, std::milli>(dt).count();
}

void TcpHost::schedule(TimeMs delay_ms, std::function<void()> fn) {
  {
    std::lock_guard lock(timer_mu_);
    timers_.push(TimerEntry{now_ms() + delay_ms, timer_seq_++, std::move(fn)});
  }
  timer_cv_.notify_all();
}

void TcpHost::timer_loop() {
  std::unique_lock lock(timer_mu_);
  while (!stopping_) {
    if (timers_.empty()) {
      timer_cv_.wait(lock);
      continue;
    }
    TimeMs next = timers_.top().at;
    if (now_ms() < next) {
      auto wake = process_epoch() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double, std::milli>(next));
      timer_cv_.wait_until(lock, wake);
      continue;
    }
    auto fn = std::move(const_cast<TimerEntry&>(timers_.top()).fn);
    timers_.pop();
    lock.unlock();
    with_callbacks([&fn](HostCallbacks&) { fn(); });
    lock.lock();
  }
}

void TcpHost::with_callbacks(const std::function<void(HostCallbacks&)>& fn) {
  std::lock_guard lock(node_mu_);
  if (callbacks_) fn(*callbacks_);
}

std::shared_ptr<TcpHost::Conn> TcpHost::make_conn(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  auto conn = std::make_shared<Conn>();
  conn->fd = fd;
  conn->link = next_link_.fetch_add(1);
  {
    std::lock_guard lock(conns_mu_);
    conns_[conn->link] = conn;
  }
  return conn;
}

void TcpHost::accept_loop() {
  while (!stopping_) {
    sockaddr_in peer{};
    socklen_t len = sizeof peer;
    int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len);
    if (fd < 0) {
      if (stopping_) return;
      continue;
    }
    auto conn = make_conn(fd);
    char ip[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof ip);
    std::string remote = std::string(ip) + ":" + std::to_string(ntohs(peer.sin_port));
    with_callbacks([&](HostCallbacks& cb) { cb.on_link_up(conn->link, remote); });
    conn->reader = std::thread([this, conn] { reader_loop(conn); });
  }
}

LinkId TcpHost::dial(const std::string& endpoint) {
  LinkId link = next_link_.fetch_add(1);
  std::lock_guard dial_lock(dial_mu_);
  dial_threads_.emplace_back([this, link, endpoint] {
    sockaddr_in addr{};
    int fd = -1;
    bool ok = parse_endpoint(endpoint, addr);
    if (ok) {
      fd = ::socket(AF_INET, SOCK_STREAM, 0);
      ok = fd >= 0 && ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
    }
    if (!ok || stopping_) {
      if (fd >= 0) ::close(fd);
      with_callbacks([&](HostCallbacks& cb) { cb.on_link_reset(link); });
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Conn>();
    conn->fd = fd;
    conn->link = link;
    {
      std::lock_guard lock(conns_mu_);
      conns_[link] = conn;
    }
    with_callbacks([&](HostCallbacks& cb) { cb.on_link_up(link, endpoint); });
    conn->reader = std::thread([this, conn] { reader_loop(conn); });
  });
  return link;
}

void TcpHost::reader_loop(std::shared_ptr<Conn> conn) {
  uint8_t buf[16384];
  while (!stopping_ && !conn->closed) {
    ssize_t n = ::read(conn->fd, buf, sizeof buf);
    if (n <= 0) break;
    conn->decoder.feed(std::span<const uint8_t>(buf, static_cast<size_t>(n)));
    for (;;) {
      Frame frame;
      DecodeStatus status = conn->decoder.next(frame);
      if (status == DecodeStatus::Ok) {
        with_callbacks([&](HostCallbacks& cb) { cb.on_frame(conn->link, frame); });
        continue;
      }
      if (status == DecodeStatus::NeedMore) break;
      // Unrecoverable framing error: surface once and drop the connection.
      with_callbacks([&](HostCallbacks& cb) { cb.on_frame_error(conn->link, status); });
      conn->closed = true;
      break;
    }
  }
  conn->closed = true;
  ::shutdown(conn->fd, SHUT_RDWR);
  // Delivered for every dead connection, including ones the node closed
  // itself; reset handlers are idempotent.
  if (!stopping_) with_callbacks([&](HostCallbacks& cb) { cb.on_link_reset(conn->link); });
}

bool TcpHost::send(LinkId link, const Bytes& frame_bytes) {
  std::shared_ptr<Conn> conn;
  {
    std::lock_guard lock(conns_mu_);
    auto it = conns_.find(link);
    if (it == conns_.end()) return false;
    conn = it->second;
  }
  if (conn->closed) return false;
  std::lock_guard write_lock(conn->write_mu);
  size_t off = 0;
  while (off < frame_bytes.size()) {
    ssize_t n = ::send(conn->fd, frame_bytes.data() + off, frame_bytes.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      conn->closed = true;
      return false;
    }
    off += static_cast<size_t>(n);
  }
  return true;
}

void TcpHost::close_link(LinkId link) {
  std::shared_ptr<Conn> conn;
  {
    std::lock_guard lock(conns_mu_);
    auto it = conns_.find(link);
    if (it == conns_.end()) return;
    conn = it->second;
  }
  if (!conn->closed.exchange(true)) ::shutdown(conn->fd, SHUT_RDWR);
}

std::string TcpHost::endpoint() const { return "127.0.0.1:" + std::to_string(port_); }

void TcpHost::bind(HostCallbacks* callbacks) {
  std::lock_guard lock(node_mu_);
  callbacks_ = callbacks;
}

}  // namespace ftproxy
