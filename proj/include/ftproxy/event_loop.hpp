#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "ftproxy/common.hpp"

namespace ftproxy {

// Single-threaded discrete-event core. Events pop in (time, insertion order):
// FIFO among equal timestamps, so runs are exactly reproducible.
class EventLoop {
 public:
  using Action = std::function<void()>;

  TimeMs now() const { return now_; }

  void schedule_at(TimeMs t, Action fn) {
    if (t < now_) t = now_;
    heap_.push(Event{t, next_seq_++, std::move(fn)});
  }

  void schedule_in(TimeMs delay, Action fn) { schedule_at(now_ + delay, std::move(fn)); }

  // Executes every event with time <= horizon, then advances now to horizon.
  // Later events stay queued (periodic tasks may reschedule forever).
  void run_until(TimeMs horizon) {
    while (!heap_.empty() && heap_.top().time <= horizon) {
      Event ev = std::move(const_cast<Event&>(heap_.top()));
      heap_.pop();
      now_ = ev.time;
      ev.fn();
    }
    if (horizon > now_) now_ = horizon;
  }

  bool empty() const { return heap_.empty(); }
  size_t queued() const { return heap_.size(); }

 private:
  struct Event {
    TimeMs time;
    uint64_t seq;
    Action fn;

    bool operator>(const Event& other) const {
      if (time != other.time) return time > other.time;
      return seq > other.seq;
    }
  };

  TimeMs now_ = 0;
  uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
};

}  // namespace ftproxy
