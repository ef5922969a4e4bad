#pragma once

#include <functional>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "ftproxy/common.hpp"
#include "ftproxy/envelope.hpp"

namespace ftproxy {

enum class CompleteResult {
  Delivered,  // entry was pending; this call consumed it
  Duplicate,  // id already resolved within the retention window
  Unknown,    // id never registered (or resolved and forgotten)
};

const char* complete_result_name(CompleteResult r);

class DuplicateRegistration : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Pending-request table on the robot-side proxy. Guarantees exactly-once
// resolution per id under any interleaving of complete() and expire(): the
// completion action or the timeout action fires, never both, never twice.
//
// Resolved ids leave a tombstone for `retention_ms` so straggler responses
// classify as Duplicate instead of Unknown; after the window they are
// forgotten entirely. Time is an explicit parameter throughout, so the
// discrete-event harness and wall-clock mode share this code unchanged.
class PendingRegistry {
 public:
  using ResponseAction = std::function<void(const ResponseEnvelope&)>;
  using TimeoutAction = std::function<void(const ResponseEnvelope&)>;

  static constexpr TimeMs kDefaultRetentionMs = 60'000;

  explicit PendingRegistry(TimeMs retention_ms = kDefaultRetentionMs)
      : retention_ms_(retention_ms) {}

  // deadline_at_ms is absolute; pass kNoDeadline for none.
  // Throws DuplicateRegistration if the id is pending or tombstoned.
  void register_request(const RequestId& id, TimeMs registered_at_ms, TimeMs deadline_at_ms,
                        ResponseAction on_response, TimeoutAction on_timeout);

  // Actions run outside the internal lock.
  CompleteResult complete(const ResponseEnvelope& response);

  // Fires on_timeout (with a synthetic TIMEOUT_SYNTHETIC response) for every
  // pending entry whose deadline_at <= now, removes them, and returns their
  // ids. Also forgets tombstones older than the retention window.
  std::vector<RequestId> expire(TimeMs now_ms);

  // Administrative rollback for an entry whose request was never sent
  // anywhere: removes it without firing either action or leaving a tombstone.
  bool cancel(const RequestId& id);

  size_t pending_count() const;
  size_t tombstone_count() const;

 private:
  struct Entry {
    TimeMs registered_at = 0;
    TimeMs deadline_at = kNoDeadline;
    ResponseAction on_response;
    TimeoutAction on_timeout;
  };

  TimeMs retention_ms_;
  mutable std::mutex mu_;
  std::unordered_map<RequestId, Entry, RequestIdHash> pending_;
  std::unordered_map<RequestId, TimeMs, RequestIdHash> tombstones_;  // id -> forget-at time
  TimeMs last_seen_now_ = 0;
};

}  // namespace ftproxy
