#include "ftproxy/registry.hpp"

#include <utility>

namespace ftproxy {

const char* complete_result_name(CompleteResult r) {
  switch (r) {
    case CompleteResult::Delivered: return "DELIVERED";
    case CompleteResult::Duplicate: return "DUPLICATE";
    case CompleteResult::Unknown: return "UNKNOWN";
  }
  return "?";
}

void PendingRegistry::register_request(const RequestId& id, TimeMs registered_at_ms,
                                       TimeMs deadline_at_ms, ResponseAction on_response,
                                       TimeoutAction on_timeout) {
  std::lock_guard lock(mu_);
  if (pending_.contains(id) || tombstones_.contains(id))
    throw DuplicateRegistration("request id registered twice: " + id.str());
  Entry e;
  e.registered_at = registered_at_ms;
  e.deadline_at = deadline_at_ms;
  e.on_response = std::move(on_response);
  e.on_timeout = std::move(on_timeout);
  pending_.emplace(id, std::move(e));
}

CompleteResult PendingRegistry::complete(const ResponseEnvelope& response) {
  ResponseAction action;
  {
    std::lock_guard lock(mu_);
    auto it = pending_.find(response.request_id);
    if (it == pending_.end())
      return tombstones_.contains(response.request_id) ? CompleteResult::Duplicate
                                                       : CompleteResult::Unknown;
    action = std::move(it->second.on_response);
    pending_.erase(it);
    tombstones_.emplace(response.request_id, last_seen_now_ + retention_ms_);
  }
  if (action) action(response);
  return CompleteResult::Delivered;
}

std::vector<RequestId> PendingRegistry::expire(TimeMs now_ms) {
  std::vector<std::pair<RequestId, TimeoutAction>> fired;
  std::vector<RequestId> expired;
  {
    std::lock_guard lock(mu_);
    if (now_ms > last_seen_now_) last_seen_now_ = now_ms;
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (it->second.deadline_at <= now_ms) {
        fired.emplace_back(it->first, std::move(it->second.on_timeout));
        tombstones_.emplace(it->first, now_ms + retention_ms_);
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = tombstones_.begin(); it != tombstones_.end();) {
      if (it->second <= now_ms)
        it = tombstones_.erase(it);
      else
        ++it;
    }
  }
  expired.reserve(fired.size());
  for (auto& [id, action] : fired) {
    expired.push_back(id);
    if (action) {
      ResponseEnvelope synthetic;
      synthetic.request_id = id;
      synthetic.status = ResponseStatus::TimeoutSynthetic;
      action(synthetic);
    }
  }
  return expired;
}

bool PendingRegistry::cancel(const RequestId& id) {
  std::lock_guard lock(mu_);
  return pending_.erase(id) > 0;
}

size_t PendingRegistry::pending_count() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

size_t PendingRegistry::tombstone_count() const {
  std::lock_guard lock(mu_);
  return tombstones_.size();
}

}  // namespace ftproxy
