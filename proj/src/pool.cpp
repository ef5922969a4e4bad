#include "ftproxy/pool.hpp"

#include <algorithm>
#include <cstdio>

namespace ftproxy {

const char* replica_kind_name(ReplicaKind k) {
  return k == ReplicaKind::Spot ? "SPOT" : "ON_DEMAND";
}

const char* replica_state_name(ReplicaState s) {
  switch (s) {
    case ReplicaState::Provisioning: return "PROVISIONING";
    case ReplicaState::Running: return "RUNNING";
    case ReplicaState::Preempted: return "PREEMPTED";
    case ReplicaState::Relaunching: return "RELAUNCHING";
  }
  return "?";
}

std::string LifecycleEvent::str() const {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%.3f,%llu,%s,%s,%s,%s", time,
                static_cast<unsigned long long>(replica_id), name.c_str(),
                replica_state_name(from), replica_state_name(to), endpoint.c_str());
  return buf;
}

PoolManager::PoolManager(PoolConfig cfg, ServiceIdentity service_id, uint64_t seed)
    : cfg_(std::move(cfg)), service_id_(service_id), relaunch_rng_(seed, "pool/relaunch") {
  if (cfg_.desired_replicas < 1) throw InvalidArgument("desired_replicas must be >= 1");
  if (cfg_.placements.empty()) throw InvalidArgument("pool needs at least one placement");
  desired_ = cfg_.desired_replicas;
}

ReplicaRecord& PoolManager::add_record(TimeMs now) {
  const Placement& p = cfg_.placements[next_placement_ % cfg_.placements.size()];
  ++next_placement_;
  ReplicaRecord rec;
  rec.replica_id = next_replica_id_++;
  bool name_taken = !p.name.empty() && std::any_of(records_.begin(), records_.end(),
                                                   [&](const auto& r) { return r.name == p.name; });
  rec.name = (!p.name.empty() && !name_taken) ? p.name : "replica-" + std::to_string(rec.replica_id);
  rec.service_id = service_id_;
  rec.provider = p.provider;
  rec.region = p.region;
  rec.kind = p.kind;
  rec.hourly_cost = p.hourly_cost;
  rec.state = ReplicaState::Provisioning;
  rec.state_since = now;
  rec.created_at = now;
  rec.due_at = now;
  records_.push_back(std::move(rec));
  return records_.back();
}

void PoolManager::bootstrap(TimeMs now) {
  for (int i = 0; i < desired_; ++i) {
    ReplicaRecord& rec = add_record(now);
    event_log_.push_back({now, rec.replica_id, rec.name, ReplicaState::Provisioning,
                          ReplicaState::Provisioning, rec.endpoint});
  }
}

void PoolManager::settle_billing(ReplicaRecord& rec, TimeMs now) {
  if (billable(rec.state))
    rec.accrued_usd += rec.hourly_cost * (now - rec.state_since) / 3'600'000.0;
}

void PoolManager::transition(ReplicaRecord& rec, ReplicaState to, TimeMs now,
                             std::vector<LifecycleEvent>* out) {
  settle_billing(rec, now);
  LifecycleEvent ev{now, rec.replica_id, rec.name, rec.state, to, rec.endpoint};
  rec.state = to;
  rec.state_since = now;
  event_log_.push_back(ev);
  if (out) out->push_back(std::move(ev));
}

std::vector<LifecycleEvent> PoolManager::monitor_tick(TimeMs now) {
  std::vector<LifecycleEvent> events;
  bool changed = false;
  for (auto& rec : records_) {
    if (rec.state == ReplicaState::Preempted) {
      // Relaunch delay counts from the preemption itself, not from this tick.
      rec.due_at = rec.state_since + cfg_.relaunch_delay.sample(relaunch_rng_);
      transition(rec, ReplicaState::Relaunching, now, &events);
    }
  }
  for (auto& rec : records_) {
    bool coming_up = (rec.state == ReplicaState::Relaunching ||
                      rec.state == ReplicaState::Provisioning) &&
                     rec.due_at <= now;
    if (!coming_up) continue;
    ++rec.incarnation;
    rec.endpoint = provision_fn_ ? provision_fn_(rec)
                                 : "sim://" + rec.name + "#" + std::to_string(rec.incarnation);
    transition(rec, ReplicaState::Running, now, &events);
    changed = true;
  }
  if (changed && pool_change_fn_) pool_change_fn_();
  return events;
}

bool PoolManager::mark_preempted(uint64_t replica_id, TimeMs now) {
  for (auto& rec : records_) {
    if (rec.replica_id != replica_id) continue;
    if (rec.kind == ReplicaKind::OnDemand) return false;
    if (rec.state != ReplicaState::Running) return false;
    transition(rec, ReplicaState::Preempted, now, nullptr);
    if (retire_fn_) retire_fn_(rec);
    return true;
  }
  return false;
}

int PoolManager::scale(bool up, int count, TimeMs now) {
  if (count < 1) throw InvalidArgument("scale count must be >= 1");
  if (!up && desired_ - count < 1)
    throw InvalidArgument("scale down would leave fewer than one replica");

  if (up) {
    desired_ += count;
    for (int i = 0; i < count; ++i) {
      ReplicaRecord& rec = add_record(now);
      event_log_.push_back({now, rec.replica_id, rec.name, ReplicaState::Provisioning,
                            ReplicaState::Provisioning, rec.endpoint});
    }
  } else {
    desired_ -= count;
    for (int i = 0; i < count; ++i) {
      // Most expensive retires first; ties go to the youngest.
      auto victim = std::max_element(records_.begin(), records_.end(),
                                     [](const ReplicaRecord& a, const ReplicaRecord& b) {
                                       if (a.hourly_cost != b.hourly_cost)
                                         return a.hourly_cost < b.hourly_cost;
                                       return a.created_at < b.created_at;
                                     });
      settle_billing(*victim, now);
      retired_cost_ += victim->accrued_usd;
      event_log_.push_back({now, victim->replica_id, victim->name, victim->state,
                            victim->state, "retired"});
      if (retire_fn_) retire_fn_(*victim);
      records_.erase(victim);
    }
  }
  if (pool_change_fn_) pool_change_fn_();
  return desired_;
}

double PoolManager::accrue_cost(TimeMs now) const {
  double total = retired_cost_;
  for (const auto& rec : records_) {
    total += rec.accrued_usd;
    if (billable(rec.state)) total += rec.hourly_cost * (now - rec.state_since) / 3'600'000.0;
  }
  return total;
}

size_t PoolManager::running_count() const {
  return static_cast<size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) {
    return r.state == ReplicaState::Running;
  }));
}

std::optional<std::string> PoolManager::name_of(uint64_t replica_id) const {
  for (const auto& rec : records_)
    if (rec.replica_id == replica_id) return rec.name;
  return std::nullopt;
}

}  // namespace ftproxy
