#include "doctest.h"
#include "ftproxy/pool.hpp"

using namespace ftproxy;

namespace {

PoolConfig two_spot_config() {
  PoolConfig cfg;
  cfg.desired_replicas = 2;
  cfg.placements = {{"aws", "us-west-1", ReplicaKind::Spot, 0.84, "replica-a"},
                    {"aws", "us-west-2", ReplicaKind::Spot, 0.84, "replica-b"}};
  cfg.relaunch_delay = LatencyModel::fixed(1'200'000);  // 20 min
  return cfg;
}

ServiceIdentity sid() { return derive_service_identity("svc", std::array<uint8_t, 32>{}, 1); }

}  // namespace

TEST_CASE("bootstrap provisions and the first tick runs everything") {
  PoolManager pool(two_spot_config(), sid(), 1);
  pool.bootstrap(0);
  CHECK(pool.running_count() == 0);
  auto events = pool.monitor_tick(0);
  CHECK(pool.running_count() == 2);
  CHECK(events.size() == 2);
  for (const auto& rec : pool.snapshot()) {
    CHECK(rec.state == ReplicaState::Running);
    CHECK(!rec.endpoint.empty());
    CHECK(rec.service_id == sid());
  }
}

TEST_CASE("preemption recovers at preempt time + relaunch delay, new endpoint, same identity") {
  auto cfg = two_spot_config();
  cfg.relaunch_delay = LatencyModel::fixed(1'200'000);
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  auto before = pool.snapshot();

  REQUIRE(pool.mark_preempted(before[0].replica_id, 100'000));
  CHECK(pool.running_count() == 1);
  CHECK(pool.monitor_tick(101'000).size() == 1);  // PREEMPTED -> RELAUNCHING
  CHECK(pool.monitor_tick(1'000'000).empty());    // still relaunching
  // Due at preempt + delay = 1'300'000, honored at the next tick after that.
  auto events = pool.monitor_tick(1'300'500);
  REQUIRE(events.size() == 1);
  CHECK(events[0].to == ReplicaState::Running);
  auto after = pool.snapshot();
  CHECK(after[0].endpoint != before[0].endpoint);
  CHECK(after[0].service_id == before[0].service_id);
  CHECK(after[0].replica_id == before[0].replica_id);
  CHECK(pool.running_count() == 2);
}

TEST_CASE("no preemptions means empty event lists") {
  PoolManager pool(two_spot_config(), sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  CHECK(pool.monitor_tick(1'000).empty());
  CHECK(pool.monitor_tick(2'000).empty());
}

TEST_CASE("staggered double preemption recovers both replicas") {
  auto cfg = two_spot_config();
  cfg.relaunch_delay = LatencyModel::fixed(10'000);
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  auto recs = pool.snapshot();

  pool.mark_preempted(recs[0].replica_id, 1'000);
  pool.monitor_tick(1'500);
  pool.mark_preempted(recs[1].replica_id, 5'000);
  pool.monitor_tick(5'500);
  CHECK(pool.running_count() == 0);  // overlap window is measurable
  pool.monitor_tick(11'200);
  CHECK(pool.running_count() == 1);
  pool.monitor_tick(15'100);
  CHECK(pool.running_count() == 2);
}

TEST_CASE("on-demand replicas never preempt") {
  PoolConfig cfg;
  cfg.desired_replicas = 1;
  cfg.placements = {{"aws", "us-east-1", ReplicaKind::OnDemand, 3.58}};
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  CHECK_FALSE(pool.mark_preempted(pool.snapshot()[0].replica_id, 100));
  CHECK(pool.running_count() == 1);
}

TEST_CASE("scale up provisions, scale down respects the floor") {
  PoolManager pool(two_spot_config(), sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  CHECK(pool.scale(true, 1, 10'000) == 3);
  auto recs = pool.snapshot();
  REQUIRE(recs.size() == 3);
  CHECK(recs[2].state == ReplicaState::Provisioning);
  CHECK_THROWS_AS(pool.scale(false, 3, 10'000), InvalidArgument);
  CHECK(pool.scale(false, 1, 11'000) == 2);
  CHECK(pool.scale(false, 1, 12'000) == 1);
  CHECK_THROWS_AS(pool.scale(false, 1, 13'000), InvalidArgument);
}

TEST_CASE("scale down retires the most expensive replica first") {
  PoolConfig cfg;
  cfg.desired_replicas = 2;
  cfg.placements = {{"aws", "us-west-1", ReplicaKind::OnDemand, 1.79, "pricey"},
                    {"aws", "us-west-2", ReplicaKind::Spot, 0.34, "cheap"}};
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  std::vector<std::string> retired;
  pool.set_retire_fn([&](const ReplicaRecord& rec) { retired.push_back(rec.name); });
  pool.scale(false, 1, 1'000);
  REQUIRE(retired.size() == 1);
  CHECK(retired[0] == "pricey");
  CHECK(pool.snapshot()[0].name == "cheap");
}

TEST_CASE("scale down tie-break picks the youngest") {
  PoolConfig cfg;
  cfg.desired_replicas = 1;
  cfg.placements = {{"aws", "r", ReplicaKind::Spot, 0.5, "old"}, {"aws", "r", ReplicaKind::Spot, 0.5, "young"}};
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  pool.scale(true, 1, 5'000);  // "young" created later
  std::vector<std::string> retired;
  pool.set_retire_fn([&](const ReplicaRecord& rec) { retired.push_back(rec.name); });
  pool.scale(false, 1, 6'000);
  REQUIRE(retired.size() == 1);
  CHECK(retired[0] == "young");
}

TEST_CASE("cost accrues linearly over billable states") {
  PoolConfig cfg;
  cfg.desired_replicas = 1;
  cfg.placements = {{"aws", "us-west-1", ReplicaKind::Spot, 0.34, "replica-a"}};
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  CHECK(pool.accrue_cost(2 * 3'600'000) == doctest::Approx(0.68).epsilon(1e-9));
}

TEST_CASE("two spot replicas cost matches the price-table ratio") {
  PoolManager pool(two_spot_config(), sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  double spot_pair = pool.accrue_cost(3'600'000);
  CHECK(spot_pair == doctest::Approx(1.68).epsilon(1e-9));
  CHECK(3.58 / spot_pair == doctest::Approx(2.13).epsilon(0.01));
}

TEST_CASE("preempted replicas stop billing mid-hour") {
  PoolConfig cfg;
  cfg.desired_replicas = 1;
  cfg.placements = {{"aws", "us-west-1", ReplicaKind::Spot, 1.0, "replica-a"}};
  cfg.relaunch_delay = LatencyModel::fixed(7'200'000);  // relaunch far away
  PoolManager pool(cfg, sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  pool.mark_preempted(pool.snapshot()[0].replica_id, 1'800'000);  // half hour in
  pool.monitor_tick(1'801'000);
  CHECK(pool.accrue_cost(3'600'000) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("cost is monotone in time") {
  PoolManager pool(two_spot_config(), sid(), 7);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  double prev = 0;
  for (TimeMs t = 0; t <= 10 * 3'600'000.0; t += 600'000) {
    double c = pool.accrue_cost(t);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("lifecycle events render one line per transition") {
  PoolManager pool(two_spot_config(), sid(), 1);
  pool.bootstrap(0);
  pool.monitor_tick(0);
  pool.mark_preempted(pool.snapshot()[0].replica_id, 50'000);
  auto& log = pool.event_log();
  REQUIRE(!log.empty());
  auto line = log.back().str();
  CHECK(line.find("RUNNING,PREEMPTED") != std::string::npos);
  CHECK(line.find("replica-a") != std::string::npos);
}
