#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ftproxy/simharness.hpp"

using namespace ftproxy;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Scenario base_scenario() {
  Scenario s;
  s.name = "unit";
  s.seed = 99;
  s.service_name = "svc";
  s.replicas = {
      {"replica-a", "aws", "us-west-1", ReplicaKind::Spot, 0.17, LatencyModel::exponential(100),
       LatencyModel::fixed(0)},
      {"replica-b", "aws", "us-west-2", ReplicaKind::Spot, 0.17, LatencyModel::exponential(100),
       LatencyModel::fixed(0)},
  };
  s.workload.requests = 200;
  s.workload.inter_arrival_ms = 400;
  s.workload.timeout_ms = 0;
  return s;
}

}  // namespace

TEST_CASE("single fixed replica: every latency is exactly the service time") {
  Scenario s = base_scenario();
  s.replicas.resize(1);
  s.replicas[0].service_latency = LatencyModel::fixed(50);
  s.workload.requests = 100;
  s.workload.inter_arrival_ms = 100;
  auto report = run_scenario(s);
  REQUIRE(report.records.size() == 100);
  for (const auto& r : report.records) {
    CHECK(r.status == RequestRecord::Status::Ok);
    CHECK(r.latency_ms == 50.0);
    CHECK(r.winner == "replica-a");
  }
  CHECK(report.success_rate == 1.0);
  CHECK(report.p50_ms == 50.0);
  CHECK(report.p99_ms == 50.0);
}

TEST_CASE("same seed, same bytes") {
  Scenario s = base_scenario();
  s.workload.requests = 150;
  auto r1 = run_scenario(s);
  auto r2 = run_scenario(s);
  auto p1 = tmp_path("ftproxy_det_1.csv");
  auto p2 = tmp_path("ftproxy_det_2.csv");
  emit_report(r1, p1);
  emit_report(r2, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(!slurp(p1).empty());
}

TEST_CASE("different seeds differ") {
  Scenario s = base_scenario();
  s.workload.requests = 50;
  auto r1 = run_scenario(s);
  s.seed = 100;
  auto r2 = run_scenario(s);
  bool any_differs = false;
  for (size_t i = 0; i < r1.records.size(); ++i)
    if (r1.records[i].latency_ms != r2.records[i].latency_ms) any_differs = true;
  CHECK(any_differs);
}

// Replica streams are keyed by name, so adding a replica never perturbs the
// others: per request, min over a superset can only be faster.
TEST_CASE("hedging never hurts, pointwise per request") {
  Scenario s3 = base_scenario();
  s3.replicas.push_back({"replica-c", "aws", "eu-west-1", ReplicaKind::Spot, 0.17,
                         LatencyModel::exponential(100), LatencyModel::fixed(0)});
  s3.workload.requests = 300;

  Scenario s2 = s3;
  s2.replicas.resize(2);
  Scenario s1 = s3;
  s1.replicas.resize(1);

  auto r1 = run_scenario(s1), r2 = run_scenario(s2), r3 = run_scenario(s3);
  REQUIRE(r1.records.size() == 300);
  for (size_t i = 0; i < 300; ++i) {
    CHECK(r3.records[i].latency_ms <= r2.records[i].latency_ms);
    CHECK(r2.records[i].latency_ms <= r1.records[i].latency_ms);
  }
  CHECK(r3.mean_ms <= r2.mean_ms);
  CHECK(r2.mean_ms <= r1.mean_ms);
  CHECK(r3.p99_ms <= r2.p99_ms);
  CHECK(r2.p99_ms <= r1.p99_ms);
}

TEST_CASE("conservation: submitted = delivered + timed_out + unavailable") {
  Scenario s = base_scenario();
  s.workload.requests = 120;
  s.workload.inter_arrival_ms = 100;
  s.workload.timeout_ms = 400;
  s.relaunch_delay = LatencyModel::fixed(4'000);
  // Both replicas die mid-run; some requests time out, some find zero links.
  s.preemption = {{"replica-a", 4'000.0, std::nullopt}, {"replica-b", 4'200.0, std::nullopt}};
  auto report = run_scenario(s);
  CHECK(report.submitted == 120);
  CHECK(report.delivered + report.timed_out + report.unavailable == report.submitted);
  CHECK(report.timed_out > 0);
  CHECK(report.unavailable > 0);
  CHECK(report.delivered > 0);
  CHECK(report.p50_ms <= report.p99_ms);
}

TEST_CASE("preempted replica relaunches at a fresh endpoint and rejoins") {
  Scenario s = base_scenario();
  s.workload.requests = 0;
  s.relaunch_delay = LatencyModel::fixed(3'000);
  SimCluster cluster(s);
  cluster.run_until(1'000);
  REQUIRE(cluster.robot().peers().up_count() == 2);

  auto before = cluster.pool().snapshot();
  cluster.preempt("replica-a");
  cluster.run_until(2'500);
  CHECK(cluster.robot().peers().up_count() == 1);
  cluster.run_until(10'000);
  CHECK(cluster.robot().peers().up_count() == 2);
  auto after = cluster.pool().snapshot();
  CHECK(after[0].endpoint != before[0].endpoint);
  CHECK(after[0].service_id == before[0].service_id);
  CHECK(cluster.pool().event_log().back().to == ReplicaState::Running);
}

TEST_CASE("gateway topology with zero hop matches direct, byte for byte") {
  Scenario direct = base_scenario();
  direct.workload.requests = 250;
  Scenario via_gw = direct;
  via_gw.topology = TopologyKind::Gateway;
  via_gw.gateway_hop = LatencyModel::fixed(0);

  auto rd = run_scenario(direct);
  auto rg = run_scenario(via_gw);
  auto pd = tmp_path("ftproxy_direct.csv");
  auto pg = tmp_path("ftproxy_gw.csv");
  // Cost is pool time-based and identical; compare full CSVs.
  emit_report(rd, pd);
  emit_report(rg, pg);
  CHECK(slurp(pd) == slurp(pg));
}

TEST_CASE("regional slowdown adds its latency once per affected request") {
  Scenario s = base_scenario();
  s.replicas.resize(1);
  s.replicas[0].service_latency = LatencyModel::fixed(40);
  s.replicas[0].region = "us-west-1";
  s.workload.requests = 50;
  s.workload.inter_arrival_ms = 200;
  s.regional_slowdown = {{"us-west-1", 100, 0, 1e9}};
  auto report = run_scenario(s);
  for (const auto& r : report.records) CHECK(r.latency_ms == 140.0);
}

TEST_CASE("emit_report golden bytes for three known records") {
  RunReport report;
  report.records.resize(3);
  report.records[0] = {RequestId{0xAB, 1}, 1000, 1030.5, 30.5, "replica-a", RequestRecord::Status::Ok};
  report.records[1] = {RequestId{0xAB, 2}, 1100, 1600, 500, "-", RequestRecord::Status::Timeout};
  report.records[2] = {RequestId{0xAB, 3}, 1200, 1200, 0, "-", RequestRecord::Status::Unavailable};
  report.finalize();
  report.cost_usd = 0.12345;
  auto path = tmp_path("ftproxy_golden.csv");
  emit_report(report, path);
  CHECK(slurp(path) ==
        "request_id,submit_ms,deliver_ms,latency_ms,winner,status\n"
        "00000000000000ab-1,1000.000,1030.500,30.500,replica-a,ok\n"
        "00000000000000ab-2,1100.000,1600.000,500.000,-,timeout\n"
        "00000000000000ab-3,1200.000,1200.000,0.000,-,unavailable\n"
        "# aggregate requests=3 delivered=1 timeouts=1 unavailable=1 mean_ms=30.500 "
        "p50_ms=30.500 p99_ms=30.500 success_rate=0.333333 cost_usd=0.123450\n");
}

TEST_CASE("empty report emits only the header") {
  RunReport report;
  report.finalize();
  auto path = tmp_path("ftproxy_empty.csv");
  emit_report(report, path);
  CHECK(slurp(path) == "request_id,submit_ms,deliver_ms,latency_ms,winner,status\n");
}

TEST_CASE("aggregate line carries the format contract") {
  Scenario s = base_scenario();
  s.workload.requests = 20;
  auto report = run_scenario(s);
  auto line = report.aggregate_line();
  for (const char* token : {"mean_ms=", "p50_ms=", "p99_ms=", "success_rate=", "cost_usd="})
    CHECK(line.find(token) != std::string::npos);
}

TEST_CASE("cdf and pool event emission") {
  Scenario s = base_scenario();
  s.workload.requests = 30;
  auto report = run_scenario(s);
  auto cdf_path = tmp_path("ftproxy_cdf.csv");
  emit_cdf(report, cdf_path);
  auto text = slurp(cdf_path);
  CHECK(text.starts_with("latency_ms,cum_fraction\n"));
  CHECK(text.find(",1.000000\n") != std::string::npos);

  auto ev_path = tmp_path("ftproxy_events.csv");
  emit_pool_events(report, ev_path);
  CHECK(slurp(ev_path).starts_with("time_ms,replica_id,name,from,to,endpoint\n"));
}

TEST_CASE("io failures surface with path context") {
  RunReport report;
  CHECK_THROWS_WITH_AS(emit_report(report, "/nonexistent-dir/x.csv"),
                       doctest::Contains("/nonexistent-dir/x.csv"), std::runtime_error);
}
