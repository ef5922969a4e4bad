#include "ftproxy/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace ftproxy {

ServiceIdentity Scenario::service_id() const {
  std::array<uint8_t, 32> fingerprint{};  // credentials are opaque; sim uses zeros
  return derive_service_identity(service_name, fingerprint, protocol_version);
}

const ReplicaSpec* Scenario::replica_spec(const std::string& name) const {
  for (const auto& r : replicas)
    if (r.name == name) return &r;
  return nullptr;
}

void Scenario::validate() const {
  std::vector<std::string> errors;
  auto bad = [&errors](const std::string& field, const std::string& why) {
    errors.push_back(field + ": " + why);
  };

  if (schema_version != 1) bad("schema_version", "unsupported (expected 1)");
  if (service_name.empty()) bad("service", "must be non-empty");
  if (replicas.empty()) bad("replicas", "at least one replica required");

  std::set<std::string> names;
  for (size_t i = 0; i < replicas.size(); ++i) {
    const auto& r = replicas[i];
    std::string field = "replicas[" + std::to_string(i) + "]";
    if (r.name.empty()) bad(field + ".name", "must be non-empty");
    if (!names.insert(r.name).second) bad(field + ".name", "duplicate name '" + r.name + "'");
    if (r.hourly_cost < 0) bad(field + ".hourly_cost", "must be >= 0");
  }

  if (workload.inter_arrival_ms <= 0) bad("workload.inter_arrival_ms", "must be > 0");
  if (workload.payload_bytes > kDefaultMaxFrameBody)
    bad("workload.payload_bytes", "exceeds max frame body");

  for (size_t i = 0; i < regional_slowdown.size(); ++i) {
    const auto& w = regional_slowdown[i];
    std::string field = "faults.regional_slowdown[" + std::to_string(i) + "]";
    if (w.region.empty()) bad(field + ".region", "must be non-empty");
    if (!(w.start < w.end)) bad(field, "window must satisfy start < end");
    if (w.added_latency_ms < 0) bad(field + ".added_latency_ms", "must be >= 0");
  }
  for (size_t i = 0; i < contention.size(); ++i) {
    const auto& c = contention[i];
    std::string field = "faults.contention[" + std::to_string(i) + "]";
    if (!replica_spec(c.replica)) bad(field + ".replica", "unknown replica '" + c.replica + "'");
    if (c.period_ms <= 0) bad(field + ".period_ms", "must be > 0");
    if (c.service_ms <= 0) bad(field + ".service_ms", "must be > 0");
    if (c.end_ms != 0 && !(c.start_ms < c.end_ms)) bad(field, "window must satisfy start < end");
  }
  for (size_t i = 0; i < preemption.size(); ++i) {
    const auto& p = preemption[i];
    std::string field = "faults.preemption[" + std::to_string(i) + "]";
    if (!replica_spec(p.replica)) bad(field + ".replica", "unknown replica '" + p.replica + "'");
    if (!p.at_ms && !p.mean_interval_ms) bad(field, "needs at_ms or mean_interval_ms");
    if (p.at_ms && p.mean_interval_ms) bad(field, "at_ms and mean_interval_ms are exclusive");
    if (p.mean_interval_ms && *p.mean_interval_ms <= 0) bad(field + ".mean_interval_ms", "must be > 0");
  }
  for (size_t i = 0; i < discovery_outage.size(); ++i) {
    const auto& o = discovery_outage[i];
    if (o.end_ms != 0 && !(o.start_ms < o.end_ms))
      bad("faults.discovery_outage[" + std::to_string(i) + "]", "window must satisfy start < end");
  }
  if (monitor_interval_ms <= 0) bad("pool.monitor_interval_ms", "must be > 0");

  if (!errors.empty()) {
    std::ostringstream what;
    what << "invalid scenario '" << name << "' (" << errors.size() << " problem"
         << (errors.size() == 1 ? "" : "s") << "):";
    for (const auto& e : errors) what << "\n  - " << e;
    throw ScenarioError(what.str(), std::move(errors));
  }
}

namespace {

LatencyModel parse_model(const YAML::Node& node, const std::string& field) {
  if (!node || !node.IsMap()) throw ScenarioError(field + ": expected a latency model map", {field});
  std::string kind = node["kind"].as<std::string>("fixed");
  try {
    if (kind == "fixed") {
      double v = node["value_ms"] ? node["value_ms"].as<double>() : node["mean_ms"].as<double>(0.0);
      return LatencyModel::fixed(v);
    }
    if (kind == "exponential") return LatencyModel::exponential(node["mean_ms"].as<double>());
    if (kind == "lognormal")
      return LatencyModel::lognormal(node["mu_ln"].as<double>(), node["sigma_ln"].as<double>());
    if (kind == "empirical") {
      std::string path = node["file"].as<std::string>();
      std::ifstream in(path);
      if (!in) throw ScenarioError(field + ".file: cannot open '" + path + "'", {field});
      std::vector<double> samples;
      double v;
      while (in >> v) samples.push_back(v);
      return LatencyModel::empirical(std::move(samples));
    }
  } catch (const InvalidArgument& e) {
    throw ScenarioError(field + ": " + e.what(), {field});
  } catch (const YAML::Exception& e) {
    throw ScenarioError(field + ": " + e.what(), {field});
  }
  throw ScenarioError(field + ".kind: unknown latency model '" + kind + "'", {field});
}

Scenario parse(const YAML::Node& root) {
  Scenario s;
  s.schema_version = root["schema_version"].as<int>(0);
  s.name = root["name"].as<std::string>("scenario");
  s.seed = root["seed"].as<uint64_t>(1);
  s.service_name = root["service"].as<std::string>("service");
  s.protocol_version = root["protocol_version"].as<uint32_t>(1);

  std::string topo = root["topology"].as<std::string>("direct");
  if (topo == "direct")
    s.topology = TopologyKind::Direct;
  else if (topo == "gateway")
    s.topology = TopologyKind::Gateway;
  else
    throw ScenarioError("topology: expected 'direct' or 'gateway', got '" + topo + "'", {"topology"});
  if (root["gateway_hop"]) s.gateway_hop = parse_model(root["gateway_hop"], "gateway_hop");

  for (size_t i = 0; const auto& rn : root["replicas"]) {
    std::string field = "replicas[" + std::to_string(i++) + "]";
    ReplicaSpec r;
    r.name = rn["name"].as<std::string>("");
    r.provider = rn["provider"].as<std::string>("sim");
    r.region = rn["region"].as<std::string>("");
    std::string kind = rn["kind"].as<std::string>("spot");
    if (kind == "spot")
      r.kind = ReplicaKind::Spot;
    else if (kind == "on_demand")
      r.kind = ReplicaKind::OnDemand;
    else
      throw ScenarioError(field + ".kind: expected 'spot' or 'on_demand'", {field});
    r.hourly_cost = rn["hourly_cost"].as<double>(0.0);
    if (rn["service_latency"]) r.service_latency = parse_model(rn["service_latency"], field + ".service_latency");
    if (rn["network_latency"]) r.network_latency = parse_model(rn["network_latency"], field + ".network_latency");
    s.replicas.push_back(std::move(r));
  }

  if (const auto& w = root["workload"]) {
    s.workload.requests = w["requests"].as<uint64_t>(0);
    s.workload.inter_arrival_ms = w["inter_arrival_ms"].as<double>(100.0);
    s.workload.timeout_ms = w["timeout_ms"].as<uint64_t>(0);
    s.workload.payload_bytes = w["payload_bytes"].as<size_t>(64);
    s.workload.start_ms = w["start_ms"].as<double>(1'000.0);
  }

  if (const auto& p = root["pool"]) {
    if (p["relaunch_delay"]) s.relaunch_delay = parse_model(p["relaunch_delay"], "pool.relaunch_delay");
    s.monitor_interval_ms = p["monitor_interval_ms"].as<double>(1'000.0);
  }

  if (const auto& f = root["faults"]) {
    for (const auto& n : f["regional_slowdown"]) {
      SlowdownWindow w;
      w.region = n["region"].as<std::string>("");
      w.added_latency_ms = n["added_latency_ms"].as<double>(0.0);
      w.start = n["start_ms"].as<double>(0.0);
      w.end = n["end_ms"].as<double>(0.0);
      s.regional_slowdown.push_back(std::move(w));
    }
    for (const auto& n : f["contention"]) {
      ContentionSpec c;
      c.replica = n["replica"].as<std::string>("");
      c.period_ms = n["period_ms"].as<double>(0.0);
      c.service_ms = n["service_ms"].as<double>(0.0);
      c.start_ms = n["start_ms"].as<double>(0.0);
      c.end_ms = n["end_ms"].as<double>(0.0);
      s.contention.push_back(std::move(c));
    }
    for (const auto& n : f["preemption"]) {
      PreemptionSpec p2;
      p2.replica = n["replica"].as<std::string>("");
      if (n["at_ms"]) p2.at_ms = n["at_ms"].as<double>();
      if (n["mean_interval_ms"]) p2.mean_interval_ms = n["mean_interval_ms"].as<double>();
      s.preemption.push_back(std::move(p2));
    }
    for (const auto& n : f["discovery_outage"]) {
      DiscoveryOutage o;
      o.start_ms = n["start_ms"].as<double>(0.0);
      o.end_ms = n["end_ms"].as<double>(0.0);
      s.discovery_outage.push_back(o);
    }
  }

  s.validate();
  return s;
}

}  // namespace

Scenario Scenario::from_yaml_file(const std::string& path) {
  try {
    return parse(YAML::LoadFile(path));
  } catch (const YAML::Exception& e) {
    throw ScenarioError("cannot parse scenario '" + path + "': " + e.what(), {});
  }
}

Scenario Scenario::from_yaml_string(const std::string& text) {
  try {
    return parse(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("cannot parse scenario: ") + e.what(), {});
  }
}

}  // namespace ftproxy
