#include "ftproxy/sizing.hpp"

#include <algorithm>
#include <cmath>

namespace ftproxy {

namespace {
constexpr double kBoundaryTol = 1e-12;

bool satisfies(double p_vm, int n, double p_target) {
  return std::pow(p_vm, n) <= p_target + kBoundaryTol;
}
}  // namespace

double vm_failure_probability(const VmFailureParams& params) {
  if (!(params.mean_uptime > 0) || !(params.mean_recovery >= 0) ||
      !std::isfinite(params.mean_uptime) || !std::isfinite(params.mean_recovery))
    throw InvalidArgument("uptime must be > 0 and recovery >= 0, both finite");
  return params.mean_recovery / (params.mean_uptime + params.mean_recovery);
}

double system_failure_probability(const std::vector<double>& per_vm) {
  if (per_vm.empty()) throw InvalidArgument("no VMs: system failure probability undefined");
  double p = 1.0;
  for (double q : per_vm) {
    if (q < 0.0 || q > 1.0) throw InvalidArgument("per-VM probability outside [0,1]");
    p *= q;
  }
  return p;
}

int required_replicas(double p_vm, double p_target) {
  if (!(p_vm > 0.0) || p_vm >= 1.0) throw InvalidArgument("p_vm must lie in (0,1)");
  if (!(p_target > 0.0) || p_target >= 1.0) throw InvalidArgument("p_target must lie in (0,1)");
  if (p_target >= p_vm) return 1;

  int n = static_cast<int>(std::ceil(std::log(p_target) / std::log(p_vm)));
  n = std::max(n, 1);
  while (n > 1 && satisfies(p_vm, n - 1, p_target)) --n;
  while (!satisfies(p_vm, n, p_target)) ++n;
  return n;
}

SizingResult size_deployment(const VmFailureParams& params, double p_target) {
  SizingResult res;
  res.p_vm = vm_failure_probability(params);
  res.n_required = required_replicas(res.p_vm, p_target);
  res.p_system = std::pow(res.p_vm, res.n_required);
  return res;
}

std::vector<CostRow> compare_plans(const std::vector<CostPlan>& plans) {
  if (plans.empty()) throw InvalidArgument("no cost plans given");
  std::vector<CostRow> rows;
  rows.reserve(plans.size());
  double cheapest = 0;
  for (const auto& plan : plans) {
    if (plan.hourly_prices.empty()) throw InvalidArgument("plan '" + plan.label + "' has no prices");
    double total = 0;
    for (double p : plan.hourly_prices) {
      if (!(p > 0)) throw InvalidArgument("non-positive price in plan '" + plan.label + "'");
      total += p;
    }
    if (rows.empty() || total < cheapest) cheapest = total;
    rows.push_back({plan.label, total, 0});
  }
  for (auto& row : rows) row.ratio_to_cheapest = row.total_hourly / cheapest;
  return rows;
}

std::vector<CostRow> cost_compare(double single_hourly, const std::vector<double>& replica_hourlies) {
  return compare_plans({{"single", {single_hourly}}, {"replicas", replica_hourlies}});
}

}  // namespace ftproxy
