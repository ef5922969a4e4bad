#pragma once

#include <string>
#include <vector>

#include "ftproxy/common.hpp"

namespace ftproxy {

struct VmFailureParams {
  double mean_uptime = 0;    // time between failures; any unit, consistent with recovery
  double mean_recovery = 0;  // downtime per failure
};

struct SizingResult {
  double p_vm = 0;
  double p_system = 0;
  int n_required = 0;
};

// P(VM unavailable at a random moment) = recovery / (uptime + recovery).
double vm_failure_probability(const VmFailureParams& params);

// All replicas down simultaneously: product of the per-VM probabilities.
double system_failure_probability(const std::vector<double>& per_vm);

// Smallest N with p_vm^N <= p_target, i.e. ceil(log p_target / log p_vm).
// Boundary ties within 1e-12 of p_target resolve toward the smaller N, so
// log round-off cannot disagree with repeated multiplication.
int required_replicas(double p_vm, double p_target);

SizingResult size_deployment(const VmFailureParams& params, double p_target);

struct CostPlan {
  std::string label;
  std::vector<double> hourly_prices;
};

struct CostRow {
  std::string label;
  double total_hourly = 0;
  double ratio_to_cheapest = 0;
};

// Each plan's hourly total and its ratio to the cheapest plan (1x for the min).
std::vector<CostRow> compare_plans(const std::vector<CostPlan>& plans);

// Two-plan convenience: a single server vs. one replicated deployment.
std::vector<CostRow> cost_compare(double single_hourly, const std::vector<double>& replica_hourlies);

}  // namespace ftproxy
