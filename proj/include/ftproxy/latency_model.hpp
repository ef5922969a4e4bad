#pragma once

#include <string>
#include <vector>

#include "ftproxy/common.hpp"

namespace ftproxy {

// Parametric service/network latency distribution. Sampling is inverse-CDF /
// Box-Muller over the caller's StreamRng, so streams are reproducible and
// portable. Fixed draws nothing from the rng: links with constant latency do
// not perturb stochastic streams (topology-equivalence tests rely on this).
struct LatencyModel {
  enum class Kind { Fixed, Exponential, Lognormal, Empirical };

  Kind kind = Kind::Fixed;
  double mean_ms = 0;      // Fixed value / Exponential mean
  double mu_ln = 0;        // Lognormal log-scale
  double sigma_ln = 0;     // Lognormal log-shape
  std::vector<double> empirical_samples;

  static LatencyModel fixed(double value_ms);
  static LatencyModel exponential(double mean);
  static LatencyModel lognormal(double mu, double sigma);
  static LatencyModel empirical(std::vector<double> samples);

  double sample(StreamRng& rng) const;

  // Closed-form CDF; throws InvalidArgument for Empirical.
  double cdf(double x) const;

  // Analytic mean (Empirical: sample mean).
  double mean() const;

  const char* kind_name() const;
};

// First-response-wins consequence: P(min of n iid <= x) = 1 - (1 - F(x))^n.
double min_of_n_cdf_oracle(const LatencyModel& model, int n, double x);

// Nearest-rank percentile: sorted ascending, element at 1-based index
// ceil(q * n). q in (0, 1].
double percentile(std::vector<double> samples, double q);

}  // namespace ftproxy
