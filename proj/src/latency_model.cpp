#include "ftproxy/latency_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace ftproxy {

LatencyModel LatencyModel::fixed(double value_ms) {
  if (value_ms < 0) throw InvalidArgument("fixed latency must be >= 0");
  LatencyModel m;
  m.kind = Kind::Fixed;
  m.mean_ms = value_ms;
  return m;
}

LatencyModel LatencyModel::exponential(double mean) {
  if (!(mean > 0)) throw InvalidArgument("exponential mean must be > 0");
  LatencyModel m;
  m.kind = Kind::Exponential;
  m.mean_ms = mean;
  return m;
}

LatencyModel LatencyModel::lognormal(double mu, double sigma) {
  if (!(sigma >= 0)) throw InvalidArgument("lognormal sigma must be >= 0");
  LatencyModel m;
  m.kind = Kind::Lognormal;
  m.mu_ln = mu;
  m.sigma_ln = sigma;
  return m;
}

LatencyModel LatencyModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("empirical model needs at least one sample");
  for (double s : samples)
    if (!(s > 0)) throw InvalidArgument("empirical samples must be > 0");
  LatencyModel m;
  m.kind = Kind::Empirical;
  m.empirical_samples = std::move(samples);
  return m;
}

double LatencyModel::sample(StreamRng& rng) const {
  switch (kind) {
    case Kind::Fixed:
      return mean_ms;
    case Kind::Exponential: {
      double u = rng.uniform();
      double v = -mean_ms * std::log1p(-u);
      return std::max(v, 1e-9);
    }
    case Kind::Lognormal: {
      // Box-Muller; the second variate is discarded to keep one draw per call.
      double u1 = rng.uniform();
      double u2 = rng.uniform();
      double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
      return std::max(std::exp(mu_ln + sigma_ln * z), 1e-9);
    }
    case Kind::Empirical: {
      size_t idx = static_cast<size_t>(rng.uniform() * static_cast<double>(empirical_samples.size()));
      idx = std::min(idx, empirical_samples.size() - 1);
      return empirical_samples[idx];
    }
  }
  return 0;
}

double LatencyModel::cdf(double x) const {
  switch (kind) {
    case Kind::Fixed:
      return x >= mean_ms ? 1.0 : 0.0;
    case Kind::Exponential:
      return x <= 0 ? 0.0 : 1.0 - std::exp(-x / mean_ms);
    case Kind::Lognormal: {
      if (x <= 0) return 0.0;
      if (sigma_ln == 0) return x >= std::exp(mu_ln) ? 1.0 : 0.0;
      double z = (std::log(x) - mu_ln) / (sigma_ln * std::numbers::sqrt2);
      return 0.5 * std::erfc(-z);
    }
    case Kind::Empirical:
      throw InvalidArgument("empirical model has no closed-form CDF; resample instead");
  }
  return 0;
}

double LatencyModel::mean() const {
  switch (kind) {
    case Kind::Fixed:
    case Kind::Exponential:
      return mean_ms;
    case Kind::Lognormal:
      return std::exp(mu_ln + 0.5 * sigma_ln * sigma_ln);
    case Kind::Empirical:
      return std::accumulate(empirical_samples.begin(), empirical_samples.end(), 0.0) /
             static_cast<double>(empirical_samples.size());
  }
  return 0;
}

const char* LatencyModel::kind_name() const {
  switch (kind) {
    case Kind::Fixed: return "fixed";
    case Kind::Exponential: return "exponential";
    case Kind::Lognormal: return "lognormal";
    case Kind::Empirical: return "empirical";
  }
  return "?";
}

double min_of_n_cdf_oracle(const LatencyModel& model, int n, double x) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  double f = model.cdf(x);  // throws for Empirical
  return 1.0 - std::pow(1.0 - f, n);
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw InvalidArgument("percentile of empty sample set");
  if (!(q > 0.0) || q > 1.0) throw InvalidArgument("q must lie in (0, 1]");
  std::sort(samples.begin(), samples.end());
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(samples.size())));
  rank = std::max<size_t>(rank, 1);
  return samples[rank - 1];
}

}  // namespace ftproxy
