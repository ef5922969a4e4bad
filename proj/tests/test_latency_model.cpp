#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ftproxy/event_loop.hpp"
#include "ftproxy/latency_model.hpp"

using namespace ftproxy;

TEST_CASE("fixed model draws nothing from the stream") {
  StreamRng a(42), b(42);
  auto model = LatencyModel::fixed(5.0);
  CHECK(model.sample(a) == 5.0);
  CHECK(a.next_u64() == b.next_u64());  // stream untouched
}

TEST_CASE("stochastic samples are positive and seed-stable") {
  for (auto model : {LatencyModel::exponential(100.0), LatencyModel::lognormal(3.0, 0.7)}) {
    StreamRng r1(99), r2(99);
    for (int i = 0; i < 10'000; ++i) {
      double v = model.sample(r1);
      CHECK(v > 0);
      CHECK(v == model.sample(r2));
    }
  }
}

TEST_CASE("empirical model resamples the provided values") {
  auto model = LatencyModel::empirical({10, 20, 30});
  StreamRng rng(5);
  for (int i = 0; i < 1'000; ++i) {
    double v = model.sample(rng);
    CHECK((v == 10 || v == 20 || v == 30));
  }
  CHECK(model.mean() == doctest::Approx(20.0));
  CHECK_THROWS_AS(model.cdf(15.0), InvalidArgument);
  CHECK_THROWS_AS(LatencyModel::empirical({}), InvalidArgument);
}

TEST_CASE("sample means converge to analytic means") {
  for (auto model : {LatencyModel::exponential(80.0), LatencyModel::lognormal(3.2, 0.5)}) {
    StreamRng rng(1234);
    double sum = 0;
    constexpr int n = 200'000;
    for (int i = 0; i < n; ++i) sum += model.sample(rng);
    CHECK(sum / n == doctest::Approx(model.mean()).epsilon(0.02));
  }
}

TEST_CASE("cdf matches empirical frequencies") {
  auto model = LatencyModel::exponential(50.0);
  StreamRng rng(777);
  constexpr int n = 100'000;
  std::vector<double> samples(n);
  for (auto& s : samples) s = model.sample(rng);
  std::sort(samples.begin(), samples.end());
  for (double x : {10.0, 50.0, 120.0}) {
    auto below = std::lower_bound(samples.begin(), samples.end(), x) - samples.begin();
    CHECK(static_cast<double>(below) / n == doctest::Approx(model.cdf(x)).epsilon(0.02));
  }
}

TEST_CASE("min-of-n oracle") {
  auto model = LatencyModel::exponential(100.0);
  SUBCASE("n=1 is the cdf itself") {
    for (double x : {5.0, 60.0, 250.0}) CHECK(min_of_n_cdf_oracle(model, 1, x) == model.cdf(x));
  }
  SUBCASE("min of 2 iid exponentials halves the mean") {
    auto half = LatencyModel::exponential(50.0);
    for (double x = 1; x < 400; x += 7.3)
      CHECK(min_of_n_cdf_oracle(model, 2, x) == doctest::Approx(half.cdf(x)).epsilon(1e-12));
  }
  SUBCASE("empirical unsupported") {
    CHECK_THROWS_AS(min_of_n_cdf_oracle(LatencyModel::empirical({1.0}), 2, 0.5), InvalidArgument);
  }
}

TEST_CASE("nearest-rank percentile") {
  CHECK(percentile({10, 20, 30, 40}, 0.5) == 20);
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<size_t>(i)] = i + 1;
  CHECK(percentile(v, 0.99) == 99);
  CHECK(percentile(v, 1.0) == 100);
  CHECK(percentile({7}, 0.01) == 7);
  CHECK_THROWS_AS(percentile({}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(percentile({1.0}, 0.0), InvalidArgument);
}

TEST_CASE("nearest-rank percentile matches a brute-force oracle") {
  StreamRng rng(31337);
  for (int trial = 0; trial < 1'000; ++trial) {
    size_t n = 1 + static_cast<size_t>(rng.uniform() * 50);
    std::vector<double> samples(n);
    for (auto& s : samples) s = rng.uniform() * 1000;
    double q = 0.01 + rng.uniform() * 0.99;
    // Oracle: sort, take the ceil(q*n)-th (1-based) element directly.
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    CHECK(percentile(samples, q) == sorted[rank - 1]);
  }
}

TEST_CASE("event loop orders by time then insertion") {
  EventLoop loop;
  std::vector<int> order;
  loop.schedule_at(10, [&] { order.push_back(1); });
  loop.schedule_at(5, [&] { order.push_back(0); });
  loop.schedule_at(10, [&] { order.push_back(2); });  // same time: FIFO
  loop.schedule_at(30, [&] { order.push_back(4); });
  loop.schedule_at(20, [&] {
    order.push_back(3);
    loop.schedule_in(0, [&] { order.push_back(30); });  // runs at t=20 after current
  });
  loop.run_until(25);
  CHECK(order == std::vector<int>{0, 1, 2, 3, 30});
  CHECK(loop.now() == 25);
  loop.run_until(35);
  CHECK(order.back() == 4);
}
