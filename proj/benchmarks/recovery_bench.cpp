// Copyright 2026 The airgrad Authors
// SPDX-License-Identifier: Apache-2.0

// Per-resource detection cost at K devices and M antennas (2M real rows),
// with roughly 10% of devices active as in trained gradients.

#include <random>

#include <benchmark/benchmark.h>

#include "airgrad/recovery.hpp"

namespace {

struct Instance {
  Eigen::MatrixXd h;
  Eigen::VectorXd y;
};

Instance make_instance(int k, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  Instance in;
  in.h = Eigen::MatrixXd::NullaryExpr(2 * m, k, [&] { return n(rng); });
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  for (int j = 0; j < k; j += 10) x[j] = 4.0 * n(rng);
  in.y = in.h * x + Eigen::VectorXd::NullaryExpr(2 * m, [&] { return n(rng); });
  return in;
}

void BM_ProposedDetect(benchmark::State& state) {
  const auto in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  const airgrad::CsRecovery rec(in.h, 0.5);
  long stops = 0;
  for (auto _ : state) {
    auto r = rec.recover(in.y);
    stops += r.stop_index;
    benchmark::DoNotOptimize(r.x_hat.data());
  }
  state.counters["I*"] = static_cast<double>(stops) / static_cast<double>(state.iterations());
}

void BM_MrcDetect(benchmark::State& state) {
  const auto in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  const airgrad::MrcCombiner mrc(in.h);
  for (auto _ : state) benchmark::DoNotOptimize(mrc.recover(in.y).data());
}

void BM_LmmseFilterBuild(benchmark::State& state) {
  const auto in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  for (auto _ : state) {
    const airgrad::LmmseFilter f(in.h, 0.5);
    benchmark::DoNotOptimize(f.filter().data());
  }
}

void BM_LmmseDetect(benchmark::State& state) {
  const auto in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  const airgrad::LmmseFilter f(in.h, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(f.recover(in.y).data());
}

void grid(benchmark::internal::Benchmark* b) {
  for (int k : {75, 100, 200})
    for (int m : {25, 50}) b->Args({k, m});
}

}  // namespace

BENCHMARK(BM_ProposedDetect)->Apply(grid);
BENCHMARK(BM_MrcDetect)->Apply(grid);
BENCHMARK(BM_LmmseFilterBuild)->Apply(grid);
BENCHMARK(BM_LmmseDetect)->Apply(grid);
BENCHMARK_MAIN();
