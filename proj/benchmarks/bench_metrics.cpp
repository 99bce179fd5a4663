#include <benchmark/benchmark.h>

#include <vector>

#include "bench_common.hpp"
#include "rstc/metrics.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/rng.hpp"

namespace {

void BM_Hungarian(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto cost = bench::normal_matrix(c, c, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rstc::hungarian(cost));
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(20)->Arg(100);

void BM_AccuracyNmi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rstc::Rng rng(2);
  std::vector<std::size_t> y(n), yhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform_index(20);
    yhat[i] = rng.uniform() < 0.8 ? y[i] : rng.uniform_index(20);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rstc::accuracy(y, yhat));
    benchmark::DoNotOptimize(rstc::nmi(y, yhat));
  }
}
BENCHMARK(BM_AccuracyNmi)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_KMeans(benchmark::State& state) {
  const auto points = bench::normal_matrix(static_cast<std::size_t>(state.range(0)), 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rstc::kmeans(points, 8, 1));
}
BENCHMARK(BM_KMeans)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
