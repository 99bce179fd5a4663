#include <benchmark/benchmark.h>

#include <vector>

#include "bench_common.hpp"
#include "rstc/rng.hpp"
#include "rstc/transport.hpp"

namespace {

// Args: N, C.
void BM_SolveSaot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = static_cast<std::size_t>(state.range(1));
  const auto cost = rstc::cost_from_predictions(bench::predictions(n, c, 1));
  const auto a = rstc::ProbVector::uniform(n);
  const auto b = rstc::ProbVector::uniform(c);
  rstc::SaotConfig cfg;
  for (auto _ : state) {
    auto sol = rstc::solve_saot(cost, a, cfg, b);
    benchmark::DoNotOptimize(sol.plan);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * c));
}
BENCHMARK(BM_SolveSaot)->Args({500, 4})->Args({2000, 4})->Args({2000, 20})->Args({10000, 20})
    ->Unit(benchmark::kMillisecond);

void BM_FixedMarginalOt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t c = 20;
  const auto cost = rstc::cost_from_predictions(bench::predictions(n, c, 2));
  const auto a = rstc::ProbVector::uniform(n);
  const auto b = rstc::ProbVector::uniform(c);
  for (auto _ : state) {
    auto sol = rstc::solve_fixed_marginal_ot(cost, a, b, 0.1, 200);
    benchmark::DoNotOptimize(sol.plan);
  }
}
BENCHMARK(BM_FixedMarginalOt)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_NewtonRootH(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  rstc::Rng rng(3);
  std::vector<std::vector<double>> draws(64, std::vector<double>(c));
  for (auto& g : draws)
    for (double& v : g) v = rng.uniform(-3.0, 3.0);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rstc::newton_root_h(draws[k++ % draws.size()], 0.01, 0.0, 10));
  }
}
BENCHMARK(BM_NewtonRootH)->Arg(4)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
