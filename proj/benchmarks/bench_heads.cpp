#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "rstc/heads.hpp"
#include "rstc/losses.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/rng.hpp"

namespace {

// One full training step on a batch: both heads forward, both losses,
// backward and an Adam update. Args: batch size, embedding dim.
void BM_TrainStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const std::size_t c = 8, d2 = 128;
  const auto e1 = bench::normal_matrix(n, d, 1);
  const auto e2 = bench::normal_matrix(n, d, 2);
  rstc::Rng rng(3);
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = rng.uniform_index(c);
  const auto q = rstc::PseudoLabels::from_assignments(labels, c);
  auto params = rstc::HeadParams::glorot(d, c, d2, 4);
  auto adam = rstc::AdamState::for_params(params);
  for (auto _ : state) {
    auto grads = rstc::HeadParams::zeros(d, c, d2);
    const auto lc = rstc::class_wise_loss(q, rstc::forward_clustering(e1, params),
                                          rstc::forward_clustering(e2, params));
    rstc::backward_clustering(e1, lc.logit_grad1, grads);
    rstc::backward_clustering(e2, lc.logit_grad2, grads);
    const auto c1 = rstc::forward_projection_cached(e1, params);
    const auto c2 = rstc::forward_projection_cached(e2, params);
    const auto li = rstc::instance_wise_loss(c1.output, c2.output, 0.5);
    rstc::backward_projection(e1, c1, li.grad1, params, grads);
    rstc::backward_projection(e2, c2, li.grad2, params, grads);
    rstc::adam_step(params, grads, adam, 1e-3);
    benchmark::DoNotOptimize(params);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_TrainStep)->Args({200, 64})->Args({200, 768})->Args({400, 768})
    ->Unit(benchmark::kMillisecond);

void BM_InstanceWiseLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z1 = bench::normal_matrix(n, 128, 5);
  const auto z2 = bench::normal_matrix(n, 128, 6);
  for (auto _ : state) benchmark::DoNotOptimize(rstc::instance_wise_loss(z1, z2, 0.5).loss);
}
BENCHMARK(BM_InstanceWiseLoss)->Arg(200)->Arg(400)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
