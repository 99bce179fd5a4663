#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rstc/metrics.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/synth.hpp"

using namespace rstc;

namespace {

// Geometric shares R^(-j/(C-1)), scaled to N, rounded by largest remainder
// with ties going to the lower class index.
std::vector<std::size_t> geometric_sizes(std::size_t c, std::size_t n, double ratio) {
  std::vector<double> share(c);
  for (std::size_t j = 0; j < c; ++j) {
    share[j] = c == 1 ? 1.0 : std::pow(ratio, -static_cast<double>(j) / static_cast<double>(c - 1));
  }
  const double total = std::accumulate(share.begin(), share.end(), 0.0);
  std::vector<std::size_t> sizes(c);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t j = 0; j < c; ++j) {
    const double exact = static_cast<double>(n) * share[j] / total;
    sizes[j] = static_cast<std::size_t>(std::floor(exact));
    used += sizes[j];
    remainders.push_back({exact - std::floor(exact), j});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++sizes[remainders[k].second];
  return sizes;
}

}  // namespace

TEST(SynthSizes, BalancedSplitsEvenly) {
  EXPECT_EQ(synth_cluster_sizes(4, 800, 1.0), (std::vector<std::size_t>{200, 200, 200, 200}));
}

TEST(SynthSizes, HeavyImbalanceFixture) {
  const auto sizes = synth_cluster_sizes(4, 800, 10.0);
  EXPECT_EQ(sizes, (std::vector<std::size_t>{449, 209, 97, 45}));
  EXPECT_EQ(sizes, geometric_sizes(4, 800, 10.0));
  const double ratio = static_cast<double>(sizes.front()) / static_cast<double>(sizes.back());
  EXPECT_NEAR(ratio, 10.0, 0.1);
}

TEST(SynthSizes, MatchesGeometricRuleAndSumsToN) {
  for (std::size_t c : {2u, 3u, 5u, 8u}) {
    for (double r : {1.0, 2.5, 10.0, 50.0}) {
      for (std::size_t n : {97u, 800u, 1003u}) {
        const auto sizes = synth_cluster_sizes(c, n, r);
        EXPECT_EQ(sizes, geometric_sizes(c, n, r));
        EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), n);
      }
    }
  }
}

TEST(SynthSizes, EqualWhenClassesDivideSamples) {
  for (std::size_t c : {1u, 2u, 5u, 10u}) {
    const auto sizes = synth_cluster_sizes(c, 1000, 1.0);
    EXPECT_TRUE(std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s == 1000 / c; }));
  }
}

TEST(SynthGenerate, ShapesLabelsAndDeterminism) {
  SynthConfig cfg;
  cfg.imbalance_ratio = 10.0;
  cfg.noise_dims = 3;
  cfg.seed = 4;
  const auto d = synth_generate(cfg);
  EXPECT_EQ(d.size(), 800u);
  EXPECT_EQ(d.dim(), 35u);
  ASSERT_TRUE(d.labels);
  std::vector<std::size_t> counts(4, 0);
  for (auto l : *d.labels) ++counts[l];
  EXPECT_EQ(counts, synth_cluster_sizes(4, 800, 10.0));
  EXPECT_EQ(synth_generate(cfg).embeddings, d.embeddings);
  cfg.seed = 5;
  EXPECT_NE(synth_generate(cfg).embeddings, d.embeddings);
}

TEST(SynthGenerate, WideSeparationIsSolvedByKMeans) {
  SynthConfig cfg;
  cfg.num_classes = 2;
  cfg.separation = 20.0;
  cfg.seed = 9;
  const auto d = synth_generate(cfg);
  const auto q = kmeans_init(d.embeddings, 2, 1);
  EXPECT_EQ(accuracy(*d.labels, q.labels()), 1.0);
}

TEST(SynthGenerate, MoreClassesThanDimensionsStillWorks) {
  SynthConfig cfg;
  cfg.num_classes = 6;
  cfg.dim = 3;
  cfg.num_samples = 60;
  const auto d = synth_generate(cfg);
  EXPECT_EQ(d.label_classes(), 6u);
}

TEST(SynthGenerate, RejectsBadConfig) {
  SynthConfig cfg;
  cfg.imbalance_ratio = 0.5;
  EXPECT_THROW(synth_generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.num_classes = 900;
  EXPECT_THROW(synth_generate(cfg), std::invalid_argument);
}
