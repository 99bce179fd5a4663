#include <gtest/gtest.h>

#include <vector>

#include "fixtures.hpp"
#include "rstc/metrics.hpp"
#include "rstc/pseudo.hpp"

using namespace rstc;

TEST(Harden, UniqueArgmax) {
  const auto q = harden(DenseMatrix::from_rows({{0.2, 0.5, 0.3}}));
  EXPECT_EQ(q.matrix(), DenseMatrix::from_rows({{0.0, 1.0, 0.0}}));
  EXPECT_EQ(q.labels(), std::vector<std::size_t>{1});
}

TEST(Harden, TieGoesToLowestIndex) {
  EXPECT_EQ(harden(DenseMatrix::from_rows({{0.5, 0.5}})).labels(), std::vector<std::size_t>{0});
}

TEST(Harden, MatchesLinearScan) {
  const auto plan = fixture::random_predictions(100, 7, 3);
  const auto q = harden(plan, 4);
  EXPECT_EQ(q.generation(), 4u);
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < plan.cols(); ++j) {
      if (plan(i, j) > plan(i, best)) best = j;
    }
    EXPECT_EQ(q.labels()[i], best);
    for (std::size_t j = 0; j < plan.cols(); ++j) EXPECT_EQ(q.matrix()(i, j), j == best ? 1.0 : 0.0);
  }
}

TEST(Harden, IdempotentAndScaleInvariant) {
  auto plan = fixture::random_predictions(40, 5, 8);
  const auto q = harden(plan);
  EXPECT_EQ(harden(q.matrix()), q);
  Rng rng(2);
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    const double scale = rng.uniform(0.01, 100.0);
    for (double& v : plan.row(i)) v *= scale;
  }
  EXPECT_EQ(harden(plan).labels(), q.labels());
}

TEST(PseudoLabels, FromAssignmentsValidatesRange) {
  const std::vector<std::size_t> labels = {0, 2, 1};
  const auto q = PseudoLabels::from_assignments(labels, 3);
  EXPECT_EQ(q.matrix()(1, 2), 1.0);
  const std::vector<std::size_t> bad = {0, 3};
  EXPECT_THROW(PseudoLabels::from_assignments(bad, 3), std::invalid_argument);
}

TEST(KMeans, SingleClusterTakesEverything) {
  const auto q = kmeans_init(fixture::random_matrix(20, 3, 1), 1, 5);
  EXPECT_EQ(q.labels(), std::vector<std::size_t>(20, 0));
}

TEST(KMeans, RecoversSeparatedBlobs) {
  Rng rng(7);
  DenseMatrix points(60, 2);
  std::vector<std::size_t> truth(60);
  for (std::size_t i = 0; i < 60; ++i) {
    truth[i] = i % 2;
    const double centre = truth[i] == 0 ? -10.0 : 10.0;
    points(i, 0) = centre + 0.1 * rng.normal();
    points(i, 1) = 0.1 * rng.normal();
  }
  const auto q = kmeans_init(points, 2, 3);
  EXPECT_DOUBLE_EQ(accuracy(truth, q.labels()), 1.0);
}

TEST(KMeans, DeterministicForSeed) {
  const auto points = fixture::random_matrix(80, 4, 9);
  EXPECT_EQ(kmeans_init(points, 3, 11), kmeans_init(points, 3, 11));
}

TEST(KMeans, InertiaNeverIncreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto result = kmeans(fixture::random_matrix(200, 5, seed), 6, seed);
    ASSERT_FALSE(result.inertia_trace.empty());
    for (std::size_t k = 1; k < result.inertia_trace.size(); ++k) {
      EXPECT_LE(result.inertia_trace[k], result.inertia_trace[k - 1] * (1.0 + 1e-12));
    }
  }
}

TEST(KMeans, RejectsMoreClustersThanPoints) {
  EXPECT_THROW(kmeans(fixture::random_matrix(3, 2, 1), 4, 1), std::invalid_argument);
}

TEST(Schedule, PowersOfTen) {
  EXPECT_EQ(make_schedule(1000, 3).steps, (std::vector<std::size_t>{10, 100, 1000}));
}

TEST(Schedule, SingleRefreshIsFinalStep) {
  EXPECT_EQ(make_schedule(77, 1).steps, std::vector<std::size_t>{77});
}

TEST(Schedule, RoundedAndDeduplicated) {
  EXPECT_EQ(make_schedule(500, 4).steps, (std::vector<std::size_t>{5, 22, 106, 500}));
  const auto s = make_schedule(3, 3);
  EXPECT_EQ(s.steps, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Schedule, StrictlyIncreasingAndEndsAtTotal) {
  for (std::size_t total : {1u, 2u, 9u, 50u, 1000u, 12345u}) {
    for (std::size_t refreshes = 1; refreshes <= std::min<std::size_t>(total, 20); ++refreshes) {
      const auto s = make_schedule(total, refreshes);
      EXPECT_EQ(s.steps.back(), total);
      for (std::size_t k = 1; k < s.steps.size(); ++k) EXPECT_LT(s.steps[k - 1], s.steps[k]);
      EXPECT_TRUE(s.contains(total));
    }
  }
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_THROW(make_schedule(10, 0), std::invalid_argument);
  EXPECT_THROW(make_schedule(2, 3), std::invalid_argument);
}
