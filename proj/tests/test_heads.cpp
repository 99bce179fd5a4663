#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rstc/errors.hpp"
#include "rstc/heads.hpp"

using namespace rstc;

TEST(ClusteringHead, ZeroParametersGiveUniformRows) {
  const auto params = HeadParams::zeros(4, 3, 2);
  const auto p = forward_clustering(fixture::random_matrix(5, 4, 1), params);
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(ClusteringHead, ScaledIdentityWeights) {
  auto params = HeadParams::zeros(2, 2, 1);
  params.gp_weight = DenseMatrix::from_rows({{5.0, 0.0}, {0.0, 5.0}});
  const auto p = forward_clustering(DenseMatrix::from_rows({{1.0, 0.0}}), params);
  EXPECT_NEAR(p(0, 0), 0.9933, 1e-4);
  EXPECT_NEAR(p(0, 1), 0.0067, 1e-4);
  EXPECT_NEAR(p(0, 0), 1.0 / (1.0 + std::exp(-5.0)), 1e-15);
}

TEST(ClusteringHead, RowsAreIndependent) {
  const auto params = HeadParams::glorot(6, 3, 4, 2);
  const auto e = fixture::random_matrix(3, 6, 3);
  const auto batch = forward_clustering(e, params);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::vector<std::size_t> one = {i};
    const auto single = forward_clustering(select_rows(e, one), params);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(single(0, j), batch(i, j));
  }
  const std::vector<std::size_t> perm = {2, 0, 1};
  const auto permuted = forward_clustering(select_rows(e, perm), params);
  EXPECT_EQ(permuted, select_rows(batch, perm));
}

TEST(ProjectionHead, ZeroWeightsGiveBias) {
  auto params = HeadParams::zeros(3, 2, 2);
  params.gz_bias2 = DenseMatrix::from_rows({{0.25, -1.5}});
  const auto z = forward_projection(fixture::random_matrix(4, 3, 1), params);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(z(i, 0), 0.25);
    EXPECT_EQ(z(i, 1), -1.5);
  }
}

TEST(ProjectionHead, ClosedReluGateIgnoresFirstLayerBias) {
  auto params = HeadParams::glorot(3, 2, 2, 4);
  params.gz_bias1 = DenseMatrix::from_rows({{-100.0, -100.0, -100.0}});
  params.gz_bias2 = DenseMatrix::from_rows({{0.5, 0.75}});
  const auto z = forward_projection(fixture::random_matrix(5, 3, 6), params);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(z(i, 0), 0.5);
    EXPECT_EQ(z(i, 1), 0.75);
  }
}

TEST(ProjectionHead, MatchesNaiveLoops) {
  const auto params = HeadParams::glorot(6, 3, 4, 8);
  auto noisy = params;
  for (double& v : noisy.gz_bias1.data()) v = 0.1;
  const auto e = fixture::random_matrix(9, 6, 5);
  auto hidden = oracle::naive_matmul(e, noisy.gz_weight1);
  for (std::size_t i = 0; i < hidden.rows(); ++i)
    for (std::size_t j = 0; j < hidden.cols(); ++j)
      hidden(i, j) = std::max(0.0, hidden(i, j) + noisy.gz_bias1(0, j));
  auto expected = oracle::naive_matmul(hidden, noisy.gz_weight2);
  for (std::size_t i = 0; i < expected.rows(); ++i)
    for (std::size_t j = 0; j < expected.cols(); ++j) expected(i, j) += noisy.gz_bias2(0, j);
  const auto z = forward_projection(e, noisy);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z.data()[k], expected.data()[k], 1e-10);
}

TEST(Heads, RejectsWrongInputWidth) {
  const auto params = HeadParams::zeros(4, 2, 2);
  EXPECT_THROW(forward_clustering(DenseMatrix(2, 3), params), std::invalid_argument);
  EXPECT_THROW(forward_projection(DenseMatrix(2, 5), params), std::invalid_argument);
}

TEST(Heads, GlorotWithinLimitAndSeeded) {
  const auto params = HeadParams::glorot(10, 3, 4, 1);
  const double limit = std::sqrt(6.0 / 13.0);
  for (double v : params.gp_weight.data()) EXPECT_LE(std::abs(v), limit);
  for (double v : params.gp_bias.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(params, HeadParams::glorot(10, 3, 4, 1));
  EXPECT_NE(params, HeadParams::glorot(10, 3, 4, 2));
}

TEST(Adam, ZeroGradientOnlyAdvancesStep) {
  auto params = HeadParams::glorot(3, 2, 2, 1);
  const auto before = params;
  auto state = AdamState::for_params(params);
  const auto grads = HeadParams::zeros(3, 2, 2);
  adam_step(params, grads, state, 0.1);
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.first_moment, grads);
  EXPECT_EQ(state.second_moment, grads);
  EXPECT_EQ(state.step_count, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto params = HeadParams::zeros(1, 1, 1);
  params.gp_weight(0, 0) = 2.0;
  auto state = AdamState::for_params(params);
  auto grads = HeadParams::zeros(1, 1, 1);
  grads.gp_weight(0, 0) = 1.0;
  adam_step(params, grads, state, 0.001);
  // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(params.gp_weight(0, 0), 2.0 - 0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, DeterministicFromSameState) {
  auto params = HeadParams::glorot(4, 3, 2, 3);
  auto state = AdamState::for_params(params);
  auto grads = HeadParams::glorot(4, 3, 2, 4);
  auto p1 = params, p2 = params;
  auto s1 = state, s2 = state;
  adam_step(p1, grads, s1, 0.01);
  adam_step(p2, grads, s2, 0.01);
  EXPECT_EQ(p1, p2);
}

TEST(Adam, RejectsMismatchedOrNonFiniteGradients) {
  auto params = HeadParams::zeros(3, 2, 2);
  auto state = AdamState::for_params(params);
  EXPECT_THROW(adam_step(params, HeadParams::zeros(3, 3, 2), state, 0.1), std::invalid_argument);
  auto grads = HeadParams::zeros(3, 2, 2);
  grads.gz_bias1(0, 1) = NAN;
  EXPECT_THROW(adam_step(params, grads, state, 0.1), NumericError);
}

TEST(Checkpoint, RoundTripsExactly) {
  const auto dir = fixture::scratch_dir("checkpoint");
  const auto params = HeadParams::glorot(7, 3, 5, 12);
  save_head_checkpoint(params, dir / "head.bin");
  EXPECT_EQ(load_head_checkpoint(dir / "head.bin"), params);
}

TEST(Checkpoint, DetectsCorruption) {
  const auto dir = fixture::scratch_dir("checkpoint_corrupt");
  save_head_checkpoint(HeadParams::glorot(4, 2, 3, 1), dir / "head.bin");
  std::fstream f(dir / "head.bin", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(40);
  f.put('\x7f');
  f.close();
  try {
    load_head_checkpoint(dir / "head.bin");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::kChecksumMismatch);
  }
  EXPECT_THROW(load_head_checkpoint(dir / "missing.bin"), FormatError);
}
