#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "rstc/dense_matrix.hpp"

namespace rstc {

enum class AugmentStrategy {
  /// Views stored with the dataset (e.g. encoded text augmentations).
  kPrecomputed,
  /// E + sigma * eta, eta standard normal, drawn independently per view.
  kGaussianNoise,
  /// Each coordinate zeroed with probability rate, survivors scaled by 1/(1-rate).
  kFeatureDropout,
};

struct AugmentConfig {
  /// Unset means: stored views when the dataset has them, Gaussian noise otherwise.
  std::optional<AugmentStrategy> strategy;
  double noise_sigma = 0.05;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for sigma < 0 or a rate outside [0, 1).
  void validate() const;
};

struct ViewPair {
  DenseMatrix first;
  DenseMatrix second;
};

/// Two augmented views of `embeddings`. Random strategies draw from a stream
/// keyed by (cfg.seed, step), so a given step always sees the same views.
/// `stored` supplies the rows for kPrecomputed; requesting that strategy
/// without them throws std::invalid_argument.
ViewPair make_views(const DenseMatrix& embeddings, const AugmentConfig& cfg, std::size_t step,
                    const ViewPair* stored = nullptr);

/// The strategy make_views will actually use.
AugmentStrategy resolve_strategy(const AugmentConfig& cfg, bool has_stored_views) noexcept;

}  // namespace rstc
