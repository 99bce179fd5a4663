#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rstc/dataset.hpp"

namespace rstc {

/// Gaussian mixture with a geometric cluster-size profile.
struct SynthConfig {
  std::size_t num_classes = 4;
  std::size_t num_samples = 800;
  /// Dimensions that carry cluster structure.
  std::size_t dim = 32;
  /// Largest over smallest cluster size.
  double imbalance_ratio = 1.0;
  /// Minimum centroid distance in units of sqrt(dim) within-cluster std.
  double separation = 1.0;
  /// Pure N(0, 1) coordinates appended after the structured ones.
  std::size_t noise_dims = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// s_j ∝ R^(-j / (C-1)), scaled to sum to N with largest-remainder rounding
/// (ties to the lower index). Throws std::invalid_argument if any size is 0.
std::vector<std::size_t> synth_cluster_sizes(std::size_t num_classes, std::size_t num_samples,
                                             double imbalance_ratio);

/// Centroids sit at pairwise distance >= separation * sqrt(dim): scaled
/// random orthonormal directions when C <= dim, otherwise random Gaussian
/// points rescaled until the closest pair meets the bound. Each sample is its
/// centroid plus unit Gaussian noise; sample order is shuffled; labels are
/// stored and cluster j has size synth_cluster_sizes(...)[j].
EmbeddingDataset synth_generate(const SynthConfig& cfg);

}  // namespace rstc
