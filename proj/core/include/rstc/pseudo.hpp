#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rstc/dense_matrix.hpp"

namespace rstc {

/// One-hot N x C pseudo-label matrix and how many refreshes produced it.
class PseudoLabels {
 public:
  PseudoLabels() = default;
  /// Throws std::invalid_argument if a label is >= num_classes.
  static PseudoLabels from_assignments(std::span<const std::size_t> labels,
                                       std::size_t num_classes, std::size_t generation = 0);

  const DenseMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  std::size_t generation() const noexcept { return generation_; }
  std::size_t num_classes() const noexcept { return matrix_.cols(); }

  friend bool operator==(const PseudoLabels&, const PseudoLabels&) = default;

 private:
  DenseMatrix matrix_;
  std::vector<std::size_t> labels_;
  std::size_t generation_ = 0;
};

/// One-hot at each row's argmax, ties to the lowest column.
PseudoLabels harden(const DenseMatrix& plan, std::size_t generation = 0);

struct KMeansResult {
  std::vector<std::size_t> labels;
  DenseMatrix centroids;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds, Euclidean distance, run until the
/// assignment stops changing or max_iter passes. A cluster left empty is
/// reseeded with the point farthest from its own centroid.
KMeansResult kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300);

PseudoLabels kmeans_init(const DenseMatrix& embeddings, std::size_t num_classes,
                         std::uint64_t seed);

struct RefreshSchedule {
  std::vector<std::size_t> steps;

  bool contains(std::size_t step) const;
};

/// Geometric spacing: round(total_steps^(k / num_refreshes)) for
/// k = 1..num_refreshes, deduplicated, last entry equal to total_steps.
RefreshSchedule make_schedule(std::size_t total_steps, std::size_t num_refreshes);

}  // namespace rstc
