#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rstc/dense_matrix.hpp"

namespace rstc {

/// counts(t, p) = number of samples with true label t and predicted label p.
class ContingencyTable {
 public:
  /// Dimensions are max label + 1 on each side. Throws on length mismatch.
  static ContingencyTable build(std::span<const std::size_t> y_true,
                                std::span<const std::size_t> y_pred);

  std::size_t true_classes() const noexcept { return rows_; }
  std::size_t predicted_classes() const noexcept { return cols_; }
  std::size_t operator()(std::size_t t, std::size_t p) const noexcept {
    return counts_[t * cols_ + p];
  }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

/// Marks a row left unmatched because the matrix has more rows than columns.
inline constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

/// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)). Returns the
/// column matched to each row. Rectangular input is padded to square with
/// max|entry| * n + 1; rows matched to padding come back as kUnmatched.
/// Throws NumericError on non-finite entries.
std::vector<std::size_t> hungarian(const DenseMatrix& cost);

/// Sum of cost(i, assignment[i]) over matched rows.
double assignment_cost(const DenseMatrix& cost, std::span<const std::size_t> assignment);

/// Fraction of samples whose predicted label maps to the true label under the
/// best one-to-one mapping of predicted to true labels.
double accuracy(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred);

/// I(Y, Ŷ) / sqrt(H(Y) H(Ŷ)) with natural logs. If either entropy is zero the
/// result is 0, unless both partitions are a single cluster, which gives 1.
double nmi(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred);

}  // namespace rstc
