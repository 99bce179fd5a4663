#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace rstc {

/// Row-major matrix of doubles. Carries embeddings, predictions, costs,
/// transport plans and pseudo-labels alike.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws std::invalid_argument unless data.size() == rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, std::string_view what);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ·b without materializing the transpose.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
/// a·bᵀ without materializing the transpose.
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

void add_row_vector(DenseMatrix& m, std::span<const double> v);
std::vector<double> row_sums(const DenseMatrix& m);
std::vector<double> column_sums(const DenseMatrix& m);
DenseMatrix select_rows(const DenseMatrix& m, std::span<const std::size_t> indices);

/// Column index of the largest entry of each row; ties go to the lowest index.
std::vector<std::size_t> argmax_rows(const DenseMatrix& m);

/// Nonnegative weights summing to one.
class ProbVector {
 public:
  ProbVector() = default;
  /// Validates: every entry >= 0 and the sum is 1 within 1e-9.
  explicit ProbVector(std::vector<double> values);

  static ProbVector uniform(std::size_t n);
  /// Divides nonnegative weights by their sum. Throws if the sum is not positive.
  static ProbVector normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace rstc
