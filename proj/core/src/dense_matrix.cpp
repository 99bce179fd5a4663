#include "rstc/dense_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "rstc/errors.hpp"

namespace rstc {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw std::invalid_argument("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return DenseMatrix(n, m, std::move(data));
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const DenseMatrix& m, std::string_view what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + ": non-finite entry");
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const DenseMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(DenseMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  if (!out.empty()) view(out).noalias() = view(a) * view(b);
  return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row counts differ");
  DenseMatrix out(a.cols(), b.cols());
  if (!out.empty()) view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: column counts differ");
  DenseMatrix out(a.rows(), b.rows());
  if (!out.empty()) view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

void add_row_vector(DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw std::invalid_argument("add_row_vector: length mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) r[j] += v[j];
  }
}

std::vector<double> row_sums(const DenseMatrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double v : m.row(i)) out[i] += v;
  }
  return out;
}

std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j];
  }
  return out;
}

DenseMatrix select_rows(const DenseMatrix& m, std::span<const std::size_t> indices) {
  DenseMatrix out(indices.size(), m.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= m.rows()) throw std::out_of_range("select_rows: index out of range");
    const auto src = m.row(indices[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

std::vector<std::size_t> argmax_rows(const DenseMatrix& m) {
  std::vector<std::size_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j) {
      if (r[j] > r[best]) best = j;
    }
    out[i] = best;
  }
  return out;
}

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ProbVector: entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("ProbVector: entries sum to " + std::to_string(sum));
  }
}

ProbVector ProbVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("ProbVector::uniform: empty");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbVector ProbVector::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("ProbVector::normalized: negative or non-finite weight");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("ProbVector::normalized: zero total weight");
  for (double& w : weights) w /= sum;
  return ProbVector(std::move(weights));
}

}  // namespace rstc
