#include "rstc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rstc/errors.hpp"

namespace rstc {
namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": label vectors differ in length (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double entropy(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

// Square assignment with row/column potentials; a[1..n][1..n] one-based.
std::vector<std::size_t> solve_square(const std::vector<double>& a, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto at = [&](std::size_t i, std::size_t j) { return a[(i - 1) * n + (j - 1)]; };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

ContingencyTable ContingencyTable::build(std::span<const std::size_t> y_true,
                                         std::span<const std::size_t> y_pred) {
  require_same_length(y_true.size(), y_pred.size(), "contingency");
  ContingencyTable t;
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    t.rows_ = std::max(t.rows_, y_true[k] + 1);
    t.cols_ = std::max(t.cols_, y_pred[k] + 1);
  }
  t.counts_.assign(t.rows_ * t.cols_, 0);
  for (std::size_t k = 0; k < y_true.size(); ++k) ++t.counts_[y_true[k] * t.cols_ + y_pred[k]];
  t.total_ = y_true.size();
  return t;
}

std::vector<std::size_t> hungarian(const DenseMatrix& cost) {
  require_finite(cost, "hungarian cost");
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  if (rows == 0) return {};
  const std::size_t n = std::max(rows, cols);
  double largest = 0.0;
  for (double v : cost.data()) largest = std::max(largest, std::abs(v));
  const double pad = largest * static_cast<double>(n) + 1.0;
  std::vector<double> square(n * n, pad);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) square[i * n + j] = cost(i, j);
  }
  auto matched = solve_square(square, n);
  matched.resize(rows);
  for (auto& j : matched) {
    if (j >= cols) j = kUnmatched;
  }
  return matched;
}

double assignment_cost(const DenseMatrix& cost, std::span<const std::size_t> assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != kUnmatched) total += cost(i, assignment[i]);
  }
  return total;
}

double accuracy(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
  require_same_length(y_true.size(), y_pred.size(), "accuracy");
  if (y_true.empty()) throw std::invalid_argument("accuracy: no samples");
  const auto table = ContingencyTable::build(y_true, y_pred);
  // Rows are predicted labels, columns true labels: each predicted label is
  // mapped to at most one true label.
  const std::size_t n = std::max(table.true_classes(), table.predicted_classes());
  DenseMatrix cost(n, n);
  for (std::size_t t = 0; t < table.true_classes(); ++t) {
    for (std::size_t p = 0; p < table.predicted_classes(); ++p) {
      cost(p, t) = -static_cast<double>(table(t, p));
    }
  }
  const auto match = hungarian(cost);
  return -assignment_cost(cost, match) / static_cast<double>(y_true.size());
}

double nmi(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
  require_same_length(y_true.size(), y_pred.size(), "nmi");
  if (y_true.empty()) throw std::invalid_argument("nmi: no samples");
  const auto table = ContingencyTable::build(y_true, y_pred);
  const double total = static_cast<double>(table.total());
  std::vector<double> true_counts(table.true_classes(), 0.0);
  std::vector<double> pred_counts(table.predicted_classes(), 0.0);
  for (std::size_t t = 0; t < table.true_classes(); ++t) {
    for (std::size_t p = 0; p < table.predicted_classes(); ++p) {
      true_counts[t] += static_cast<double>(table(t, p));
      pred_counts[p] += static_cast<double>(table(t, p));
    }
  }
  const double h_true = entropy(true_counts, total);
  const double h_pred = entropy(pred_counts, total);
  if (h_true == 0.0 || h_pred == 0.0) return (h_true == 0.0 && h_pred == 0.0) ? 1.0 : 0.0;
  double mi = 0.0;
  for (std::size_t t = 0; t < table.true_classes(); ++t) {
    for (std::size_t p = 0; p < table.predicted_classes(); ++p) {
      const double c = static_cast<double>(table(t, p));
      if (c > 0.0) mi += (c / total) * std::log(c * total / (true_counts[t] * pred_counts[p]));
    }
  }
  return std::clamp(mi / std::sqrt(h_true * h_pred), 0.0, 1.0);
}

}  // namespace rstc
