#include "rstc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstc/errors.hpp"
#include "rstc/numerics.hpp"

namespace rstc {
namespace {

constexpr double kLogFloor = 1e-30;
constexpr double kNormFloor = 1e-12;

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

double cross_entropy_term(const DenseMatrix& q, const DenseMatrix& p, DenseMatrix& grad) {
  const double inv_n = 1.0 / static_cast<double>(p.rows());
  double total = 0.0;
  grad = DenseMatrix(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (q(i, j) != 0.0) total -= q(i, j) * std::log(std::max(p(i, j), kLogFloor));
      grad(i, j) = (p(i, j) - q(i, j)) * inv_n;
    }
  }
  return total * inv_n;
}

}  // namespace

double total_loss(double class_wise, double instance_wise, double lambda_i) noexcept {
  return class_wise + lambda_i * instance_wise;
}

LossValue combine_losses(double class_wise, double instance_wise, double lambda_i) noexcept {
  return {total_loss(class_wise, instance_wise, lambda_i), class_wise, instance_wise};
}

ClassWiseResult class_wise_loss(const PseudoLabels& targets, const DenseMatrix& p1,
                                const DenseMatrix& p2) {
  const DenseMatrix& q = targets.matrix();
  require_same_shape(q, p1, "class_wise_loss");
  require_same_shape(q, p2, "class_wise_loss");
  ClassWiseResult out;
  if (q.rows() == 0) {
    out.logit_grad1 = DenseMatrix(0, q.cols());
    out.logit_grad2 = DenseMatrix(0, q.cols());
    return out;
  }
  out.loss = cross_entropy_term(q, p1, out.logit_grad1) + cross_entropy_term(q, p2, out.logit_grad2);
  return out;
}

InstanceWiseResult instance_wise_loss(const DenseMatrix& z1, const DenseMatrix& z2, double tau) {
  require_same_shape(z1, z2, "instance_wise_loss");
  if (!(tau > 0.0)) throw std::invalid_argument("instance_wise_loss: tau must be positive");
  const std::size_t n = z1.rows();
  const std::size_t rows = 2 * n;
  const std::size_t dim = z1.cols();
  InstanceWiseResult out{0.0, DenseMatrix(n, dim), DenseMatrix(n, dim)};
  if (n == 0) return out;

  auto source = [&](std::size_t k) { return k < n ? z1.row(k) : z2.row(k - n); };

  // Unit rows and their (floored) norms.
  DenseMatrix unit(rows, dim);
  std::vector<double> norms(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const auto z = source(k);
    double sq = 0.0;
    for (double v : z) sq += v * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) {
      throw std::invalid_argument("instance_wise_loss: row " + std::to_string(k) +
                                  " has zero norm");
    }
    norms[k] = std::max(norm, kNormFloor);
    for (std::size_t d = 0; d < dim; ++d) unit(k, d) = z[d] / norms[k];
  }

  const DenseMatrix sim = matmul_a_bt(unit, unit);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  // weight(k, l) = d loss / d sim(k, l) from row k's term.
  DenseMatrix weight(rows, rows);
  std::vector<double> logits(rows - 1);
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t partner = k < n ? k + n : k - n;
    const auto sim_row = sim.row(k);
    std::size_t m = 0;
    for (std::size_t l = 0; l < rows; ++l) {
      if (l != k) logits[m++] = sim_row[l] / tau;
    }
    const double lse = log_sum_exp(logits);
    out.loss += (lse - sim_row[partner] / tau) * inv_rows;
    auto w_row = weight.row(k);
    for (std::size_t l = 0; l < rows; ++l) {
      w_row[l] = std::exp(sim_row[l] / tau - lse) * inv_rows / tau;
    }
    w_row[k] = 0.0;
    w_row[partner] -= inv_rows / tau;
  }

  // sim is symmetric, so d loss / d unit = (W + Wᵀ) unit.
  DenseMatrix sym(rows, rows);
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t l = 0; l < rows; ++l) sym(k, l) = weight(k, l) + weight(l, k);
  }
  const DenseMatrix du = matmul(sym, unit);
  for (std::size_t k = 0; k < rows; ++k) {
    // Back through normalization: (I - u uᵀ) du / |z|.
    const auto g = du.row(k);
    double radial = 0.0;
    for (std::size_t d = 0; d < dim; ++d) radial += unit(k, d) * g[d];
    auto dst = k < n ? out.grad1.row(k) : out.grad2.row(k - n);
    for (std::size_t d = 0; d < dim; ++d) dst[d] = (g[d] - radial * unit(k, d)) / norms[k];
  }
  if (!std::isfinite(out.loss)) throw NumericError("instance_wise_loss: non-finite loss");
  return out;
}

}  // namespace rstc
