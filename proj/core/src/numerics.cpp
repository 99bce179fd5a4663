#include "rstc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rstc/errors.hpp"

namespace rstc {

DenseMatrix softmax_rows(const DenseMatrix& logits) {
  require_finite(logits, "softmax_rows");
  DenseMatrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto dst = out.row(i);
    if (in.empty()) continue;
    const double shift = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      dst[j] = std::exp(in[j] - shift);
      total += dst[j];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double shift = *std::max_element(values.begin(), values.end());
  if (values.size() == 1) return shift;
  if (shift == -std::numeric_limits<double>::infinity()) return shift;
  double total = 0.0;
  for (double v : values) total += std::exp(v - shift);
  return shift + std::log(total);
}

double log_sigmoid(double t) noexcept {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace rstc
