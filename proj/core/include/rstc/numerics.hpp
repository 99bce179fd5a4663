#pragma once

#include <span>

#include "rstc/dense_matrix.hpp"

namespace rstc {

/// Row-wise softmax with a max shift, so large logits never overflow.
/// Throws NumericError on non-finite input.
DenseMatrix softmax_rows(const DenseMatrix& logits);

/// log(sum(exp(v))) shifted by max(v). Entries equal to -inf contribute zero
/// mass; an all -inf input returns -inf. Throws std::invalid_argument if empty.
double log_sum_exp(std::span<const double> values);

/// log(1 / (1 + exp(-t))) without overflow for either sign of t.
double log_sigmoid(double t) noexcept;
double sigmoid(double t) noexcept;

}  // namespace rstc
