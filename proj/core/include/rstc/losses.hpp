#pragma once

#include "rstc/dense_matrix.hpp"
#include "rstc/pseudo.hpp"

namespace rstc {

struct LossValue {
  double total = 0.0;
  double class_wise = 0.0;
  double instance_wise = 0.0;
};

/// total = class_wise + lambda_i * instance_wise.
double total_loss(double class_wise, double instance_wise, double lambda_i) noexcept;
LossValue combine_losses(double class_wise, double instance_wise, double lambda_i) noexcept;

struct ClassWiseResult {
  double loss = 0.0;
  /// d loss / d logits of each view: (P - Q) / N.
  DenseMatrix logit_grad1;
  DenseMatrix logit_grad2;
};

/// Cross-entropy of both views' predictions against the one-hot targets:
/// (1/N) <Q, -log P1> + (1/N) <Q, -log P2>, logs floored at 1e-30.
/// Throws std::invalid_argument on shape mismatch.
ClassWiseResult class_wise_loss(const PseudoLabels& targets, const DenseMatrix& p1,
                                const DenseMatrix& p2);

struct InstanceWiseResult {
  double loss = 0.0;
  DenseMatrix grad1;
  DenseMatrix grad2;
};

/// NT-Xent over the stacked 2N rows [Z1; Z2]: row i pairs with row i + N
/// (and back), similarities are cosines divided by tau, each row's
/// denominator runs over the 2N - 1 other rows, and the loss is the mean over
/// all 2N rows. Throws std::invalid_argument for a zero-norm row.
InstanceWiseResult instance_wise_loss(const DenseMatrix& z1, const DenseMatrix& z2, double tau);

}  // namespace rstc
