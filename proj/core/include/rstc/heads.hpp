#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "rstc/dense_matrix.hpp"

namespace rstc {

/// Weights of the clustering head (one linear layer + softmax) and the
/// projection head (linear, ReLU, linear), both applied to frozen embeddings.
struct HeadParams {
  DenseMatrix gp_weight;   // D1 x C
  DenseMatrix gp_bias;     // 1 x C
  DenseMatrix gz_weight1;  // D1 x D1
  DenseMatrix gz_bias1;    // 1 x D1
  DenseMatrix gz_weight2;  // D1 x D2
  DenseMatrix gz_bias2;    // 1 x D2

  /// Zero tensors of the given shapes.
  static HeadParams zeros(std::size_t input_dim, std::size_t num_classes,
                          std::size_t projection_dim);
  /// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
  static HeadParams glorot(std::size_t input_dim, std::size_t num_classes,
                           std::size_t projection_dim, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return gp_weight.rows(); }
  std::size_t num_classes() const noexcept { return gp_weight.cols(); }
  std::size_t projection_dim() const noexcept { return gz_weight2.cols(); }

  /// Tensors in a fixed order with stable names; used by optimizers,
  /// checkpoints and gradient checks.
  std::vector<DenseMatrix*> tensors();
  std::vector<const DenseMatrix*> tensors() const;
  static const std::vector<std::string_view>& tensor_names();

  bool same_shape(const HeadParams& other) const;

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

struct AdamState {
  HeadParams first_moment;
  HeadParams second_moment;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const HeadParams& params);
};

/// P = softmax(E * gp_weight + gp_bias).
DenseMatrix forward_clustering(const DenseMatrix& embeddings, const HeadParams& params);
/// Pre-softmax logits of the clustering head.
DenseMatrix clustering_logits(const DenseMatrix& embeddings, const HeadParams& params);

/// Intermediate values of the projection head kept for backprop.
struct ProjectionCache {
  DenseMatrix pre_activation;  // E * W1 + b1
  DenseMatrix hidden;          // relu(pre_activation)
  DenseMatrix output;          // hidden * W2 + b2
};

/// Z = relu(E * gz_weight1 + gz_bias1) * gz_weight2 + gz_bias2.
DenseMatrix forward_projection(const DenseMatrix& embeddings, const HeadParams& params);
ProjectionCache forward_projection_cached(const DenseMatrix& embeddings,
                                          const HeadParams& params);

/// Adds the parameter gradients implied by d(loss)/d(logits) into `grads`.
void backward_clustering(const DenseMatrix& embeddings, const DenseMatrix& logit_grad,
                         HeadParams& grads);
/// Adds the parameter gradients implied by d(loss)/dZ into `grads`.
void backward_projection(const DenseMatrix& embeddings, const ProjectionCache& cache,
                         const DenseMatrix& output_grad, const HeadParams& params,
                         HeadParams& grads);

/// One bias-corrected Adam update. Throws NumericError on non-finite gradients
/// and std::invalid_argument on shape mismatch.
void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state, double lr);

/// Checkpoint: magic "RSTH", u32 version, u32 tensor count, then per tensor
/// u32 name length, name bytes, u32 rows, u32 cols and rows*cols float64
/// little-endian values; a trailing u64 FNV-1a checksum covers everything
/// before it. Same framing rules as EMB1, kept at full precision so a resumed
/// run continues bit-exactly.
void save_head_checkpoint(const HeadParams& params, const std::filesystem::path& path);
HeadParams load_head_checkpoint(const std::filesystem::path& path);

}  // namespace rstc
