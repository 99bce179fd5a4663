#include "rstc/heads.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "binary_format.hpp"
#include "rstc/errors.hpp"
#include "rstc/numerics.hpp"
#include "rstc/rng.hpp"

namespace rstc {
namespace {

constexpr char kCheckpointMagic[4] = {'R', 'S', 'T', 'H'};
constexpr std::uint32_t kCheckpointVersion = 1;

void fill_glorot(DenseMatrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.data()) v = rng.uniform(-limit, limit);
}

void check_input(const DenseMatrix& embeddings, const HeadParams& params, const char* what) {
  if (embeddings.cols() != params.input_dim()) {
    throw std::invalid_argument(std::string(what) + ": embedding width " +
                                std::to_string(embeddings.cols()) + " != head input " +
                                std::to_string(params.input_dim()));
  }
}

void add_column_sums(const DenseMatrix& m, DenseMatrix& bias_grad) {
  const auto sums = column_sums(m);
  auto dst = bias_grad.row(0);
  for (std::size_t j = 0; j < sums.size(); ++j) dst[j] += sums[j];
}

void accumulate(DenseMatrix& dst, const DenseMatrix& src) {
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

}  // namespace

HeadParams HeadParams::zeros(std::size_t input_dim, std::size_t num_classes,
                             std::size_t projection_dim) {
  HeadParams p;
  p.gp_weight = DenseMatrix(input_dim, num_classes);
  p.gp_bias = DenseMatrix(1, num_classes);
  p.gz_weight1 = DenseMatrix(input_dim, input_dim);
  p.gz_bias1 = DenseMatrix(1, input_dim);
  p.gz_weight2 = DenseMatrix(input_dim, projection_dim);
  p.gz_bias2 = DenseMatrix(1, projection_dim);
  return p;
}

HeadParams HeadParams::glorot(std::size_t input_dim, std::size_t num_classes,
                              std::size_t projection_dim, std::uint64_t seed) {
  HeadParams p = zeros(input_dim, num_classes, projection_dim);
  Rng rng(seed);
  fill_glorot(p.gp_weight, rng);
  fill_glorot(p.gz_weight1, rng);
  fill_glorot(p.gz_weight2, rng);
  return p;
}

std::vector<DenseMatrix*> HeadParams::tensors() {
  return {&gp_weight, &gp_bias, &gz_weight1, &gz_bias1, &gz_weight2, &gz_bias2};
}

std::vector<const DenseMatrix*> HeadParams::tensors() const {
  return {&gp_weight, &gp_bias, &gz_weight1, &gz_bias1, &gz_weight2, &gz_bias2};
}

const std::vector<std::string_view>& HeadParams::tensor_names() {
  static const std::vector<std::string_view> names = {
      "gp_weight", "gp_bias", "gz_weight1", "gz_bias1", "gz_weight2", "gz_bias2"};
  return names;
}

bool HeadParams::same_shape(const HeadParams& other) const {
  const auto mine = tensors();
  const auto theirs = other.tensors();
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (mine[k]->rows() != theirs[k]->rows() || mine[k]->cols() != theirs[k]->cols()) return false;
  }
  return true;
}

AdamState AdamState::for_params(const HeadParams& params) {
  AdamState s;
  s.first_moment = HeadParams::zeros(params.input_dim(), params.num_classes(),
                                     params.projection_dim());
  s.second_moment = s.first_moment;
  return s;
}

DenseMatrix clustering_logits(const DenseMatrix& embeddings, const HeadParams& params) {
  check_input(embeddings, params, "forward_clustering");
  DenseMatrix logits = matmul(embeddings, params.gp_weight);
  add_row_vector(logits, params.gp_bias.row(0));
  return logits;
}

DenseMatrix forward_clustering(const DenseMatrix& embeddings, const HeadParams& params) {
  return softmax_rows(clustering_logits(embeddings, params));
}

ProjectionCache forward_projection_cached(const DenseMatrix& embeddings,
                                          const HeadParams& params) {
  check_input(embeddings, params, "forward_projection");
  ProjectionCache cache;
  cache.pre_activation = matmul(embeddings, params.gz_weight1);
  add_row_vector(cache.pre_activation, params.gz_bias1.row(0));
  cache.hidden = cache.pre_activation;
  for (double& v : cache.hidden.data()) v = v > 0.0 ? v : 0.0;
  cache.output = matmul(cache.hidden, params.gz_weight2);
  add_row_vector(cache.output, params.gz_bias2.row(0));
  return cache;
}

DenseMatrix forward_projection(const DenseMatrix& embeddings, const HeadParams& params) {
  return forward_projection_cached(embeddings, params).output;
}

void backward_clustering(const DenseMatrix& embeddings, const DenseMatrix& logit_grad,
                         HeadParams& grads) {
  accumulate(grads.gp_weight, matmul_at_b(embeddings, logit_grad));
  add_column_sums(logit_grad, grads.gp_bias);
}

void backward_projection(const DenseMatrix& embeddings, const ProjectionCache& cache,
                         const DenseMatrix& output_grad, const HeadParams& params,
                         HeadParams& grads) {
  accumulate(grads.gz_weight2, matmul_at_b(cache.hidden, output_grad));
  add_column_sums(output_grad, grads.gz_bias2);
  DenseMatrix hidden_grad = matmul_a_bt(output_grad, params.gz_weight2);
  const auto pre = cache.pre_activation.data();
  auto hg = hidden_grad.data();
  for (std::size_t k = 0; k < hg.size(); ++k) {
    if (!(pre[k] > 0.0)) hg[k] = 0.0;
  }
  accumulate(grads.gz_weight1, matmul_at_b(embeddings, hidden_grad));
  add_column_sums(hidden_grad, grads.gz_bias1);
}

void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state, double lr) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw std::invalid_argument("adam_step: parameter, gradient and state shapes differ");
  }
  for (const DenseMatrix* g : grads.tensors()) require_finite(*g, "adam_step gradient");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pd = p[k]->data();
    const auto gd = g[k]->data();
    auto md = m[k]->data();
    auto vd = v[k]->data();
    for (std::size_t e = 0; e < pd.size(); ++e) {
      md[e] = state.beta1 * md[e] + (1.0 - state.beta1) * gd[e];
      vd[e] = state.beta2 * vd[e] + (1.0 - state.beta2) * gd[e] * gd[e];
      const double m_hat = md[e] / correction1;
      const double v_hat = vd[e] / correction2;
      pd[e] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void save_head_checkpoint(const HeadParams& params, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  const auto tensors = params.tensors();
  const auto& names = HeadParams::tensor_names();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    w.u32(static_cast<std::uint32_t>(names[k].size()));
    w.bytes(names[k].data(), names[k].size());
    w.u32(static_cast<std::uint32_t>(tensors[k]->rows()));
    w.u32(static_cast<std::uint32_t>(tensors[k]->cols()));
    for (double v : tensors[k]->data()) w.f64(v);
  }
  w.checksum();
  detail::write_file_atomic(path, w.buffer());
}

HeadParams load_head_checkpoint(const std::filesystem::path& path) {
  const auto file = detail::read_file(path);
  const std::string what = "head checkpoint " + path.string();
  if (file.size() < 4 || std::memcmp(file.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, what + ": bad magic");
  }
  const auto body = detail::verify_checksum(file, what);
  detail::ByteReader r(body, what);
  r.take(4);
  if (r.u32() != kCheckpointVersion) {
    throw FormatError(FormatErrorKind::kUnsupportedVersion, what + ": unsupported version");
  }
  HeadParams params;
  auto tensors = params.tensors();
  const auto& names = HeadParams::tensor_names();
  if (r.u32() != tensors.size()) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": unexpected tensor count");
  }
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto name_len = r.u32();
    const auto name = r.take(name_len);
    if (std::string_view(reinterpret_cast<const char*>(name.data()), name.size()) != names[k]) {
      throw FormatError(FormatErrorKind::kMalformed, what + ": expected tensor " +
                                                         std::string(names[k]));
    }
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    r.expect(rows * cols * 8);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = r.f64();
    *tensors[k] = DenseMatrix(rows, cols, std::move(data));
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": trailing bytes");
  }
  const auto& p = params;
  if (p.gp_bias.rows() != 1 || p.gp_bias.cols() != p.gp_weight.cols() ||
      p.gz_weight1.rows() != p.input_dim() || p.gz_weight1.cols() != p.input_dim() ||
      p.gz_weight2.rows() != p.input_dim() || p.gz_bias2.cols() != p.gz_weight2.cols() ||
      p.gz_bias1.cols() != p.input_dim()) {
    throw FormatError(FormatErrorKind::kMalformed, what + ": inconsistent tensor shapes");
  }
  return params;
}

}  // namespace rstc
