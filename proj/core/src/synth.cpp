#include "rstc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rstc/rng.hpp"

namespace rstc {
namespace {

DenseMatrix orthonormal_centroids(std::size_t count, std::size_t dim, double distance, Rng& rng) {
  DenseMatrix q(count, dim);
  for (std::size_t c = 0; c < count; ++c) {
    auto row = q.row(c);
    for (;;) {
      for (double& v : row) v = rng.normal();
      for (std::size_t prev = 0; prev < c; ++prev) {
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += row[d] * q(prev, d);
        for (std::size_t d = 0; d < dim; ++d) row[d] -= dot * q(prev, d);
      }
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (double& v : row) v /= norm;
        break;
      }
    }
  }
  // Orthonormal rows are sqrt(2) apart.
  for (double& v : q.data()) v *= distance / std::sqrt(2.0);
  return q;
}

DenseMatrix spread_centroids(std::size_t count, std::size_t dim, double distance, Rng& rng) {
  DenseMatrix m(count, dim);
  for (double& v : m.data()) v = rng.normal();
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a + 1; b < count; ++b) {
      double sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) sq += (m(a, d) - m(b, d)) * (m(a, d) - m(b, d));
      closest = std::min(closest, std::sqrt(sq));
    }
  }
  if (count > 1 && closest > 0.0) {
    for (double& v : m.data()) v *= distance / closest;
  }
  return m;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_classes == 0) throw std::invalid_argument("synth: num_classes must be positive");
  if (num_classes > num_samples) throw std::invalid_argument("synth: more classes than samples");
  if (dim == 0) throw std::invalid_argument("synth: dim must be positive");
  if (!(imbalance_ratio >= 1.0) || !std::isfinite(imbalance_ratio)) {
    throw std::invalid_argument("synth: imbalance_ratio must be >= 1");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("synth: separation must be >= 0");
  }
}

std::vector<std::size_t> synth_cluster_sizes(std::size_t num_classes, std::size_t num_samples,
                                             double imbalance_ratio) {
  if (num_classes == 0) throw std::invalid_argument("synth: num_classes must be positive");
  std::vector<double> weight(num_classes, 1.0);
  if (num_classes > 1) {
    for (std::size_t j = 0; j < num_classes; ++j) {
      weight[j] = std::pow(imbalance_ratio, -static_cast<double>(j) /
                                                static_cast<double>(num_classes - 1));
    }
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  std::vector<std::size_t> sizes(num_classes);
  std::vector<double> remainder(num_classes);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < num_classes; ++j) {
    const double exact = weight[j] / total * static_cast<double>(num_samples);
    sizes[j] = static_cast<std::size_t>(std::floor(exact));
    remainder[j] = exact - std::floor(exact);
    assigned += sizes[j];
  }
  std::vector<std::size_t> order(num_classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t k = 0; assigned < num_samples; ++k, ++assigned) ++sizes[order[k]];
  for (std::size_t j = 0; j < num_classes; ++j) {
    if (sizes[j] == 0) {
      throw std::invalid_argument("synth: cluster " + std::to_string(j) +
                                  " would be empty; raise num_samples or lower the ratio");
    }
  }
  return sizes;
}

EmbeddingDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto sizes = synth_cluster_sizes(cfg.num_classes, cfg.num_samples, cfg.imbalance_ratio);
  Rng rng(cfg.seed);
  const double distance = cfg.separation * std::sqrt(static_cast<double>(cfg.dim));
  const DenseMatrix centroids =
      cfg.num_classes <= cfg.dim ? orthonormal_centroids(cfg.num_classes, cfg.dim, distance, rng)
                                 : spread_centroids(cfg.num_classes, cfg.dim, distance, rng);

  std::vector<std::size_t> labels;
  labels.reserve(cfg.num_samples);
  for (std::size_t j = 0; j < sizes.size(); ++j) labels.insert(labels.end(), sizes[j], j);
  rng.shuffle(std::span<std::size_t>(labels));

  const std::size_t width = cfg.dim + cfg.noise_dims;
  EmbeddingDataset out;
  out.embeddings = DenseMatrix(cfg.num_samples, width);
  for (std::size_t i = 0; i < cfg.num_samples; ++i) {
    auto row = out.embeddings.row(i);
    const auto center = centroids.row(labels[i]);
    for (std::size_t d = 0; d < cfg.dim; ++d) row[d] = center[d] + rng.normal();
    for (std::size_t d = cfg.dim; d < width; ++d) row[d] = rng.normal();
  }
  out.labels = std::move(labels);
  out.name = "synth";
  return out;
}

}  // namespace rstc
