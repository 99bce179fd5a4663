#include "rstc/augment.hpp"

#include <stdexcept>

#include "rstc/rng.hpp"

namespace rstc {
namespace {

DenseMatrix noisy_copy(const DenseMatrix& e, double sigma, Rng& rng) {
  DenseMatrix out = e;
  if (sigma == 0.0) return out;
  for (double& v : out.data()) v += sigma * rng.normal();
  return out;
}

DenseMatrix dropout_copy(const DenseMatrix& e, double rate, Rng& rng) {
  DenseMatrix out = e;
  if (rate == 0.0) return out;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : out.data()) v = rng.uniform() < rate ? 0.0 : v * keep_scale;
  return out;
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("augment: noise_sigma must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("augment: dropout_rate must lie in [0, 1)");
  }
}

AugmentStrategy resolve_strategy(const AugmentConfig& cfg, bool has_stored_views) noexcept {
  if (cfg.strategy) return *cfg.strategy;
  return has_stored_views ? AugmentStrategy::kPrecomputed : AugmentStrategy::kGaussianNoise;
}

ViewPair make_views(const DenseMatrix& embeddings, const AugmentConfig& cfg, std::size_t step,
                    const ViewPair* stored) {
  cfg.validate();
  switch (resolve_strategy(cfg, stored != nullptr)) {
    case AugmentStrategy::kPrecomputed: {
      if (stored == nullptr) {
        throw std::invalid_argument("make_views: precomputed views requested but none stored");
      }
      for (const DenseMatrix* v : {&stored->first, &stored->second}) {
        if (v->rows() != embeddings.rows() || v->cols() != embeddings.cols()) {
          throw std::invalid_argument("make_views: stored views do not match embeddings");
        }
      }
      return *stored;
    }
    case AugmentStrategy::kGaussianNoise: {
      Rng rng(mix_seed(cfg.seed, step));
      ViewPair views;
      views.first = noisy_copy(embeddings, cfg.noise_sigma, rng);
      views.second = noisy_copy(embeddings, cfg.noise_sigma, rng);
      return views;
    }
    case AugmentStrategy::kFeatureDropout: {
      Rng rng(mix_seed(cfg.seed, step));
      ViewPair views;
      views.first = dropout_copy(embeddings, cfg.dropout_rate, rng);
      views.second = dropout_copy(embeddings, cfg.dropout_rate, rng);
      return views;
    }
  }
  throw std::logic_error("make_views: unknown strategy");
}

}  // namespace rstc
