#include "rstc/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rstc/rng.hpp"

namespace rstc {
namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - y[d];
    total += diff * diff;
  }
  return total;
}

DenseMatrix plus_plus_seeds(const DenseMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  DenseMatrix centers(k, points.cols());
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.uniform_index(n);
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = points.row(pick);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(points.row(i), centers.row(c)));
      total += closest[i];
    }
    if (c + 1 == k) break;
    if (!(total > 0.0)) {
      pick = rng.uniform_index(n);
      continue;
    }
    const double target = rng.uniform() * total;
    double running = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      running += closest[i];
      if (running > target && closest[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

}  // namespace

PseudoLabels PseudoLabels::from_assignments(std::span<const std::size_t> labels,
                                            std::size_t num_classes, std::size_t generation) {
  PseudoLabels out;
  out.matrix_ = DenseMatrix(labels.size(), num_classes);
  out.labels_.assign(labels.begin(), labels.end());
  out.generation_ = generation;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw std::invalid_argument("PseudoLabels: label " + std::to_string(labels[i]) +
                                  " out of range for " + std::to_string(num_classes) + " classes");
    }
    out.matrix_(i, labels[i]) = 1.0;
  }
  return out;
}

PseudoLabels harden(const DenseMatrix& plan, std::size_t generation) {
  for (double v : plan.data()) {
    if (!(v >= 0.0)) throw std::invalid_argument("harden: plan has a negative or NaN entry");
  }
  const auto labels = argmax_rows(plan);
  return PseudoLabels::from_assignments(labels, plan.cols(), generation);
}

KMeansResult kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) {
    throw std::invalid_argument("kmeans: " + std::to_string(k) + " clusters for " +
                                std::to_string(n) + " points");
  }
  require_finite(points, "kmeans");

  Rng rng(seed);
  KMeansResult result;
  result.centroids = plus_plus_seeds(points, k, rng);
  result.labels.assign(n, 0);
  std::vector<std::size_t> previous(n, k);
  std::vector<double> own_distance(n, 0.0);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points.row(i), result.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points.row(i), result.centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      result.labels[i] = best;
      inertia += best_d;
    }
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;
    if (result.labels == previous) break;
    previous = result.labels;

    DenseMatrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(result.labels[i]);
      const auto src = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
      ++counts[result.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto centroid = result.centroids.row(c);
      const auto s = sums.row(c);
      for (std::size_t d = 0; d < dim; ++d) centroid[d] = s[d] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.labels[i]] < 2) continue;
        const double d = squared_distance(points.row(i), result.centroids.row(result.labels[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;
      --counts[result.labels[far]];
      result.labels[far] = c;
      counts[c] = 1;
      const auto src = points.row(far);
      std::copy(src.begin(), src.end(), result.centroids.row(c).begin());
    }
  }
  return result;
}

PseudoLabels kmeans_init(const DenseMatrix& embeddings, std::size_t num_classes,
                         std::uint64_t seed) {
  const auto result = kmeans(embeddings, num_classes, seed);
  return PseudoLabels::from_assignments(result.labels, num_classes, 0);
}

bool RefreshSchedule::contains(std::size_t step) const {
  return std::binary_search(steps.begin(), steps.end(), step);
}

RefreshSchedule make_schedule(std::size_t total_steps, std::size_t num_refreshes) {
  if (num_refreshes < 1) throw std::invalid_argument("make_schedule: num_refreshes must be >= 1");
  if (total_steps < num_refreshes) {
    throw std::invalid_argument("make_schedule: total_steps must be >= num_refreshes");
  }
  RefreshSchedule schedule;
  const double total = static_cast<double>(total_steps);
  for (std::size_t k = 1; k <= num_refreshes; ++k) {
    const double exponent = static_cast<double>(k) / static_cast<double>(num_refreshes);
    const auto step = static_cast<std::size_t>(std::llround(std::pow(total, exponent)));
    const std::size_t clamped = std::clamp<std::size_t>(step, 1, total_steps);
    if (schedule.steps.empty() || clamped > schedule.steps.back()) schedule.steps.push_back(clamped);
  }
  if (schedule.steps.back() != total_steps) schedule.steps.push_back(total_steps);
  return schedule;
}

}  // namespace rstc
