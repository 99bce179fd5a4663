#include "rstc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rstc/errors.hpp"
#include "rstc/losses.hpp"
#include "rstc/metrics.hpp"
#include "rstc/numerics.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/rng.hpp"

namespace rstc {
namespace {

// Stream indices for mix_seed, one per independent random consumer.
constexpr std::uint64_t kStreamKmeans = 1;
constexpr std::uint64_t kStreamHeads = 2;
constexpr std::uint64_t kStreamBatches = 3;
constexpr std::uint64_t kStreamMarginalInit = 4;

std::vector<double> label_fractions(std::span<const std::size_t> labels, std::size_t classes) {
  std::vector<double> out(classes, 0.0);
  if (labels.empty()) return out;
  for (std::size_t label : labels) out[label] += 1.0;
  for (double& v : out) v /= static_cast<double>(labels.size());
  return out;
}

std::size_t distinct_count(std::span<const std::size_t> labels, std::size_t classes) {
  std::vector<char> seen(classes, 0);
  for (std::size_t label : labels) seen[label] = 1;
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
}

ProbVector random_marginal(std::size_t classes, Rng& rng) {
  std::vector<double> w(classes);
  for (double& v : w) v = 0.5 + rng.uniform();
  return ProbVector::normalized(std::move(w));
}

void scale(HeadParams& grads, double factor) {
  for (DenseMatrix* t : grads.tensors()) {
    for (double& v : t->data()) v *= factor;
  }
}

// Draws mini-batches epoch by epoch without replacement; a trailing partial
// batch is dropped and the next epoch reshuffles.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
      : order_(n), batch_(std::min(batch, n)), rng_(seed) {
    std::iota(order_.begin(), order_.end(), 0);
    cursor_ = order_.size();
  }

  std::span<const std::size_t> next() {
    if (cursor_ + batch_ > order_.size()) {
      rng_.shuffle(std::span<std::size_t>(order_));
      cursor_ = 0;
    }
    std::span<const std::size_t> out(order_.data() + cursor_, batch_);
    cursor_ += batch_;
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t cursor_;
  Rng rng_;
};

struct Refresh {
  PseudoLabels labels;
  std::vector<double> marginal;
};

Refresh refresh_pseudo_labels(const DenseMatrix& predictions, const TrainConfig& cfg,
                              std::size_t generation, const ProbVector& previous_b) {
  const std::size_t n = predictions.rows();
  const std::size_t classes = predictions.cols();
  const CostMatrix cost = cost_from_predictions(predictions);
  const ProbVector a = ProbVector::uniform(n);
  SaotConfig saot = cfg.saot;
  saot.epsilon2 = cfg.effective_epsilon2();

  SaotSolution solution;
  switch (cfg.ot_mode) {
    case OtMode::kSaot: {
      saot.penalty = MarginalPenalty::kLogBarrier;
      Rng rng(mix_seed(mix_seed(cfg.seed, kStreamMarginalInit), generation));
      solution = solve_saot(cost, a, saot, random_marginal(classes, rng));
      break;
    }
    case OtMode::kKl:
      saot.penalty = MarginalPenalty::kKlToPrevious;
      solution = solve_saot(cost, a, saot, previous_b);
      break;
    case OtMode::kFixed:
      solution = solve_fixed_marginal_ot(cost, a, ProbVector::uniform(classes), saot.epsilon1,
                                         cfg.fixed_ot_iters);
      break;
    case OtMode::kMovingAverage: {
      const ProbVector b = estimate_marginal_moving_average(predictions, {previous_b, cfg.ma_mu});
      solution = solve_fixed_marginal_ot(cost, a, b, saot.epsilon1, cfg.fixed_ot_iters);
      break;
    }
  }
  const auto values = solution.marginal.values();
  return {harden(solution.plan, generation), std::vector<double>(values.begin(), values.end())};
}

void evaluate(TrainRecord& record, const EmbeddingDataset& dataset,
              std::span<const std::size_t> assignments) {
  if (!dataset.labels || dataset.labels->empty()) return;
  record.acc = accuracy(*dataset.labels, assignments);
  record.nmi = nmi(*dataset.labels, assignments);
}

}  // namespace

double epsilon2_value(Epsilon2Preset preset) noexcept {
  switch (preset) {
    case Epsilon2Preset::kBalanced:
      return 0.1;
    case Epsilon2Preset::kLightImbalanced:
      return 0.01;
    case Epsilon2Preset::kHeavyImbalanced:
      return 0.001;
  }
  return 0.1;
}

double TrainConfig::effective_epsilon2() const noexcept {
  return epsilon2_preset ? epsilon2_value(*epsilon2_preset) : saot.epsilon2;
}

void TrainConfig::validate(std::size_t num_classes) const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (!std::isfinite(lambda_i) || lambda_i < 0.0) fail("lambda_i must be finite and >= 0");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (num_refreshes < 1) fail("num_refreshes must be >= 1");
  if (!(head_lr > 0.0) || !std::isfinite(head_lr)) fail("head_lr must be positive");
  if (projection_dim < 1) fail("projection_dim must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
  if (!(ma_mu >= 0.0 && ma_mu <= 1.0)) fail("ma_mu must lie in [0, 1]");
  if (fixed_ot_iters < 1) fail("fixed_ot_iters must be >= 1");
  SaotConfig s = saot;
  s.epsilon2 = effective_epsilon2();
  s.validate(num_classes);
  augment.validate();
}

double assignment_change_rate(std::span<const std::size_t> previous,
                              std::span<const std::size_t> current) {
  if (previous.size() != current.size()) {
    throw std::invalid_argument("assignment_change_rate: length mismatch (" +
                                std::to_string(previous.size()) + " vs " +
                                std::to_string(current.size()) + ")");
  }
  if (previous.empty()) return 0.0;
  std::size_t changed = 0;
  for (std::size_t i = 0; i < previous.size(); ++i) changed += previous[i] != current[i];
  return static_cast<double>(changed) / static_cast<double>(previous.size());
}

std::size_t predicted_cluster_count(const DenseMatrix& predictions) {
  return distinct_count(argmax_rows(predictions), predictions.cols());
}

RefreshSchedule epoch_refresh_schedule(std::size_t total_steps, std::size_t steps_per_epoch,
                                       std::size_t num_refreshes, std::size_t fit_epochs) {
  if (steps_per_epoch == 0) throw std::invalid_argument("epoch_refresh_schedule: empty epoch");
  RefreshSchedule schedule;
  if (total_steps == 0 || num_refreshes == 0) return schedule;
  const std::size_t offset = std::min(total_steps, fit_epochs * steps_per_epoch);
  if (offset == total_steps) {
    schedule.steps.push_back(total_steps);
    return schedule;
  }
  const std::size_t epochs = (total_steps - offset + steps_per_epoch - 1) / steps_per_epoch;
  for (std::size_t e : make_schedule(epochs, std::min(num_refreshes, epochs)).steps) {
    const std::size_t step = std::min(total_steps, offset + e * steps_per_epoch);
    if (schedule.steps.empty() || schedule.steps.back() != step) schedule.steps.push_back(step);
  }
  return schedule;
}

TrainReport run_rstc(const EmbeddingDataset& dataset, std::size_t num_classes,
                     const TrainConfig& cfg) {
  dataset.validate();
  const std::size_t n = dataset.size();
  if (num_classes < 2) throw std::invalid_argument("run_rstc: need at least 2 classes");
  if (num_classes > n) {
    throw std::invalid_argument("run_rstc: " + std::to_string(num_classes) +
                                " classes for " + std::to_string(n) + " samples");
  }
  cfg.validate(num_classes);
  const DenseMatrix& embeddings = dataset.embeddings;
  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t total_steps =
      cfg.max_steps ? *cfg.max_steps : 60 * ((n + cfg.batch_size - 1) / cfg.batch_size);

  TrainReport report;
  report.num_classes = num_classes;

  PseudoLabels targets = kmeans_init(embeddings, num_classes, mix_seed(cfg.seed, kStreamKmeans));
  std::vector<std::size_t> previous = targets.labels();
  {
    TrainRecord init;
    init.clusters = distinct_count(previous, num_classes);
    init.loss_c = std::numeric_limits<double>::quiet_NaN();
    init.loss_i = std::numeric_limits<double>::quiet_NaN();
    init.marginal = label_fractions(previous, num_classes);
    evaluate(init, dataset, previous);
    report.records.push_back(std::move(init));
  }
  if (total_steps == 0) {
    report.assignments = previous;
    return report;
  }

  const RefreshSchedule schedule =
      epoch_refresh_schedule(total_steps, std::max<std::size_t>(1, n / batch),
                             cfg.num_refreshes, cfg.initial_fit_epochs);
  HeadParams params = HeadParams::glorot(embeddings.cols(), num_classes, cfg.projection_dim,
                                         mix_seed(cfg.seed, kStreamHeads));
  AdamState adam = AdamState::for_params(params);
  BatchSampler sampler(n, batch, mix_seed(cfg.seed, kStreamBatches));
  ProbVector previous_b = ProbVector::uniform(num_classes);
  std::size_t generation = 0;
  double sum_c = 0.0;
  double sum_i = 0.0;
  std::size_t since_record = 0;

  for (std::size_t step = 1; step <= total_steps; ++step) {
    const auto rows = sampler.next();
    const DenseMatrix batch_e = select_rows(embeddings, rows);
    std::optional<ViewPair> stored;
    if (dataset.views) {
      stored = ViewPair{select_rows(dataset.views->first, rows),
                        select_rows(dataset.views->second, rows)};
    }
    const ViewPair views = make_views(batch_e, cfg.augment, step, stored ? &*stored : nullptr);

    HeadParams grads = HeadParams::zeros(params.input_dim(), num_classes, cfg.projection_dim);
    const ProjectionCache z1 = forward_projection_cached(views.first, params);
    const ProjectionCache z2 = forward_projection_cached(views.second, params);
    const InstanceWiseResult inst = instance_wise_loss(z1.output, z2.output, cfg.tau);
    backward_projection(views.first, z1, inst.grad1, params, grads);
    backward_projection(views.second, z2, inst.grad2, params, grads);

    double loss_c = 0.0;
    const bool warmup = step <= cfg.warmup_instance_only_steps;
    if (!warmup) {
      scale(grads, cfg.lambda_i);
      std::vector<std::size_t> batch_targets(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) batch_targets[k] = targets.labels()[rows[k]];
      const auto batch_q = PseudoLabels::from_assignments(batch_targets, num_classes);
      const ClassWiseResult cls = class_wise_loss(batch_q, forward_clustering(views.first, params),
                                                  forward_clustering(views.second, params));
      backward_clustering(views.first, cls.logit_grad1, grads);
      backward_clustering(views.second, cls.logit_grad2, grads);
      loss_c = cls.loss;
    }
    const double loss = warmup ? inst.loss : total_loss(loss_c, inst.loss, cfg.lambda_i);
    if (!std::isfinite(loss)) {
      throw NumericError("run_rstc: non-finite loss at step " + std::to_string(step));
    }
    adam_step(params, grads, adam, cfg.head_lr);
    sum_c += loss_c;
    sum_i += inst.loss;
    ++since_record;
    report.steps_run = step;

    if (!schedule.contains(step)) continue;

    const DenseMatrix predictions = forward_clustering(embeddings, params);
    Refresh fresh = refresh_pseudo_labels(predictions, cfg, ++generation, previous_b);
    targets = std::move(fresh.labels);
    previous_b = ProbVector::normalized(fresh.marginal);
    const auto current = argmax_rows(predictions);

    TrainRecord record;
    record.step = step;
    record.clusters = distinct_count(current, num_classes);
    record.change_rate = assignment_change_rate(previous, current);
    record.loss_c = sum_c / static_cast<double>(since_record);
    record.loss_i = sum_i / static_cast<double>(since_record);
    record.marginal = std::move(fresh.marginal);
    evaluate(record, dataset, current);
    report.records.push_back(std::move(record));
    sum_c = sum_i = 0.0;
    since_record = 0;
    previous = current;
    if (report.records.back().change_rate < cfg.delta) {
      report.stopped_early = step < total_steps;
      break;
    }
  }
  report.assignments = argmax_rows(forward_clustering(embeddings, params));
  return report;
}

}  // namespace rstc
