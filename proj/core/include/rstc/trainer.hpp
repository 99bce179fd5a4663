#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rstc/augment.hpp"
#include "rstc/dataset.hpp"
#include "rstc/heads.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/transport.hpp"

namespace rstc {

/// How pseudo-labels are produced at each refresh.
enum class OtMode {
  /// Self-adaptive OT with the log-barrier penalty on the class marginal.
  kSaot,
  /// Entropic OT with a uniform class marginal.
  kFixed,
  /// Entropic OT with a moving-average estimate of the class marginal.
  kMovingAverage,
  /// Self-adaptive OT with a KL penalty towards the previous marginal.
  kKl,
};

/// Penalty weights for the three imbalance regimes.
enum class Epsilon2Preset { kBalanced, kLightImbalanced, kHeavyImbalanced };
double epsilon2_value(Epsilon2Preset preset) noexcept;

struct TrainConfig {
  double lambda_i = 10.0;
  std::size_t batch_size = 200;
  /// Training stops at a refresh whose assignment change rate is below this.
  double delta = 0.01;
  /// Unset: 60 epochs, i.e. 60 * ceil(N / batch_size) steps.
  std::optional<std::size_t> max_steps;
  /// Leading steps trained on the instance-wise loss only.
  std::size_t warmup_instance_only_steps = 0;
  std::size_t num_refreshes = 15;
  /// Epochs fitted to the k-means labels before the refresh schedule starts.
  std::size_t initial_fit_epochs = 10;
  double head_lr = 5e-4;
  std::size_t projection_dim = 128;
  double tau = 1.0;
  std::uint64_t seed = 0;
  OtMode ot_mode = OtMode::kSaot;
  /// Overrides saot.epsilon2 when set.
  std::optional<Epsilon2Preset> epsilon2_preset;
  SaotConfig saot;
  /// Moving-average weight for OtMode::kMovingAverage.
  double ma_mu = 0.9;
  /// Sinkhorn sweeps for the fixed-marginal modes.
  std::size_t fixed_ot_iters = 1000;
  AugmentConfig augment;

  double effective_epsilon2() const noexcept;
  /// Throws std::invalid_argument naming the offending field.
  void validate(std::size_t num_classes) const;
};

struct TrainRecord {
  std::size_t step = 0;
  std::size_t clusters = 0;
  double change_rate = 0.0;
  /// Mean losses over the steps since the previous record; NaN before training.
  double loss_c = 0.0;
  double loss_i = 0.0;
  /// Present when the dataset has labels.
  std::optional<double> acc;
  std::optional<double> nmi;
  /// Class marginal behind this record's pseudo-labels.
  std::vector<double> marginal;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainReport {
  std::size_t num_classes = 0;
  /// One record for the k-means initialization (step 0), then one per refresh.
  std::vector<TrainRecord> records;
  std::vector<std::size_t> assignments;
  std::size_t steps_run = 0;
  bool stopped_early = false;
};

/// The full loop: k-means pseudo-labels, then mini-batch Adam on
/// L_C + lambda_i * L_I with pseudo-labels re-derived from transport plans over
/// full-dataset predictions at each scheduled refresh, stopping once the
/// assignment change rate drops below delta. Assignments are the row argmax
/// of the clustering head's predictions (the k-means labels if no step ran).
/// Throws std::invalid_argument for C < 2 or C > N and NumericError (with the
/// step) on a non-finite loss.
TrainReport run_rstc(const EmbeddingDataset& dataset, std::size_t num_classes,
                     const TrainConfig& cfg);

/// Refresh steps for a run: after fit_epochs whole epochs (an epoch being
/// steps_per_epoch mini-batches), the geometric schedule laid over the
/// remaining epochs. Steps are strictly increasing and end at total_steps;
/// empty when total_steps is 0.
RefreshSchedule epoch_refresh_schedule(std::size_t total_steps, std::size_t steps_per_epoch,
                                       std::size_t num_refreshes, std::size_t fit_epochs = 0);

/// Fraction of positions where the two label vectors differ.
double assignment_change_rate(std::span<const std::size_t> previous,
                              std::span<const std::size_t> current);

/// Number of distinct row-argmax columns.
std::size_t predicted_cluster_count(const DenseMatrix& predictions);

}  // namespace rstc
