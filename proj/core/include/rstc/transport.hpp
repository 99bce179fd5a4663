#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rstc/dense_matrix.hpp"

namespace rstc {

/// Predictions are clamped to this value before taking logs, which bounds
/// every cost by -log(1e-30) ~= 69.08.
inline constexpr double kProbabilityFloor = 1e-30;

/// Cost of moving a sample's mass to a class, M = -log P (samples x classes).
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Accepts any finite, nonnegative matrix.
  static CostMatrix from_matrix(DenseMatrix m);

  const DenseMatrix& matrix() const noexcept { return m_; }
  std::size_t rows() const noexcept { return m_.rows(); }
  std::size_t cols() const noexcept { return m_.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

 private:
  explicit CostMatrix(DenseMatrix m) : m_(std::move(m)) {}
  DenseMatrix m_;
};

/// M = -log(max(P, kProbabilityFloor)). Rows of P must sum to 1 within 1e-6.
CostMatrix cost_from_predictions(const DenseMatrix& predictions);

enum class MarginalPenalty {
  /// Psi(b) = -log b - log(1 - b), summed over classes.
  kLogBarrier,
  /// Psi(b) = KL(b || b_prev) where b_prev is the previous outer iterate.
  kKlToPrevious,
};

enum class SaotUpdate {
  /// Each outer iteration solves the column-potential equation and the
  /// marginal stationarity condition together. This is exact block ascent on
  /// the dual and converges for any epsilon ratio.
  kJoint,
  /// The textbook sequence: g from the current b, then b from g via the
  /// Newton solve for h. Oscillates once epsilon2 is small next to epsilon1.
  kAlternating,
};

struct SaotConfig {
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  std::size_t outer_iters = 200;
  std::size_t newton_iters = 10;
  /// Marginal entries are clamped to [marginal_floor, 1 - marginal_floor].
  double marginal_floor = 1e-6;
  /// Early exit once the L1 row-marginal residual falls below this...
  double stall_tol = 1e-6;
  /// ...and the L-inf change of b between outer iterations falls below this.
  double marginal_change_tol = 1e-7;
  /// Fixed-b Sinkhorn sweeps run after the outer loop to tighten marginals.
  std::size_t polish_iters = 1000;
  MarginalPenalty penalty = MarginalPenalty::kLogBarrier;
  SaotUpdate update = SaotUpdate::kJoint;

  /// Throws std::invalid_argument if a field is out of range for `num_classes`.
  void validate(std::size_t num_classes) const;
};

struct SaotDiagnostics {
  std::vector<double> objective_trace;
  std::vector<std::vector<double>> marginal_trace;
  /// Outer iterations in which some b entry hit the floor and was renormalized.
  std::size_t clamp_events = 0;
  double row_residual = 0.0;
  double column_residual = 0.0;
  bool converged = false;
};

struct SaotSolution {
  DenseMatrix plan;
  ProbVector marginal;
  std::vector<double> f;
  std::vector<double> g;
  double h = 0.0;
  double objective = 0.0;
  std::size_t outer_iters_used = 0;
  SaotDiagnostics diagnostics;
};

/// Entropic OT with both marginals fixed, in log domain. Columns with zero
/// mass in `b` get g = -inf and an empty plan column.
SaotSolution solve_fixed_marginal_ot(const CostMatrix& cost, const ProbVector& a,
                                     const ProbVector& b, double epsilon1, std::size_t iters);

/// Self-adaptive OT: alternates the row potential, the column potential and
/// the class marginal b until the KKT system holds, then returns
/// plan_ij = exp((f_i + g_j - M_ij) / epsilon1).
///
/// Under kLogBarrier, b_j and g_j satisfy
///   epsilon2 * (1/(1-b_j) - 1/b_j) + g_j = h,   sum_j b_j = 1,
/// whose admissible root is marginal_from_h. Under kKlToPrevious,
/// minimizing epsilon2*KL(b||b_prev) + <g, b> over the simplex gives
/// b_j ∝ b_prev_j * exp(-g_j / epsilon2); with g_j = epsilon1*log b_j + c_j
/// (c_j the column log-normalizer) this becomes
/// b_j ∝ exp((epsilon2*log b_prev_j - c_j) / (epsilon1 + epsilon2)).
SaotSolution solve_saot(const CostMatrix& cost, const ProbVector& a, const SaotConfig& cfg,
                        const ProbVector& init_b);

/// b_j as a function of gap = g_j - h: the root of
/// gap*b^2 - (gap + 2*eps2)*b + eps2 = 0 lying in (0, 1). Evaluated in a
/// cancellation-free form; returns exactly 0.5 when |gap| < 1e-12.
double marginal_entry(double gap, double epsilon2) noexcept;
/// d marginal_entry / d gap = -b(1-b) / sqrt(gap^2 + 4 eps2^2).
double marginal_entry_derivative(double gap, double epsilon2) noexcept;

/// b(h) for every class. Sums to one only at the root of marginal_residual.
std::vector<double> marginal_from_h(std::span<const double> g, double h, double epsilon2);
/// sum_j b_j(h) - 1.
double marginal_residual(std::span<const double> g, double h, double epsilon2);
/// d/dh of marginal_residual, analytic.
double marginal_residual_derivative(std::span<const double> g, double h, double epsilon2);

/// Runs `iters` safeguarded Newton steps on sum_j b_j(h) = 1 starting at h0.
/// Steps are taken in t with h = min(g) + 2*eps2*sinh(t); a step leaving the
/// root bracket (from the order statistics of g, narrowed as signs are
/// observed), or a derivative below 1e-14, is replaced by bisection. An h0
/// outside the bracket, or worse than a dominant-class guess, is not used.
double newton_root_h(std::span<const double> g, double epsilon2, double h0, std::size_t iters);

struct MarginalEstimatorState {
  ProbVector previous_b;
  double mu = 0.9;
};

/// Moving-average class-distribution estimate: mu * b_prev + (1 - mu) * gamma,
/// gamma_j being the fraction of rows whose argmax is j.
ProbVector estimate_marginal_moving_average(const DenseMatrix& predictions,
                                            const MarginalEstimatorState& state);

/// <plan, M> + eps1 * <plan, log plan - 1> + eps2 * penalty(b), with 0 log 0 = 0.
/// `reference_b` is the KL anchor and is required only under kKlToPrevious.
double saot_objective(const DenseMatrix& plan, const CostMatrix& cost, std::span<const double> b,
                      const SaotConfig& cfg, std::span<const double> reference_b = {});

/// sum_j -log b_j - log(1 - b_j).
double log_barrier_penalty(std::span<const double> b);

}  // namespace rstc
