#include "rstc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstc/errors.hpp"
#include "rstc/numerics.hpp"

namespace rstc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Logit range searched when solving for a class marginal; sigmoid(60) == 1 in double.
constexpr double kLogitLimit = 60.0;

void require_finite_values(std::span<const double> v, const char* what, std::size_t iteration) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string(what) + ": non-finite potential at iteration " +
                         std::to_string(iteration));
    }
  }
}

// Root of an increasing function on [lo, hi] with value(lo) <= 0 <= value(hi).
// `fn` returns {value, derivative}. Newton steps that leave the current
// bracket are replaced by bisection.
template <typename Fn>
double safeguarded_newton(Fn&& fn, double lo, double hi, double x, std::size_t max_iter,
                          double value_tol) {
  x = std::clamp(x, lo, hi);
  for (std::size_t k = 0; k < max_iter; ++k) {
    const auto [value, slope] = fn(x);
    if (std::abs(value) <= value_tol) return x;
    if (value < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      return x;
    }
    double next = slope > 0.0 ? x - value / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

// f_i = eps1 * (log a_i - LSE_j((g_j - M_ij) / eps1)).
void update_row_potentials(const CostMatrix& cost, std::span<const double> log_a,
                           std::span<const double> g, double epsilon1, std::span<double> f) {
  const std::size_t n = cost.rows();
  const std::size_t c = cost.cols();
  std::vector<double> scratch(c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = cost.matrix().row(i);
    for (std::size_t j = 0; j < c; ++j) scratch[j] = (g[j] - m[j]) / epsilon1;
    f[i] = epsilon1 * (log_a[i] - log_sum_exp(scratch));
  }
}

// c_j = -eps1 * LSE_i((f_i - M_ij) / eps1), so that g_j = eps1 * log b_j + c_j
// gives column j total mass b_j.
void column_log_normalizers(const CostMatrix& cost, std::span<const double> f, double epsilon1,
                            std::span<double> out) {
  const std::size_t n = cost.rows();
  const std::size_t c = cost.cols();
  std::vector<double> shift(c, kNegInf);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = cost.matrix().row(i);
    for (std::size_t j = 0; j < c; ++j) shift[j] = std::max(shift[j], (f[i] - m[j]) / epsilon1);
  }
  std::vector<double> total(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = cost.matrix().row(i);
    for (std::size_t j = 0; j < c; ++j) total[j] += std::exp((f[i] - m[j]) / epsilon1 - shift[j]);
  }
  for (std::size_t j = 0; j < c; ++j) out[j] = -epsilon1 * (shift[j] + std::log(total[j]));
}

struct PlanStats {
  double row_residual = 0.0;
  double column_residual = 0.0;
  double objective = 0.0;  // transport + entropy terms only
};

PlanStats plan_stats(const CostMatrix& cost, std::span<const double> a, std::span<const double> b,
                     std::span<const double> f, std::span<const double> g, double epsilon1) {
  PlanStats s;
  const std::size_t n = cost.rows();
  const std::size_t c = cost.cols();
  std::vector<double> col(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = cost.matrix().row(i);
    double row = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (g[j] == kNegInf) continue;
      const double log_p = (f[i] + g[j] - m[j]) / epsilon1;
      const double p = std::exp(log_p);
      row += p;
      col[j] += p;
      s.objective += p * (m[j] + epsilon1 * (log_p - 1.0));
    }
    s.row_residual += std::abs(row - a[i]);
  }
  for (std::size_t j = 0; j < c; ++j) s.column_residual += std::abs(col[j] - b[j]);
  return s;
}

DenseMatrix materialize_plan(const CostMatrix& cost, std::span<const double> f,
                             std::span<const double> g, double epsilon1) {
  DenseMatrix plan(cost.rows(), cost.cols());
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    const auto m = cost.matrix().row(i);
    auto out = plan.row(i);
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      out[j] = g[j] == kNegInf ? 0.0 : std::exp((f[i] + g[j] - m[j]) / epsilon1);
    }
  }
  return plan;
}

void set_column_potentials(std::span<const double> c, std::span<const double> b, double epsilon1,
                           std::span<double> g) {
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] = b[j] > 0.0 ? epsilon1 * std::log(b[j]) + c[j] : kNegInf;
  }
}

std::vector<double> log_of(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
  return out;
}

// Clamps into [floor, 1 - floor] and renormalizes until stable. Returns true
// if any entry was clamped.
bool clamp_marginal(std::vector<double>& b, double floor) {
  bool clamped = false;
  for (int pass = 0; pass < 8; ++pass) {
    bool touched = false;
    for (double& v : b) {
      if (!(v >= floor)) {
        v = floor;
        touched = true;
      } else if (v > 1.0 - floor) {
        v = 1.0 - floor;
        touched = true;
      }
    }
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    for (double& v : b) v /= total;
    clamped = clamped || touched;
    if (!touched) break;
  }
  return clamped;
}

// Joint update under the log barrier. With c fixed, each class satisfies
//   r_j(t) := 2*eps2*sinh(t) + eps1*log(sigmoid(t)) + c_j = h,   b_j = sigmoid(t),
// which is the stationarity condition eps2*(1/(1-b) - 1/b) + g_j = h after
// substituting g_j = eps1*log b_j + c_j. r_j is strictly increasing, and so is
// sum_j b_j in h. `h` and `logits` carry warm starts across outer iterations.
std::vector<double> joint_barrier_marginal(std::span<const double> c, double epsilon1,
                                           double epsilon2, double& h,
                                           std::vector<double>& logits) {
  const std::size_t num_classes = c.size();
  auto r = [&](std::size_t j, double t) {
    return 2.0 * epsilon2 * std::sinh(t) + epsilon1 * log_sigmoid(t) + c[j];
  };
  auto r_slope = [&](double t) { return 2.0 * epsilon2 * std::cosh(t) + epsilon1 * sigmoid(-t); };

  auto solve_logit = [&](std::size_t j, double target) {
    const double start = std::clamp(logits[j], -kLogitLimit, kLogitLimit);
    double lo = std::max(start - 1.0, -kLogitLimit);
    while (lo > -kLogitLimit && r(j, lo) > target) {
      lo = std::max(start - 2.0 * (start - lo) - 1.0, -kLogitLimit);
    }
    if (r(j, lo) > target) return lo;
    double hi = std::min(start + 1.0, kLogitLimit);
    while (hi < kLogitLimit && r(j, hi) < target) {
      hi = std::min(start + 2.0 * (hi - start) + 1.0, kLogitLimit);
    }
    if (r(j, hi) < target) return hi;
    return safeguarded_newton(
        [&](double t) { return std::pair{r(j, t) - target, r_slope(t)}; }, lo, hi, start, 100,
        1e-15 * std::max(1.0, std::abs(target)));
  };

  auto mass_residual = [&](double hh) {
    double total = -1.0;
    double slope = 0.0;
    for (std::size_t j = 0; j < num_classes; ++j) {
      logits[j] = solve_logit(j, hh);
      const double b = sigmoid(logits[j]);
      total += b;
      slope += b * sigmoid(-logits[j]) / r_slope(logits[j]);
    }
    return std::pair{total, slope};
  };

  // At h = r_j(logit(1/C)) class j holds exactly 1/C, so the min and max of
  // these values bracket the root.
  const double t_even = -std::log(static_cast<double>(num_classes - 1));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t j = 0; j < num_classes; ++j) {
    lo = std::min(lo, r(j, t_even));
    hi = std::max(hi, r(j, t_even));
  }
  if (hi - lo <= 0.0) {
    h = lo;
    mass_residual(h);
  } else {
    h = safeguarded_newton(mass_residual, lo, hi, h, 200, 1e-14);
    mass_residual(h);
  }
  std::vector<double> b(num_classes);
  for (std::size_t j = 0; j < num_classes; ++j) b[j] = sigmoid(logits[j]);
  const double total = std::accumulate(b.begin(), b.end(), 0.0);
  for (double& v : b) v /= total;
  return b;
}

// b_j ∝ exp((eps2*log b_prev_j - c_j) / (eps1 + eps2)).
std::vector<double> joint_kl_marginal(std::span<const double> c, std::span<const double> b_prev,
                                      double epsilon1, double epsilon2) {
  std::vector<double> log_w(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    log_w[j] = (epsilon2 * std::log(b_prev[j]) - c[j]) / (epsilon1 + epsilon2);
  }
  const double norm = log_sum_exp(log_w);
  for (double& v : log_w) v = std::exp(v - norm);
  return log_w;
}

// b_j ∝ b_prev_j * exp(-g_j / eps2).
std::vector<double> kl_marginal_from_g(std::span<const double> g, std::span<const double> b_prev,
                                       double epsilon2) {
  std::vector<double> log_w(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) log_w[j] = std::log(b_prev[j]) - g[j] / epsilon2;
  const double norm = log_sum_exp(log_w);
  for (double& v : log_w) v = std::exp(v - norm);
  return log_w;
}

void check_shapes(const CostMatrix& cost, const ProbVector& a, std::size_t b_size) {
  if (a.size() != cost.rows()) {
    throw std::invalid_argument("transport: sample marginal length " + std::to_string(a.size()) +
                                " != cost rows " + std::to_string(cost.rows()));
  }
  if (b_size != cost.cols()) {
    throw std::invalid_argument("transport: class marginal length " + std::to_string(b_size) +
                                " != cost cols " + std::to_string(cost.cols()));
  }
}

}  // namespace

CostMatrix CostMatrix::from_matrix(DenseMatrix m) {
  for (double v : m.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("CostMatrix: entries must be finite and nonnegative");
    }
  }
  return CostMatrix(std::move(m));
}

CostMatrix cost_from_predictions(const DenseMatrix& predictions) {
  DenseMatrix m(predictions.rows(), predictions.cols());
  for (std::size_t i = 0; i < predictions.rows(); ++i) {
    const auto p = predictions.row(i);
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!(p[j] >= 0.0 && p[j] <= 1.0 + 1e-12)) {
        throw std::invalid_argument("cost_from_predictions: entry outside [0, 1] in row " +
                                    std::to_string(i));
      }
      total += p[j];
      m(i, j) = std::max(0.0, -std::log(std::max(p[j], kProbabilityFloor)));
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("cost_from_predictions: row " + std::to_string(i) +
                                  " sums to " + std::to_string(total));
    }
  }
  return CostMatrix::from_matrix(std::move(m));
}

void SaotConfig::validate(std::size_t num_classes) const {
  if (!(epsilon1 > 0.0)) throw std::invalid_argument("SaotConfig: epsilon1 must be > 0");
  if (!(epsilon2 >= 0.0)) throw std::invalid_argument("SaotConfig: epsilon2 must be >= 0");
  if (outer_iters < 1) throw std::invalid_argument("SaotConfig: outer_iters must be >= 1");
  if (newton_iters < 1) throw std::invalid_argument("SaotConfig: newton_iters must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("SaotConfig: need at least two classes");
  if (!(marginal_floor > 0.0 && marginal_floor < 1.0 / static_cast<double>(num_classes))) {
    throw std::invalid_argument("SaotConfig: marginal_floor must lie in (0, 1/C)");
  }
  if (penalty == MarginalPenalty::kKlToPrevious && update == SaotUpdate::kAlternating &&
      !(epsilon2 > 0.0)) {
    throw std::invalid_argument("SaotConfig: alternating KL update needs epsilon2 > 0");
  }
  if (penalty == MarginalPenalty::kLogBarrier && update == SaotUpdate::kAlternating &&
      !(epsilon2 > 0.0)) {
    throw std::invalid_argument("SaotConfig: alternating barrier update needs epsilon2 > 0");
  }
}

SaotSolution solve_fixed_marginal_ot(const CostMatrix& cost, const ProbVector& a,
                                     const ProbVector& b, double epsilon1, std::size_t iters) {
  check_shapes(cost, a, b.size());
  if (!(epsilon1 > 0.0)) throw std::invalid_argument("solve_fixed_marginal_ot: epsilon1 <= 0");
  const std::size_t n = cost.rows();
  const std::size_t c = cost.cols();
  const auto log_a = log_of(a.values());
  std::vector<double> f(n, 0.0);
  std::vector<double> g(c, 0.0);
  std::vector<double> col(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    if (b[j] == 0.0) g[j] = kNegInf;
  }

  SaotSolution sol;
  PlanStats stats;
  std::size_t it = 0;
  while (it < iters) {
    update_row_potentials(cost, log_a, g, epsilon1, f);
    require_finite_values(f, "solve_fixed_marginal_ot", it);
    column_log_normalizers(cost, f, epsilon1, col);
    set_column_potentials(col, b.values(), epsilon1, g);
    ++it;
    stats = plan_stats(cost, a.values(), b.values(), f, g, epsilon1);
    if (!std::isfinite(stats.objective)) {
      throw NumericError("solve_fixed_marginal_ot: non-finite plan at iteration " +
                         std::to_string(it));
    }
    if (stats.row_residual <= 1e-6 && stats.column_residual <= 1e-6) {
      sol.diagnostics.converged = true;
      break;
    }
  }
  if (n > 0 && it == 0) stats = plan_stats(cost, a.values(), b.values(), f, g, epsilon1);

  sol.plan = materialize_plan(cost, f, g, epsilon1);
  sol.marginal = b;
  sol.f = std::move(f);
  sol.g = std::move(g);
  sol.outer_iters_used = it;
  sol.objective = stats.objective;
  sol.diagnostics.row_residual = stats.row_residual;
  sol.diagnostics.column_residual = stats.column_residual;
  sol.diagnostics.objective_trace.push_back(stats.objective);
  return sol;
}

SaotSolution solve_saot(const CostMatrix& cost, const ProbVector& a, const SaotConfig& cfg,
                        const ProbVector& init_b) {
  check_shapes(cost, a, init_b.size());
  cfg.validate(cost.cols());
  const std::size_t n = cost.rows();
  const std::size_t num_classes = cost.cols();
  const double eps1 = cfg.epsilon1;
  const double eps2 = cfg.epsilon2;
  const auto log_a = log_of(a.values());

  std::vector<double> b(init_b.values().begin(), init_b.values().end());
  clamp_marginal(b, cfg.marginal_floor);
  std::vector<double> b_prev = b;
  std::vector<double> f(n, 0.0);
  std::vector<double> g(num_classes, 0.0);
  std::vector<double> col(num_classes, 0.0);
  std::vector<double> logits(num_classes);
  for (std::size_t j = 0; j < num_classes; ++j) logits[j] = std::log(b[j] / (1.0 - b[j]));
  double h = 1.0;

  SaotSolution sol;
  auto& diag = sol.diagnostics;
  std::size_t it = 0;
  while (it < cfg.outer_iters) {
    update_row_potentials(cost, log_a, g, eps1, f);
    require_finite_values(f, "solve_saot", it);
    column_log_normalizers(cost, f, eps1, col);
    require_finite_values(col, "solve_saot", it);

    std::vector<double> next;
    if (cfg.update == SaotUpdate::kJoint) {
      next = cfg.penalty == MarginalPenalty::kLogBarrier
                 ? joint_barrier_marginal(col, eps1, eps2, h, logits)
                 : joint_kl_marginal(col, b, eps1, eps2);
    } else {
      set_column_potentials(col, b, eps1, g);
      if (cfg.penalty == MarginalPenalty::kLogBarrier) {
        h = newton_root_h(g, eps2, h, cfg.newton_iters);
        next = marginal_from_h(g, h, eps2);
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        for (double& v : next) v /= total;
      } else {
        next = kl_marginal_from_g(g, b, eps2);
      }
    }
    if (clamp_marginal(next, cfg.marginal_floor)) ++diag.clamp_events;
    require_finite_values(next, "solve_saot", it);

    double change = 0.0;
    for (std::size_t j = 0; j < num_classes; ++j) change = std::max(change, std::abs(next[j] - b[j]));
    b_prev = b;
    b = std::move(next);
    if (cfg.update == SaotUpdate::kJoint) set_column_potentials(col, b, eps1, g);
    ++it;

    const auto stats = plan_stats(cost, a.values(), b, f, g, eps1);
    double penalty = 0.0;
    if (eps2 > 0.0) {
      if (cfg.penalty == MarginalPenalty::kLogBarrier) {
        penalty = log_barrier_penalty(b);
      } else {
        for (std::size_t j = 0; j < num_classes; ++j) penalty += b[j] * std::log(b[j] / b_prev[j]);
      }
    }
    diag.objective_trace.push_back(stats.objective + eps2 * penalty);
    diag.marginal_trace.push_back(b);
    if (!std::isfinite(diag.objective_trace.back())) {
      throw NumericError("solve_saot: non-finite objective at iteration " + std::to_string(it));
    }
    if (change < cfg.marginal_change_tol && stats.row_residual < cfg.stall_tol) {
      diag.converged = true;
      break;
    }
  }

  // Fixed-b sweeps so the returned plan honours both marginals tightly.
  const ProbVector final_b = ProbVector::normalized(b);
  for (std::size_t k = 0; k < cfg.polish_iters; ++k) {
    const auto stats = plan_stats(cost, a.values(), final_b.values(), f, g, eps1);
    if (stats.row_residual <= 1e-10 && stats.column_residual <= 1e-10) break;
    update_row_potentials(cost, log_a, g, eps1, f);
    column_log_normalizers(cost, f, eps1, col);
    set_column_potentials(col, final_b.values(), eps1, g);
  }
  require_finite_values(f, "solve_saot", it);
  require_finite_values(g, "solve_saot", it);

  const auto stats = plan_stats(cost, a.values(), final_b.values(), f, g, eps1);
  sol.plan = materialize_plan(cost, f, g, eps1);
  sol.marginal = final_b;
  sol.objective = saot_objective(sol.plan, cost, final_b.values(), cfg, b_prev);
  sol.f = std::move(f);
  sol.g = std::move(g);
  sol.h = h;
  sol.outer_iters_used = it;
  diag.row_residual = stats.row_residual;
  diag.column_residual = stats.column_residual;
  return sol;
}

double marginal_entry(double gap, double epsilon2) noexcept {
  if (std::abs(gap) < 1e-12) return 0.5;
  const double root = std::hypot(gap, 2.0 * epsilon2);
  // Same root as ((gap + 2 eps2) - sqrt(gap^2 + 4 eps2^2)) / (2 gap), rewritten
  // per sign of gap so that no two nearly equal terms are subtracted.
  if (gap > 0.0) return 2.0 * epsilon2 / (gap + 2.0 * epsilon2 + root);
  return (root - gap) / (root - gap + 2.0 * epsilon2);
}

double marginal_entry_derivative(double gap, double epsilon2) noexcept {
  const double b = marginal_entry(gap, epsilon2);
  return -b * (1.0 - b) / std::hypot(gap, 2.0 * epsilon2);
}

std::vector<double> marginal_from_h(std::span<const double> g, double h, double epsilon2) {
  std::vector<double> b(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) b[j] = marginal_entry(g[j] - h, epsilon2);
  return b;
}

double marginal_residual(std::span<const double> g, double h, double epsilon2) {
  double total = -1.0;
  for (double gj : g) total += marginal_entry(gj - h, epsilon2);
  return total;
}

double marginal_residual_derivative(std::span<const double> g, double h, double epsilon2) {
  double slope = 0.0;
  for (double gj : g) slope -= marginal_entry_derivative(gj - h, epsilon2);
  return slope;
}

double newton_root_h(std::span<const double> g, double epsilon2, double h0, std::size_t iters) {
  if (!(epsilon2 > 0.0)) throw std::invalid_argument("newton_root_h: epsilon2 must be > 0");
  if (g.size() < 2) throw std::invalid_argument("newton_root_h: need at least two classes");
  for (double v : g) {
    if (!std::isfinite(v)) throw NumericError("newton_root_h: non-finite g");
  }
  const double num_classes = static_cast<double>(g.size());
  const auto [min_it, max_it] = std::minmax_element(g.begin(), g.end());
  const double g_min = *min_it;
  const double g_max = *max_it;

  // h(t) = g_min + 2 eps2 sinh(t) makes sigmoid(t) the marginal of the
  // argmin class, which holds at least 1/C of the mass at the root.
  auto h_of = [&](double t) { return g_min + 2.0 * epsilon2 * std::sinh(t); };
  auto t_of = [&](double h) { return std::asinh((h - g_min) / (2.0 * epsilon2)); };
  double t_lo = std::max(t_of(g_min - 10.0 * epsilon2 * num_classes), -std::log(num_classes - 1.0));
  double t_hi = t_of(g_max + 10.0 * epsilon2 * num_classes);

  // Root bracket: the argmin class holds at least 1/C, and the class with the
  // k-th smallest g at most 1/k, since the k largest entries sum to <= 1. The
  // gap at which one entry equals p is eps2 (1/p - 1/(1-p)).
  std::vector<double> sorted(g.begin(), g.end());
  std::sort(sorted.begin(), sorted.end());
  auto gap_at = [&](double k) { return epsilon2 * k * (k - 2.0) / (k - 1.0); };
  const double lower = g_min - gap_at(num_classes);
  double upper = g_max - gap_at(num_classes);
  for (std::size_t k = 2; k < sorted.size(); ++k) {
    upper = std::min(upper, sorted[k - 1] - gap_at(static_cast<double>(k)));
  }
  t_hi = std::min(t_hi, t_of(upper + 1e-12 * (1.0 + std::abs(upper))));
  double start = h0;
  if (!(h0 >= lower && h0 <= upper)) {
    start = std::accumulate(g.begin(), g.end(), 0.0) / num_classes;
    start = std::clamp(start, lower, upper);
  }
  double t = std::clamp(t_of(start), t_lo, t_hi);
  // When one class dominates, the others barely move as h nears g_min, so
  // their mass at g_min predicts where the argmin entry lands.
  double rest = 0.0;
  for (double v : g) rest += v == g_min ? 0.0 : marginal_entry(v - g_min, epsilon2);
  if (rest > 0.0 && rest < 1.0) {
    const double guess = std::clamp(std::log((1.0 - rest) / rest), t_lo, t_hi);
    if (std::abs(marginal_residual(g, h_of(guess), epsilon2)) <
        std::abs(marginal_residual(g, h_of(t), epsilon2))) {
      t = guess;
    }
  }

  for (std::size_t k = 0; k < iters; ++k) {
    const double h = h_of(t);
    const double value = marginal_residual(g, h, epsilon2);
    // Rounding floor of a C-term sum near 1; stepping further only lets the
    // bracket fallback wander off a converged root.
    if (std::abs(value) <= 4.0 * num_classes * std::numeric_limits<double>::epsilon()) break;
    if (value < 0.0) {
      t_lo = t;
    } else {
      t_hi = t;
    }
    const double slope_h = marginal_residual_derivative(g, h, epsilon2);
    double next = 0.5 * (t_lo + t_hi);
    if (std::abs(slope_h) >= 1e-14) {
      const double newton = t - value / (slope_h * 2.0 * epsilon2 * std::cosh(t));
      if (newton > t_lo && newton < t_hi) next = newton;
    }
    t = next;
  }
  return h_of(t);
}

ProbVector estimate_marginal_moving_average(const DenseMatrix& predictions,
                                            const MarginalEstimatorState& state) {
  if (predictions.cols() != state.previous_b.size()) {
    throw std::invalid_argument("estimate_marginal_moving_average: class count mismatch");
  }
  if (!(state.mu >= 0.0 && state.mu <= 1.0)) {
    throw std::invalid_argument("estimate_marginal_moving_average: mu outside [0, 1]");
  }
  const std::size_t c = predictions.cols();
  std::vector<double> gamma(c, 0.0);
  const auto winners = argmax_rows(predictions);
  for (std::size_t w : winners) gamma[w] += 1.0;
  const double n = static_cast<double>(predictions.rows());
  std::vector<double> b(c);
  for (std::size_t j = 0; j < c; ++j) {
    const double share = n > 0.0 ? gamma[j] / n : state.previous_b[j];
    b[j] = state.mu * state.previous_b[j] + (1.0 - state.mu) * share;
  }
  return ProbVector::normalized(std::move(b));
}

double log_barrier_penalty(std::span<const double> b) {
  double total = 0.0;
  for (double v : b) total += -std::log(v) - std::log1p(-v);
  return total;
}

double saot_objective(const DenseMatrix& plan, const CostMatrix& cost, std::span<const double> b,
                      const SaotConfig& cfg, std::span<const double> reference_b) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw std::invalid_argument("saot_objective: plan and cost shapes differ");
  }
  double transport = 0.0;
  double entropy = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double p = plan(i, j);
      transport += p * cost(i, j);
      if (p > 0.0) entropy += p * (std::log(p) - 1.0);
    }
  }
  double total = transport;
  if (cfg.epsilon1 != 0.0) total += cfg.epsilon1 * entropy;
  if (cfg.epsilon2 != 0.0) {
    double penalty = 0.0;
    if (cfg.penalty == MarginalPenalty::kLogBarrier) {
      penalty = log_barrier_penalty(b);
    } else {
      if (reference_b.size() != b.size()) {
        throw std::invalid_argument("saot_objective: KL penalty needs a reference marginal");
      }
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (b[j] > 0.0) penalty += b[j] * std::log(b[j] / reference_b[j]);
      }
    }
    total += cfg.epsilon2 * penalty;
  }
  return total;
}

}  // namespace rstc
