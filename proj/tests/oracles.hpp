#pragma once

// Independent reference implementations used as test oracles. They favour
// plain loops and long double over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "rstc/dense_matrix.hpp"

namespace rstc::oracle {

using Real = long double;

inline Real lse(const std::vector<Real>& v) {
  Real m = -INFINITY;
  for (Real x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  Real s = 0;
  for (Real x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct OtResult {
  std::vector<std::vector<Real>> plan;
  Real objective = 0;  // <plan, M> + eps1 * sum plan (log plan - 1)
};

// Entropic OT with both marginals fixed; plain log-domain alternating scaling
// run for a fixed, generous number of sweeps.
inline OtResult fixed_ot(const DenseMatrix& cost, const std::vector<Real>& a,
                         const std::vector<Real>& b, Real eps, int sweeps) {
  const std::size_t n = cost.rows();
  const std::size_t c = cost.cols();
  std::vector<Real> f(n, 0), g(c, 0);
  std::vector<Real> tmp;
  for (int it = 0; it < sweeps; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      tmp.assign(c, 0);
      for (std::size_t j = 0; j < c; ++j) tmp[j] = (g[j] - cost(i, j)) / eps;
      f[i] = eps * (std::log(a[i]) - lse(tmp));
    }
    for (std::size_t j = 0; j < c; ++j) {
      tmp.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = (f[i] - cost(i, j)) / eps;
      g[j] = eps * (std::log(b[j]) - lse(tmp));
    }
  }
  OtResult r;
  r.plan.assign(n, std::vector<Real>(c, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const Real p = std::exp((f[i] + g[j] - cost(i, j)) / eps);
      r.plan[i][j] = p;
      r.objective += p * cost(i, j);
      if (p > 0) r.objective += eps * p * (std::log(p) - 1);
    }
  }
  return r;
}

inline Real barrier(const std::vector<Real>& b) {
  Real s = 0;
  for (Real v : b) s += -std::log(v) - std::log(1 - v);
  return s;
}

// Best objective over b = (t, 1 - t), t on a grid of the given resolution.
inline Real grid_saot_objective(const DenseMatrix& cost, const std::vector<Real>& a, Real eps1,
                                Real eps2, Real resolution, int sweeps) {
  Real best = INFINITY;
  const int steps = static_cast<int>(std::lround(1 / resolution));
  for (int k = 1; k < steps; ++k) {
    const Real t = k * resolution;
    const std::vector<Real> b = {t, 1 - t};
    const Real value = fixed_ot(cost, a, b, eps1, sweeps).objective + eps2 * barrier(b);
    best = std::min(best, value);
  }
  return best;
}

// Root of sum_j b_j(h) - 1 by plain bisection, b_j from the quadratic formula.
inline Real marginal_entry(Real gap, Real eps2) {
  if (gap == 0) return 0.5L;
  return ((gap + 2 * eps2) - std::sqrt(gap * gap + 4 * eps2 * eps2)) / (2 * gap);
}

inline Real marginal_sum(const std::vector<double>& g, Real h, Real eps2) {
  Real s = 0;
  for (double gj : g) s += marginal_entry(static_cast<Real>(gj) - h, eps2);
  return s;
}

inline Real bisect_h(const std::vector<double>& g, Real eps2) {
  Real lo = *std::min_element(g.begin(), g.end()) - 1e3L * eps2 * g.size() - 1;
  Real hi = *std::max_element(g.begin(), g.end()) + 1e3L * eps2 * g.size() + 1;
  for (int it = 0; it < 400; ++it) {
    const Real mid = (lo + hi) / 2;
    // Each b_j(h) increases with h.
    if (marginal_sum(g, mid, eps2) < 1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// Minimum of sum_i cost(i, perm(i)) over all permutations of a square matrix.
inline double brute_force_assignment(const DenseMatrix& cost) {
  std::vector<std::size_t> perm(cost.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double total = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += cost(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Best agreement over all mappings of predicted labels onto true labels.
inline double brute_force_accuracy(const std::vector<std::size_t>& truth,
                                   const std::vector<std::size_t>& pred, std::size_t classes) {
  std::vector<std::size_t> perm(classes);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += perm[pred[i]] == truth[i];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

// MI / sqrt(H(y) H(yhat)) straight from joint counts.
inline double direct_nmi(const std::vector<std::size_t>& y, const std::vector<std::size_t>& yhat) {
  const Real n = static_cast<Real>(y.size());
  const std::size_t cy = *std::max_element(y.begin(), y.end()) + 1;
  const std::size_t cp = *std::max_element(yhat.begin(), yhat.end()) + 1;
  std::vector<std::vector<Real>> joint(cy, std::vector<Real>(cp, 0));
  for (std::size_t i = 0; i < y.size(); ++i) joint[y[i]][yhat[i]] += 1;
  std::vector<Real> py(cy, 0), pp(cp, 0);
  for (std::size_t r = 0; r < cy; ++r) {
    for (std::size_t c = 0; c < cp; ++c) {
      py[r] += joint[r][c] / n;
      pp[c] += joint[r][c] / n;
    }
  }
  Real mi = 0, hy = 0, hp = 0;
  for (std::size_t r = 0; r < cy; ++r) {
    for (std::size_t c = 0; c < cp; ++c) {
      const Real pj = joint[r][c] / n;
      if (pj > 0) mi += pj * std::log(pj / (py[r] * pp[c]));
    }
  }
  for (Real p : py) if (p > 0) hy -= p * std::log(p);
  for (Real p : pp) if (p > 0) hp -= p * std::log(p);
  if (hy == 0 || hp == 0) return (hy == 0 && hp == 0) ? 1.0 : 0.0;
  return static_cast<double>(mi / std::sqrt(hy * hp));
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Real s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<Real>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(s);
    }
  }
  return out;
}

// Central differences of a scalar function with respect to every entry of x.
inline DenseMatrix finite_difference(DenseMatrix& x, const std::function<double()>& loss,
                                     double step = 1e-5) {
  DenseMatrix grad(x.rows(), x.cols());
  auto data = x.data();
  auto out = grad.data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double saved = data[k];
    data[k] = saved + step;
    const double up = loss();
    data[k] = saved - step;
    const double down = loss();
    data[k] = saved;
    out[k] = (up - down) / (2 * step);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||, floor), Frobenius.
inline double relative_error(const DenseMatrix& a, const DenseMatrix& b, double floor = 1e-8) {
  Real diff = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += std::pow(static_cast<Real>(a.data()[k]) - b.data()[k], 2);
    na += std::pow(static_cast<Real>(a.data()[k]), 2);
    nb += std::pow(static_cast<Real>(b.data()[k]), 2);
  }
  const Real scale = std::max({std::sqrt(na), std::sqrt(nb), static_cast<Real>(floor)});
  return static_cast<double>(std::sqrt(diff) / scale);
}

}  // namespace rstc::oracle
