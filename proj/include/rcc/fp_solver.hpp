#pragma once

// Quadratic-transform fractional programming for the penalty-relaxed
// sum-rate problem. The outer loop alternates a closed-form update of the
// auxiliary variables y with a concave maximization over the power
// polytope; the latter is solved by projected gradient ascent with an
// exact Euclidean projection onto the polytope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rcc/errors.hpp"
#include "rcc/matrix.hpp"
#include "rcc/model.hpp"
#include "rcc/scenario.hpp"
#include "rcc/units.hpp"

namespace rcc {

/// N×K quadratic-transform auxiliaries.
struct AuxiliaryMatrix {
  Matrix y;
};

struct ArmijoSettings {
  double shrink = 0.5;
  double sufficient_increase = 1e-4;
  int max_backtracks = 60;
};

struct DykstraSettings {
  int max_sweeps = 20000;
  double tolerance = 1e-13;
};

struct SolverSettings {
  double outer_tol = 1e-6;
  int max_outer_iters = 200;
  double inner_tol = 1e-7;
  int max_inner_iters = 500;
  ArmijoSettings armijo;
  DykstraSettings dykstra;
  double sqrt_floor = 1e-12;
  /// Re-optimize powers on the extracted assignment with other users frozen.
  bool refine = true;
  /// Relative violation accepted when labelling a result feasible.
  double feasibility_tol = 1e-8;
  /// Besides the greedy start, run the lean starts (three comm levels, two
  /// owner rules) and `random_starts` rounds of randomized starts; keep the
  /// best.
  bool lean_starts = true;
  int random_starts = 8;
  std::uint64_t start_seed = 0x5eed;

  /// Greedy start only (plus any warm start), as for long sweeps.
  static SolverSettings single_start() {
    SolverSettings s;
    s.lean_starts = false;
    s.random_starts = 0;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Quadratic transform

/// Optimal y for fixed P: sqrt(alpha w) / (interference + noise).
inline AuxiliaryMatrix update_y(const PowerMatrix& p, const CoefficientBundle& c, double eta) {
  detail::check_shape(p, c);
  AuxiliaryMatrix aux{Matrix(c.n(), c.k())};
  for (std::size_t n = 0; n < c.n(); ++n) {
    for (std::size_t k = 0; k < c.k(); ++k) {
      aux.y(n, k) = std::sqrt(c.alpha(n, k) * p.comm(k, n)) / relaxed_denominator(p, c, eta, n, k);
    }
  }
  return aux;
}

namespace detail {

inline void check_aux(const AuxiliaryMatrix& y, const CoefficientBundle& c) {
  if (y.y.rows() != c.n() || y.y.cols() != c.k())
    throw DimensionError("auxiliary matrix must be N x K");
}

/// Argument of the (n,k) logarithm in Q.
inline double q_argument(const PowerMatrix& p, const AuxiliaryMatrix& aux,
                         const CoefficientBundle& c, double eta, std::size_t n, std::size_t k) {
  const double y = aux.y(n, k);
  return 1.0 + 2.0 * y * std::sqrt(c.alpha(n, k) * p.comm(k, n)) -
         y * y * relaxed_denominator(p, c, eta, n, k);
}

/// Q(P, Y), or NaN if any log argument is non-positive.
inline double q_value_or_nan(const PowerMatrix& p, const AuxiliaryMatrix& aux,
                             const CoefficientBundle& c, double eta) {
  double q = 0.0;
  for (std::size_t n = 0; n < c.n(); ++n) {
    for (std::size_t k = 0; k < c.k(); ++k) {
      const double t = q_argument(p, aux, c, eta, n, k);
      if (!(t > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      q += std::log2(t);
    }
  }
  return q;
}

}  // namespace detail

/// Σ_{n,k} log2(1 + 2y sqrt(alpha w) − y² (beta P^r + eta·penalty + 1)).
inline double q_value(const PowerMatrix& p, const AuxiliaryMatrix& aux, const CoefficientBundle& c,
                      double eta) {
  detail::check_shape(p, c);
  detail::check_aux(aux, c);
  double q = 0.0;
  for (std::size_t n = 0; n < c.n(); ++n) {
    for (std::size_t k = 0; k < c.k(); ++k) {
      const double t = detail::q_argument(p, aux, c, eta, n, k);
      if (!(t > 0.0)) {
        std::ostringstream msg;
        msg << "Q log argument " << t << " is not positive at subcarrier " << n << ", user " << k;
        throw DomainError(msg.str());
      }
      q += std::log2(t);
    }
  }
  return q;
}

/// Exact partial derivatives of q_value with respect to every entry of P.
/// d sqrt(w)/dw is evaluated at max(w, sqrt_floor).
inline Matrix q_gradient(const PowerMatrix& p, const AuxiliaryMatrix& aux,
                         const CoefficientBundle& c, double eta, double sqrt_floor = 1e-12) {
  detail::check_shape(p, c);
  detail::check_aux(aux, c);
  const std::size_t K = c.k();
  Matrix g(K + 1, c.n(), 0.0);
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  for (std::size_t n = 0; n < c.n(); ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double y = aux.y(n, k);
      if (y == 0.0) continue;
      const double t = detail::q_argument(p, aux, c, eta, n, k);
      if (!(t > 0.0)) {
        std::ostringstream msg;
        msg << "Q log argument " << t << " is not positive at subcarrier " << n << ", user " << k;
        throw DomainError(msg.str());
      }
      const double scale = inv_ln2 / t;
      const double w = std::max(p.comm(k, n), sqrt_floor);
      g(k, n) += scale * y * std::sqrt(c.alpha(n, k) / w);
      for (std::size_t i = 0; i < K; ++i) {
        if (i != k) g(i, n) -= scale * y * y * eta * c.penalty_gain(n, k, i);
      }
      g(K, n) -= scale * y * y * c.beta(n, k);
    }
  }
  return g;
}

/// Minus the diagonal of the Hessian of q_value (>= 0, Q is concave), with
/// the same sqrt_floor convention as q_gradient.
inline Matrix q_curvature(const PowerMatrix& p, const AuxiliaryMatrix& aux,
                          const CoefficientBundle& c, double eta, double sqrt_floor = 1e-12) {
  detail::check_shape(p, c);
  detail::check_aux(aux, c);
  const std::size_t K = c.k();
  Matrix h(K + 1, c.n(), 0.0);
  const double inv_ln2 = 1.0 / std::numbers::ln2;
  for (std::size_t n = 0; n < c.n(); ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      const double y = aux.y(n, k);
      if (y == 0.0) continue;
      const double t = detail::q_argument(p, aux, c, eta, n, k);
      if (!(t > 0.0)) throw DomainError("Q log argument is not positive");
      const double w = std::max(p.comm(k, n), sqrt_floor);
      const double d1 = y * std::sqrt(c.alpha(n, k) / w) / t;
      const double d2 = 0.5 * y * std::sqrt(c.alpha(n, k) / w) / (w * t);
      h(k, n) += inv_ln2 * (d2 + d1 * d1);
      for (std::size_t i = 0; i < K; ++i) {
        if (i == k) continue;
        const double e = y * y * eta * c.penalty_gain(n, k, i) / t;
        h(i, n) += inv_ln2 * e * e;
      }
      const double r = y * y * c.beta(n, k) / t;
      h(K, n) += inv_ln2 * r * r;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Feasible set

/// The power polytope: per-entry box, the two budget halfspaces and the
/// radar SINR constraint, which is linear in P:
///   Σ ξ P^r − μ Σ_k Σ_n γ_n w_{n,k} ≥ μ N.
struct Constraints {
  PowerLimits limits;
  Matrix upper;  ///< (K+1)×N per-entry upper bounds; 0 freezes an entry
  std::vector<double> xi;
  std::vector<double> gamma;
  bool enforce_sinr = true;

  std::size_t n_users() const { return upper.rows() - 1; }
  std::size_t n_subcarriers() const { return upper.cols(); }

  /// Coefficient of entry (r, n) in the SINR halfspace normal.
  double sinr_normal(std::size_t r, std::size_t n) const {
    return r == n_users() ? xi[n] : -limits.sinr_floor * gamma[n];
  }
  double sinr_offset() const { return limits.sinr_floor * static_cast<double>(xi.size()); }
};

inline Constraints make_constraints(const CoefficientBundle& c, const PowerLimits& limits,
                                    bool enforce_sinr = true) {
  Constraints con{limits, Matrix(c.k() + 1, c.n(), limits.p_c_cap), c.xi, c.gamma, enforce_sinr};
  for (double& v : con.upper.row(c.k())) v = limits.p_r_cap;
  return con;
}

/// Largest relative violation over every constraint (0 when feasible).
inline double max_violation(const PowerMatrix& p, const Constraints& con) {
  const std::size_t K = con.n_users();
  double worst = 0.0;
  auto rel = [](double excess, double scale) { return excess / std::max(scale, 1e-300); };
  for (std::size_t r = 0; r <= K; ++r) {
    const double cap = r == K ? con.limits.p_r_cap : con.limits.p_c_cap;
    for (std::size_t n = 0; n < con.n_subcarriers(); ++n) {
      const double v = p.matrix()(r, n);
      worst = std::max(worst, rel(-v, cap));
      worst = std::max(worst, rel(v - con.upper(r, n), cap));
    }
  }
  worst = std::max(worst, rel(p.total_comm() - con.limits.p_c_max, con.limits.p_c_max));
  worst = std::max(worst, rel(p.total_radar() - con.limits.p_r_max, con.limits.p_r_max));
  if (con.enforce_sinr && con.limits.sinr_floor > 0.0) {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < con.n_subcarriers(); ++n) {
      num += con.xi[n] * p.radar(n);
      den += con.gamma[n] * p.column_comm(n) + 1.0;
    }
    const double need = con.limits.sinr_floor * den;
    worst = std::max(worst, rel(need - num, need));
  }
  return worst;
}

namespace detail {

/// Projects z onto {0 <= x <= ub, Σ x <= budget} in place, in the metric
/// Σ (x_i − z_i)² / m_i (m empty: all ones). Then x = clip(z − τm) with the
/// smallest τ >= 0 meeting the budget, located exactly by scanning the
/// sorted breakpoints of the piecewise-linear sum.
inline void project_capped_budget(std::span<double> z, std::span<const double> ub, double budget,
                                  std::vector<double>& scratch, std::span<const double> m = {}) {
  auto mi = [&](std::size_t i) { return m.empty() ? 1.0 : m[i]; };
  double clipped_sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) clipped_sum += std::clamp(z[i], 0.0, ub[i]);
  if (clipped_sum <= budget) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], 0.0, ub[i]);
    return;
  }
  // h(τ) = Σ clip(z_i − τ m_i, 0, ub_i) is non-increasing and linear between
  // the breakpoints (z_i − ub_i)/m_i and z_i/m_i.
  scratch.assign(1, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (ub[i] <= 0.0 || z[i] <= 0.0) continue;
    scratch.push_back(std::max((z[i] - ub[i]) / mi(i), 0.0));
    scratch.push_back(z[i] / mi(i));
  }
  std::sort(scratch.begin(), scratch.end());
  auto h = [&](double tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += std::clamp(z[i] - tau * mi(i), 0.0, ub[i]);
    return s;
  };
  // h(0) > budget and h(last) = 0, so the root lies inside the list.
  std::size_t lo = 0, hi = scratch.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (h(scratch[mid]) > budget ? lo : hi) = mid;
  }
  const double a = scratch[lo], b = scratch[hi];
  const double ha = h(a), hb = h(b);
  const double tau = ha > hb ? std::clamp(a + (ha - budget) * (b - a) / (ha - hb), a, b) : b;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i] - tau * mi(i), 0.0, ub[i]);
  // Rounding may leave the sum a few ulps over; pull the active entries in.
  double excess = 0.0;
  for (double v : z) excess += v;
  excess -= budget;
  for (int pass = 0; pass < 4 && excess > 0.0; ++pass) {
    std::size_t active = 0;
    for (double v : z) active += v > 0.0;
    const double cut = excess / static_cast<double>(std::max<std::size_t>(active, 1));
    for (double& v : z) v = std::max(0.0, v - cut);
    excess = -budget;
    for (double v : z) excess += v;
  }
}

/// Projection onto box ∩ comm budget ∩ radar budget (two independent blocks).
inline void project_budgets(Matrix& x, const Constraints& con, const Matrix* m,
                            std::vector<double>& scratch) {
  const std::size_t K = con.n_users();
  const std::size_t N = con.n_subcarriers();
  auto comm = x.flat().subspan(0, K * N);
  auto comm_ub = con.upper.flat().subspan(0, K * N);
  project_capped_budget(comm, comm_ub, con.limits.p_c_max, scratch,
                        m ? m->flat().subspan(0, K * N) : std::span<const double>{});
  project_capped_budget(x.row(K), con.upper.row(K), con.limits.p_r_max, scratch,
                        m ? m->row(K) : std::span<const double>{});
}

/// Projection in the metric Σ (x − raw)² / m (m null: Euclidean). The box
/// and budget part separates into closed-form blocks; the SINR halfspace
/// a·x >= b is handled through its multiplier λ: x(λ) = Π_budgets(raw + λ
/// m∘a), where a·x(λ) is non-decreasing and piecewise linear, so λ is found
/// by bracketing and Illinois-type regula falsi. `lambda_hint` (in/out)
/// seeds the bracket with the multiplier of a previous, nearby call.
inline PowerMatrix project_scaled(const Matrix& raw, const Constraints& con, const Matrix* m,
                                  double* lambda_hint = nullptr) {
  const std::size_t K = con.n_users();
  const std::size_t N = con.n_subcarriers();
  if (raw.rows() != K + 1 || raw.cols() != N || (m && !m->same_shape(raw)))
    throw DimensionError("matrix to project does not match the constraint set");

  std::vector<double> scratch;
  auto mi = [&](std::size_t r, std::size_t n) { return m ? (*m)(r, n) : 1.0; };
  auto at = [&](double lambda) {
    Matrix x = raw;
    if (lambda != 0.0)
      for (std::size_t r = 0; r <= K; ++r)
        for (std::size_t n = 0; n < N; ++n) x(r, n) += lambda * mi(r, n) * con.sinr_normal(r, n);
    project_budgets(x, con, m, scratch);
    return x;
  };
  auto slack = [&](const Matrix& x) {
    double s = 0.0;
    for (std::size_t r = 0; r <= K; ++r)
      for (std::size_t n = 0; n < N; ++n) s += con.sinr_normal(r, n) * x(r, n);
    return s - con.sinr_offset();
  };

  Matrix x0 = at(0.0);
  if (!con.enforce_sinr || con.limits.sinr_floor <= 0.0 || slack(x0) >= 0.0) {
    if (lambda_hint) *lambda_hint = 0.0;
    return PowerMatrix(std::move(x0));
  }
  const double s0 = slack(x0);

  double lo = 0.0, s_lo = s0;
  double hi;
  if (lambda_hint && *lambda_hint > 0.0) {
    hi = *lambda_hint;
  } else {
    double norm2 = 0.0;
    for (std::size_t r = 0; r <= K; ++r)
      for (std::size_t n = 0; n < N; ++n) norm2 += mi(r, n) * std::pow(con.sinr_normal(r, n), 2);
    hi = -s0 / norm2;
  }
  Matrix x_hi = at(hi);
  double s_hi = slack(x_hi);
  for (int i = 0; s_hi < 0.0; ++i) {
    if (i > 200) {
      throw Infeasible("projection: the SINR floor is unreachable within the power limits",
                       std::numeric_limits<double>::quiet_NaN());
    }
    lo = hi;
    s_lo = s_hi;
    hi *= 2.0;
    x_hi = at(hi);
    s_hi = slack(x_hi);
  }
  // Regula falsi keeping the feasible endpoint; the stale side's value is
  // halved so that both ends keep moving.
  const double done = 1e-14 * con.sinr_offset();
  double f_lo = s_lo, f_hi = s_hi;
  int side = 0;
  for (int i = 0; i < 200 && s_hi > done && hi - lo > 1e-15 * hi; ++i) {
    double mid = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    Matrix xm = at(mid);
    const double sm = slack(xm);
    if (sm >= 0.0) {
      hi = mid;
      x_hi = std::move(xm);
      s_hi = f_hi = sm;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    } else {
      lo = mid;
      f_lo = sm;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    }
  }
  if (lambda_hint) *lambda_hint = hi;
  return PowerMatrix(std::move(x_hi));
}

}  // namespace detail

/// Exact Euclidean projection onto the polytope. Throws Infeasible if no
/// point of the box and budgets reaches the SINR floor.
inline PowerMatrix project(const Matrix& raw, const Constraints& con) {
  return detail::project_scaled(raw, con, nullptr);
}

/// Euclidean projection by Dykstra's alternating scheme over the box, the
/// comm budget, the radar budget and the SINR halfspace. The halfspace
/// corrections are multiples of fixed normals, so their increments are kept
/// as scalars. Loses precision when `raw` lies far outside the box (the
/// increments then dwarf the iterate); `project` is the exact route.
inline PowerMatrix project_dykstra(const Matrix& raw, const Constraints& con,
                                   const DykstraSettings& settings = {}) {
  const std::size_t K = con.n_users();
  const std::size_t N = con.n_subcarriers();
  if (raw.rows() != K + 1 || raw.cols() != N)
    throw DimensionError("matrix to project does not match the constraint set");

  Matrix x = raw;
  Matrix box_inc(K + 1, N, 0.0);
  double comm_inc = 0.0, radar_inc = 0.0, sinr_inc = 0.0;

  const double n_comm = static_cast<double>(K * N);
  const double n_radar = static_cast<double>(N);
  double sinr_norm2 = 0.0;
  if (con.enforce_sinr) {
    for (std::size_t r = 0; r <= K; ++r)
      for (std::size_t n = 0; n < N; ++n) sinr_norm2 += con.sinr_normal(r, n) * con.sinr_normal(r, n);
  }
  const bool use_sinr = con.enforce_sinr && sinr_norm2 > 0.0;

  double scale = 0.0;
  for (double v : con.upper.flat()) scale = std::max(scale, v);
  const double tol = settings.tolerance * std::max(scale, 1e-300);

  auto comm_sum = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r < K; ++r)
      for (double v : x.row(r)) s += v;
    return s;
  };
  auto radar_sum = [&] {
    double s = 0.0;
    for (double v : x.row(K)) s += v;
    return s;
  };
  auto sinr_dot = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r <= K; ++r)
      for (std::size_t n = 0; n < N; ++n) s += con.sinr_normal(r, n) * x(r, n);
    return s;
  };

  Matrix prev;
  for (int sweep = 0; sweep < settings.max_sweeps; ++sweep) {
    prev = x;
    for (std::size_t r = 0; r <= K; ++r) {
      for (std::size_t n = 0; n < N; ++n) {
        const double z = x(r, n) + box_inc(r, n);
        const double clipped = std::clamp(z, 0.0, con.upper(r, n));
        box_inc(r, n) = z - clipped;
        x(r, n) = clipped;
      }
    }
    {
      const double next = std::max(0.0, comm_sum() + comm_inc * n_comm - con.limits.p_c_max) / n_comm;
      const double shift = comm_inc - next;
      if (shift != 0.0)
        for (std::size_t r = 0; r < K; ++r)
          for (double& v : x.row(r)) v += shift;
      comm_inc = next;
    }
    {
      const double next =
          std::max(0.0, radar_sum() + radar_inc * n_radar - con.limits.p_r_max) / n_radar;
      const double shift = radar_inc - next;
      if (shift != 0.0)
        for (double& v : x.row(K)) v += shift;
      radar_inc = next;
    }
    if (use_sinr) {
      const double next =
          std::max(0.0, con.sinr_offset() - (sinr_dot() - sinr_inc * sinr_norm2)) / sinr_norm2;
      const double shift = next - sinr_inc;
      if (shift != 0.0)
        for (std::size_t r = 0; r <= K; ++r)
          for (std::size_t n = 0; n < N; ++n) x(r, n) += shift * con.sinr_normal(r, n);
      sinr_inc = next;
    }
    if (max_abs_diff(x, prev) <= tol) {
      PowerMatrix out(x);
      if (max_violation(out, con) > 1e-8) break;
      return out;
    }
  }
  PowerMatrix out(std::move(x));
  std::ostringstream msg;
  msg << "Dykstra projection did not converge in " << settings.max_sweeps
      << " sweeps; last change " << max_abs_diff(out.matrix(), prev) << ", max violation "
      << max_violation(out, con);
  throw ProjectionError(msg.str());
}

// ---------------------------------------------------------------------------
// Fixed-y subproblem

/// Projected gradient ascent on Q(·, Y) from a feasible `start`, scaled by
/// the inverse Hessian diagonal (a diagonal Newton step, projected in the
/// matching metric) with Armijo backtracking along the projection arc.
/// Stops when the accepted step moves P by less than inner_tol (Frobenius,
/// watts) or after max_inner_iters. Never returns a point with lower Q
/// than `start`.
inline PowerMatrix solve_subproblem(const AuxiliaryMatrix& aux, const PowerMatrix& start,
                                    const CoefficientBundle& c, double eta,
                                    const Constraints& con, const SolverSettings& settings = {}) {
  detail::check_shape(start, c);
  detail::check_aux(aux, c);
  PowerMatrix p = start;
  double q = detail::q_value_or_nan(p, aux, c, eta);
  if (!std::isfinite(q)) throw DomainError("subproblem start lies outside the domain of Q");

  const auto& arm = settings.armijo;
  double lambda = 0.0;
  for (int it = 0; it < settings.max_inner_iters; ++it) {
    const Matrix g = q_gradient(p, aux, c, eta, settings.sqrt_floor);
    Matrix m = q_curvature(p, aux, c, eta, settings.sqrt_floor);
    double top = 0.0;
    for (double v : m.flat()) top = std::max(top, v);
    if (top == 0.0) return p;  // Q is flat in every coordinate
    for (double& v : m.flat()) v = 1.0 / std::max(v, 1e-14 * top);

    bool accepted = false;
    double moved = 0.0;
    double gain = 0.0;
    PowerMatrix trial;
    auto fg = g.flat();
    auto fm = m.flat();
    double step = 1.0;
    for (int bt = 0; bt < arm.max_backtracks; ++bt, step *= arm.shrink) {
      Matrix raw = p.matrix();
      auto fr = raw.flat();
      for (std::size_t i = 0; i < fr.size(); ++i) fr[i] += step * fm[i] * fg[i];
      Matrix metric = m;
      for (double& v : metric.flat()) v *= step;
      trial = detail::project_scaled(raw, con, &metric, &lambda);
      moved = frobenius_distance(trial.matrix(), p.matrix());
      if (moved == 0.0) return p;  // stationary: the projected step is null
      const double qt = detail::q_value_or_nan(trial, aux, c, eta);
      if (!std::isfinite(qt)) continue;
      double lin = 0.0;
      auto ft = trial.matrix().flat();
      auto fp = p.matrix().flat();
      for (std::size_t i = 0; i < ft.size(); ++i) lin += fg[i] * (ft[i] - fp[i]);
      if (qt >= q + arm.sufficient_increase * lin && qt > q) {
        accepted = true;
        gain = qt - q;
        q = qt;
        break;
      }
    }
    if (!accepted) break;
    p = std::move(trial);
    if (moved < settings.inner_tol || gain <= 1e-15 * std::max(1.0, std::abs(q))) break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Feasible starting points

struct RadarSinrBound {
  double sinr;               ///< linear
  std::vector<double> power; ///< radar power per subcarrier achieving it
};

/// With comm silent the SINR denominator is the constant N, so filling the
/// radar budget onto subcarriers in descending ξ order is exactly optimal.
inline RadarSinrBound max_radar_sinr(const CoefficientBundle& c, const PowerLimits& limits) {
  const std::size_t N = c.n();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c.xi[a] > c.xi[b]; });
  std::vector<double> power(N, 0.0);
  double left = limits.p_r_max;
  double num = 0.0;
  for (std::size_t n : order) {
    if (left <= 0.0) break;
    power[n] = std::min(limits.p_r_cap, left);
    left -= power[n];
    num += c.xi[n] * power[n];
  }
  return {num / static_cast<double>(N), std::move(power)};
}

/// Greedy radar allocation plus a uniform comm power per subcarrier, each
/// subcarrier given to its strongest user. The comm level is the largest
/// that keeps the SINR floor, cap and budget, scaled by 0.9.
inline PowerMatrix find_feasible(const CoefficientBundle& c, const PowerLimits& limits) {
  const auto bound = max_radar_sinr(c, limits);
  if (bound.sinr < limits.sinr_floor) {
    std::ostringstream msg;
    msg << "radar SINR floor " << linear_to_db(limits.sinr_floor) << " dB exceeds the best "
        << "attainable " << linear_to_db(bound.sinr) << " dB";
    throw Infeasible(msg.str(), bound.sinr);
  }
  const std::size_t N = c.n();
  const double n_sub = static_cast<double>(N);
  double t = std::min(limits.p_c_cap, limits.p_c_max / n_sub);
  const double gamma_sum = std::accumulate(c.gamma.begin(), c.gamma.end(), 0.0);
  if (limits.sinr_floor > 0.0 && gamma_sum > 0.0) {
    const double signal = bound.sinr * n_sub;  // Σ ξ P^r
    t = std::min(t, (signal / limits.sinr_floor - n_sub) / gamma_sum);
  }
  t = std::max(0.0, 0.9 * t);

  PowerMatrix p(c.k(), N);
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.k(); ++k)
      if (c.alpha(n, k) > c.alpha(n, best)) best = k;
    p.comm(best, n) = t;
    p.radar(n) = bound.power[n];
  }
  return p;
}

enum class OwnerRule {
  effective_snr,  ///< user with the largest alpha / (beta P^r + 1)
  equal_split,    ///< comm power split evenly over all users
};

/// Starting point that spends radar power only where it is cheap: with a
/// uniform comm level `comm_fraction` × (the find_feasible level) on every
/// subcarrier, radar fills subcarriers in descending order of echo gain per
/// bit of comm rate it would destroy, stopping as soon as the SINR floor
/// holds. `shuffle` randomizes that order instead. Returns nullopt when the
/// radar budget cannot reach the floor at that comm level.
inline std::optional<PowerMatrix> lean_start(const CoefficientBundle& c, const PowerLimits& limits,
                                             double comm_fraction, OwnerRule rule,
                                             std::mt19937_64* shuffle = nullptr) {
  const PowerMatrix greedy = find_feasible(c, limits);
  const std::size_t N = c.n();
  const std::size_t K = c.k();
  double level = 0.0;
  for (std::size_t n = 0; n < N; ++n) level = std::max(level, greedy.column_comm(n));
  level *= comm_fraction;

  std::vector<double> score(N);
  double interference = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    double clean = 0.0, jammed = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double snr = c.alpha(n, k) * level;
      clean = std::max(clean, std::log2(1.0 + snr));
      jammed = std::max(jammed, std::log2(1.0 + snr / (c.beta(n, k) * limits.p_r_cap + 1.0)));
    }
    score[n] = c.xi[n] * limits.p_r_cap / (clean - jammed + 1e-12);
    interference += c.gamma[n] * level + 1.0;
  }
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    std::shuffle(order.begin(), order.end(), *shuffle);
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  }

  PowerMatrix p(K, N);
  const double need = limits.sinr_floor * interference * (1.0 + 1e-9);
  double left = limits.p_r_max, echo = 0.0;
  for (std::size_t n : order) {
    if (echo >= need || left <= 0.0) break;
    if (c.xi[n] <= 0.0) continue;
    const double x = std::min({limits.p_r_cap, left, (need - echo) / c.xi[n]});
    p.radar(n) = x;
    left -= x;
    echo += c.xi[n] * x;
  }
  if (echo < need) return std::nullopt;

  for (std::size_t n = 0; n < N; ++n) {
    if (rule == OwnerRule::equal_split) {
      for (std::size_t k = 0; k < K; ++k) p.comm(k, n) = level / static_cast<double>(K);
      continue;
    }
    std::size_t best = 0;
    double best_snr = -1.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double snr = c.alpha(n, k) / (c.beta(n, k) * p.radar(n) + 1.0);
      if (snr > best_snr) {
        best_snr = snr;
        best = k;
      }
    }
    p.comm(best, n) = level;
  }
  return p;
}

/// Random feasible point: radar spends its whole budget in a random
/// subcarrier order, then comm power takes random shares of the SINR
/// headroom that is left, also in random order. Returns nullopt when the
/// chosen radar order cannot reach the floor.
inline std::optional<PowerMatrix> random_fill_start(const CoefficientBundle& c,
                                                    const PowerLimits& limits, OwnerRule rule,
                                                    std::mt19937_64& rng) {
  const std::size_t N = c.n();
  const std::size_t K = c.k();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  PowerMatrix p(K, N);
  double left = limits.p_r_max, echo = 0.0;
  for (std::size_t n : order) {
    p.radar(n) = std::min(limits.p_r_cap, left);
    left -= p.radar(n);
    echo += c.xi[n] * p.radar(n);
  }
  // Interference the floor still tolerates, kept strictly inside.
  double room = (echo / (limits.sinr_floor * (1.0 + 1e-9)) - static_cast<double>(N));
  if (limits.sinr_floor <= 0.0) room = std::numeric_limits<double>::infinity();
  if (!(room > 0.0)) return std::nullopt;

  std::shuffle(order.begin(), order.end(), rng);
  double comm_left = limits.p_c_max;
  for (std::size_t n : order) {
    double w = std::min(limits.p_c_cap, comm_left);
    if (c.gamma[n] > 0.0) w = std::min(w, room / c.gamma[n]);
    w *= u(rng);
    room -= c.gamma[n] * w;
    comm_left -= w;
    if (rule == OwnerRule::equal_split) {
      for (std::size_t k = 0; k < K; ++k) p.comm(k, n) = w / static_cast<double>(K);
      continue;
    }
    std::size_t best = 0;
    double best_snr = -1.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double snr = c.alpha(n, k) / (c.beta(n, k) * p.radar(n) + 1.0);
      if (snr > best_snr) {
        best_snr = snr;
        best = k;
      }
    }
    p.comm(best, n) = w;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Outer loop

struct TraceEntry {
  int iteration;
  double q_value;
  double sum_rate;  ///< bpcu
  double sinr_db;
};

struct SolveResult {
  PowerMatrix power;
  Assignment assignment;
  double relaxed_sum_rate = 0.0;  ///< relaxed objective before rounding
  double binary_sum_rate = 0.0;   ///< objective of the returned assignment
  double achieved_sinr_db = 0.0;
  bool feasible = false;
  int outer_iterations = 0;
  int refinement_iterations = 0;
  std::vector<TraceEntry> trace;
};

struct SolveOptions {
  /// Extra feasible starting point (e.g. the solution of a neighbouring,
  /// more constrained problem); it competes with the regular starts.
  std::optional<PowerMatrix> warm_start;
};

namespace detail {

struct AscentRun {
  PowerMatrix power;
  int iterations = 0;
  std::vector<TraceEntry> trace;
};

inline AscentRun fp_ascent(PowerMatrix p, const CoefficientBundle& c, double eta,
                           const Constraints& con, const SolverSettings& settings) {
  AscentRun run;
  double rate = sum_relaxed_rate(p, c, eta);
  run.trace.push_back({0, rate, rate, linear_to_db(radar_sinr(p, c))});
  for (int it = 1; it <= settings.max_outer_iters; ++it) {
    const AuxiliaryMatrix aux = update_y(p, c, eta);
    p = solve_subproblem(aux, p, c, eta, con, settings);
    const double next = sum_relaxed_rate(p, c, eta);
    run.trace.push_back({it, q_value(p, aux, c, eta), next, linear_to_db(radar_sinr(p, c))});
    run.iterations = it;
    const bool done = std::abs(next - rate) <= settings.outer_tol * std::max(std::abs(rate), 1e-12);
    rate = next;
    if (done) break;
  }
  run.power = std::move(p);
  return run;
}

/// Polishes powers on a fixed assignment: off-owner comm entries are frozen
/// at zero, so the relaxed objective equals the binary one throughout.
inline AscentRun refine_on_assignment(const Assignment& a, const CoefficientBundle& c, double eta,
                                      const Constraints& con, const SolverSettings& settings) {
  Constraints frozen = con;
  for (std::size_t n = 0; n < a.n(); ++n)
    for (std::size_t k = 0; k < c.k(); ++k)
      if (!a.owner[n] || *a.owner[n] != k) frozen.upper(k, n) = 0.0;
  return fp_ascent(to_power_matrix(a, c.k()), c, eta, frozen, settings);
}

/// Every starting point the settings ask for, greedy start first.
inline std::vector<PowerMatrix> starting_points(const CoefficientBundle& c,
                                                const PowerLimits& limits,
                                                const SolverSettings& settings) {
  std::vector<PowerMatrix> starts{find_feasible(c, limits)};
  if (settings.lean_starts) {
    for (double fraction : {0.9, 0.5, 0.1})
      for (OwnerRule rule : {OwnerRule::effective_snr, OwnerRule::equal_split})
        if (auto p = lean_start(c, limits, fraction, rule)) starts.push_back(std::move(*p));
  }
  std::mt19937_64 rng(settings.start_seed);
  std::uniform_real_distribution<double> fraction(0.05, 1.0);
  for (int i = 0; i < settings.random_starts; ++i) {
    const OwnerRule rule = i % 2 == 0 ? OwnerRule::effective_snr : OwnerRule::equal_split;
    if (auto p = lean_start(c, limits, fraction(rng), rule, &rng)) starts.push_back(std::move(*p));
    if (auto p = random_fill_start(c, limits, rule, rng)) starts.push_back(std::move(*p));
  }
  return starts;
}

}  // namespace detail

/// Full joint design. From each starting point: alternate y and P updates
/// until the relative change of the relaxed sum rate drops below
/// outer_tol, round to a binary assignment, then polish powers on that
/// assignment. The run with the best binary sum rate is returned.
inline SolveResult solve(const ChannelSet& channels, const ScenarioConfig& config,
                         const SolverSettings& settings = {}, const SolveOptions& options = {}) {
  validate(config);
  const CoefficientBundle c = make_coefficients(channels, config);
  const PowerLimits limits = PowerLimits::from(config);
  const Constraints con = make_constraints(c, limits);
  const double eta = config.eta;

  auto run_from = [&](const PowerMatrix& start) {
    SolveResult r;
    auto main = detail::fp_ascent(start, c, eta, con, settings);
    r.relaxed_sum_rate = sum_relaxed_rate(main.power, c, eta);
    r.outer_iterations = main.iterations;
    r.trace = std::move(main.trace);
    Assignment a = extract_assignment(main.power, limits.p_c_cap);
    PowerMatrix final_power = to_power_matrix(a, c.k());
    if (settings.refine) {
      auto polished = detail::refine_on_assignment(a, c, eta, con, settings);
      r.refinement_iterations = polished.iterations;
      final_power = std::move(polished.power);
    }
    r.assignment = extract_assignment(final_power, limits.p_c_cap);
    r.power = std::move(final_power);
    r.binary_sum_rate = binary_rate(r.assignment, channels, config);
    r.achieved_sinr_db = linear_to_db(radar_sinr(r.power, c));
    r.feasible = max_violation(r.power, con) <= settings.feasibility_tol;
    return r;
  };

  std::vector<PowerMatrix> starts = detail::starting_points(c, limits, settings);
  if (options.warm_start) {
    const PowerMatrix& ws = *options.warm_start;
    detail::check_shape(ws, c);
    starts.push_back(max_violation(ws, con) <= settings.feasibility_tol ? ws
                                                                        : project(ws.matrix(), con));
  }
  std::optional<SolveResult> best;
  if (options.warm_start && max_violation(*options.warm_start, con) <= settings.feasibility_tol) {
    // The warm start itself, rounded, competes unchanged.
    SolveResult r;
    r.assignment = extract_assignment(*options.warm_start, limits.p_c_cap);
    r.power = to_power_matrix(r.assignment, c.k());
    r.relaxed_sum_rate = sum_relaxed_rate(*options.warm_start, c, eta);
    r.binary_sum_rate = binary_rate(r.assignment, channels, config);
    r.achieved_sinr_db = linear_to_db(radar_sinr(r.power, c));
    r.feasible = max_violation(r.power, con) <= settings.feasibility_tol;
    r.trace.push_back({0, r.relaxed_sum_rate, r.relaxed_sum_rate, r.achieved_sinr_db});
    if (r.feasible) best = std::move(r);
  }
  for (const auto& start : starts) {
    SolveResult r = run_from(start);
    if (!best || (r.feasible && (!best->feasible || r.binary_sum_rate > best->binary_sum_rate)))
      best = std::move(r);
  }
  return std::move(*best);
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,q_value,sum_rate_bpcu,sinr_db\n";
  const auto old = out.precision(17);
  for (const auto& t : trace)
    out << t.iteration << ',' << t.q_value << ',' << t.sum_rate << ',' << t.sinr_db << '\n';
  out.precision(old);
}

}  // namespace rcc
