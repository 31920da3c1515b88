#pragma once

// Rate and radar-SINR evaluators for the coexistence problem, in both the
// binary-assignment form and the penalty-relaxed continuous form.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcc/errors.hpp"
#include "rcc/matrix.hpp"
#include "rcc/scenario.hpp"

namespace rcc {

/// (K+1)×N decision matrix: rows 0..K-1 hold the per-user comm powers
/// w_{n,k}, the last row holds the radar power on each subcarrier (watts).
class PowerMatrix {
 public:
  PowerMatrix() = default;
  PowerMatrix(std::size_t n_users, std::size_t n_subcarriers)
      : m_(n_users + 1, n_subcarriers, 0.0) {}
  explicit PowerMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 2) throw DimensionError("power matrix needs at least one user row");
  }

  std::size_t n_users() const { return m_.rows() - 1; }
  std::size_t n_subcarriers() const { return m_.cols(); }
  std::size_t radar_row() const { return m_.rows() - 1; }

  double& comm(std::size_t k, std::size_t n) { return m_(k, n); }
  double comm(std::size_t k, std::size_t n) const { return m_(k, n); }
  double& radar(std::size_t n) { return m_(radar_row(), n); }
  double radar(std::size_t n) const { return m_(radar_row(), n); }

  /// Σ_k w_{n,k}
  double column_comm(std::size_t n) const {
    double s = 0.0;
    for (std::size_t k = 0; k < n_users(); ++k) s += m_(k, n);
    return s;
  }
  double total_comm() const {
    double s = 0.0;
    for (std::size_t k = 0; k < n_users(); ++k)
      for (double v : m_.row(k)) s += v;
    return s;
  }
  double total_radar() const {
    double s = 0.0;
    for (double v : m_.row(radar_row())) s += v;
    return s;
  }

  Matrix& matrix() { return m_; }
  const Matrix& matrix() const { return m_; }

  friend bool operator==(const PowerMatrix&, const PowerMatrix&) = default;

 private:
  Matrix m_;
};

/// Linear-unit power limits and the SINR floor shared by every solver.
struct PowerLimits {
  double p_c_cap = 1.0;
  double p_r_cap = 1.0;
  double p_c_max = 1.0;
  double p_r_max = 1.0;
  double sinr_floor = 0.0;  ///< linear

  static PowerLimits from(const ScenarioConfig& c) {
    return {c.p_c_cap_w(), c.p_r_cap_w(), c.p_c_max_w(), c.p_r_max_w(), c.sinr_floor()};
  }
};

/// Normalized gains: alpha = h²/σ²_c, beta = s²/σ²_c, xi = g²/σ²_r, gamma = u²/σ²_r.
struct CoefficientBundle {
  Matrix alpha;  ///< N×K
  Matrix beta;   ///< N×K
  std::vector<double> xi;
  std::vector<double> gamma;
  InterferenceGain interference = InterferenceGain::receiver;

  std::size_t n() const { return alpha.rows(); }
  std::size_t k() const { return alpha.cols(); }

  /// Gain applied to w_{n,i} in the penalty seen by user k.
  double penalty_gain(std::size_t n, std::size_t k, std::size_t i) const {
    return interference == InterferenceGain::receiver ? alpha(n, k) : alpha(n, i);
  }
};

inline CoefficientBundle make_coefficients(const ChannelSet& ch, const ScenarioConfig& config) {
  check_channels(ch, config);
  const double nc = config.noise_comm_w();
  const double nr = config.noise_radar_w();
  CoefficientBundle c{Matrix(ch.n(), ch.k()), Matrix(ch.n(), ch.k()),
                      std::vector<double>(ch.n()), std::vector<double>(ch.n()),
                      config.interference_gain};
  for (std::size_t n = 0; n < ch.n(); ++n) {
    for (std::size_t k = 0; k < ch.k(); ++k) {
      c.alpha(n, k) = ch.h2(n, k) / nc;
      c.beta(n, k) = ch.s2(n, k) / nc;
    }
    c.xi[n] = ch.g2[n] / nr;
    c.gamma[n] = ch.u2[n] / nr;
  }
  return c;
}

namespace detail {

inline void check_shape(const PowerMatrix& p, const CoefficientBundle& c) {
  if (p.n_users() != c.k() || p.n_subcarriers() != c.n() || c.beta.rows() != c.n() ||
      c.beta.cols() != c.k() || c.xi.size() != c.n() || c.gamma.size() != c.n())
    throw DimensionError("power matrix and coefficient bundle dimensions differ");
}

}  // namespace detail

/// Interference-plus-noise term of user k on subcarrier n (noise normalized
/// to 1): beta P^r + eta Σ_{i≠k} penalty_gain·w_{n,i} + 1.
inline double relaxed_denominator(const PowerMatrix& p, const CoefficientBundle& c, double eta,
                                  std::size_t n, std::size_t k) {
  double penalty = 0.0;
  for (std::size_t i = 0; i < c.k(); ++i) {
    if (i != k) penalty += c.penalty_gain(n, k, i) * p.comm(i, n);
  }
  return c.beta(n, k) * p.radar(n) + eta * penalty + 1.0;
}

/// Penalty-relaxed rate of user k in bits per channel use.
inline double relaxed_rate(const PowerMatrix& p, const CoefficientBundle& c, double eta,
                           std::size_t k) {
  detail::check_shape(p, c);
  if (k >= c.k()) throw DimensionError("user index out of range");
  double r = 0.0;
  for (std::size_t n = 0; n < c.n(); ++n) {
    r += std::log2(1.0 + c.alpha(n, k) * p.comm(k, n) / relaxed_denominator(p, c, eta, n, k));
  }
  return r;
}

inline double sum_relaxed_rate(const PowerMatrix& p, const CoefficientBundle& c, double eta) {
  double r = 0.0;
  for (std::size_t k = 0; k < c.k(); ++k) r += relaxed_rate(p, c, eta, k);
  return r;
}

/// Radar SINR in normalized form: Σ ξ P^r / Σ (γ Σ_k w + 1). Linear.
inline double radar_sinr(const PowerMatrix& p, const CoefficientBundle& c) {
  detail::check_shape(p, c);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < c.n(); ++n) {
    num += c.xi[n] * p.radar(n);
    den += c.gamma[n] * p.column_comm(n) + 1.0;
  }
  return num / den;
}

/// Radar SINR from raw channel gains and σ²_r. Linear.
inline double radar_sinr_raw(const PowerMatrix& p, const ChannelSet& ch, double noise_radar_w) {
  if (p.n_subcarriers() != ch.n() || p.n_users() != ch.k())
    throw DimensionError("power matrix and channel set dimensions differ");
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < ch.n(); ++n) {
    num += ch.g2[n] * p.radar(n);
    den += ch.u2[n] * p.column_comm(n) + noise_radar_w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Binary assignments

/// Subcarrier ownership with exclusive use: owner[n] is empty when the
/// subcarrier carries no comm traffic.
struct Assignment {
  std::vector<std::optional<std::size_t>> owner;
  std::vector<double> comm_power;
  std::vector<double> radar_power;
  /// second-largest / largest comm entry per subcarrier at extraction time
  std::vector<double> dominance;

  std::size_t n() const { return owner.size(); }
};

inline void check_assignment(const Assignment& a, std::size_t n_users) {
  if (a.comm_power.size() != a.n() || a.radar_power.size() != a.n())
    throw DimensionError("assignment vectors differ in length");
  for (std::size_t n = 0; n < a.n(); ++n) {
    if (a.owner[n] && *a.owner[n] >= n_users) throw DimensionError("owner index out of range");
    if (!a.owner[n] && a.comm_power[n] != 0.0)
      throw DomainError("unowned subcarrier " + std::to_string(n) + " carries comm power");
  }
}

/// Objective of the mixed-integer problem: Σ over owned subcarriers of
/// log2(1 + h² P^c / (s² P^r + σ²_c)).
inline double binary_rate(const Assignment& a, const ChannelSet& ch, const ScenarioConfig& config) {
  check_assignment(a, ch.k());
  if (a.n() != ch.n()) throw DimensionError("assignment length differs from subcarrier count");
  const double noise = config.noise_comm_w();
  double r = 0.0;
  for (std::size_t n = 0; n < a.n(); ++n) {
    if (!a.owner[n]) continue;
    const std::size_t k = *a.owner[n];
    r += std::log2(1.0 + ch.h2(n, k) * a.comm_power[n] / (ch.s2(n, k) * a.radar_power[n] + noise));
  }
  return r;
}

inline PowerMatrix to_power_matrix(const Assignment& a, std::size_t n_users) {
  check_assignment(a, n_users);
  PowerMatrix p(n_users, a.n());
  for (std::size_t n = 0; n < a.n(); ++n) {
    if (a.owner[n]) p.comm(*a.owner[n], n) = a.comm_power[n];
    p.radar(n) = a.radar_power[n];
  }
  return p;
}

/// Rounds a relaxed solution: each subcarrier goes to its largest comm entry
/// (lowest index on ties) and keeps the column's total comm power, clipped to
/// `p_c_cap`.
inline Assignment extract_assignment(const PowerMatrix& p, double p_c_cap) {
  const std::size_t n_sub = p.n_subcarriers();
  Assignment a{std::vector<std::optional<std::size_t>>(n_sub), std::vector<double>(n_sub, 0.0),
               std::vector<double>(n_sub, 0.0), std::vector<double>(n_sub, 0.0)};
  for (std::size_t n = 0; n < n_sub; ++n) {
    double best = 0.0, second = 0.0;
    std::optional<std::size_t> owner;
    for (std::size_t k = 0; k < p.n_users(); ++k) {
      const double w = p.comm(k, n);
      if (w > best) {
        second = best;
        best = w;
        owner = k;
      } else if (w > second) {
        second = w;
      }
    }
    a.owner[n] = owner;
    a.comm_power[n] = owner ? std::min(p.column_comm(n), p_c_cap) : 0.0;
    a.radar_power[n] = p.radar(n);
    a.dominance[n] = best > 0.0 ? second / best : 0.0;
  }
  return a;
}

/// Number of subcarriers whose dominance ratio exceeds `dominance_tol`,
/// i.e. where the relaxed solution still shares power noticeably.
inline std::size_t count_shared(const Assignment& a, double dominance_tol) {
  return static_cast<std::size_t>(std::count_if(a.dominance.begin(), a.dominance.end(),
                                                [&](double d) { return d > dominance_tol; }));
}

// ---------------------------------------------------------------------------
// Two-user sharing inequality behind the eta >= 1/2 equivalence result.

struct SharingBound {
  double lhs;  ///< rate with all power W on the stronger user
  double rhs;  ///< rate when delta of W is moved to the weaker user
};

/// zeta1 <= zeta2 are the normalized noise-plus-interference levels of the
/// two users; delta in [0, W] is the power diverted to user 2.
inline SharingBound proposition1_inequality(double zeta1, double zeta2, double W, double delta,
                                            double eta) {
  if (!(zeta1 > 0.0) || !(zeta2 >= zeta1))
    throw DomainError("need 0 < zeta1 <= zeta2");
  if (!(W >= 0.0) || !(delta >= 0.0) || !(delta <= W))
    throw DomainError("need 0 <= delta <= W");
  if (!(eta >= 0.0)) throw DomainError("eta must be >= 0");
  const double lhs = std::log2(1.0 + W / zeta1);
  const double rhs = std::log2(1.0 + (W - delta) / (zeta1 + eta * delta)) +
                     std::log2(1.0 + delta / (zeta2 + eta * (W - delta)));
  return {lhs, rhs};
}

}  // namespace rcc
