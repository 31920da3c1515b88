#pragma once

// Reference evaluators written straight from the model formulas, sharing
// no code with the library beyond its data types.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "rcc/rcc.hpp"

namespace rcc::testing {

/// Raw-gain relaxed sum rate: h², s² and σ² instead of the normalized
/// coefficients, interference weighted with the receiver's own gain.
inline double raw_relaxed_sum_rate(const PowerMatrix& p, const ChannelSet& ch, double noise,
                                   double eta) {
  double r = 0.0;
  for (std::size_t n = 0; n < ch.n(); ++n) {
    for (std::size_t k = 0; k < ch.k(); ++k) {
      double others = 0.0;
      for (std::size_t i = 0; i < ch.k(); ++i)
        if (i != k) others += p.comm(i, n);
      const double sinr =
          ch.h2(n, k) * p.comm(k, n) / (ch.s2(n, k) * p.radar(n) + eta * ch.h2(n, k) * others + noise);
      r += std::log(1.0 + sinr) / std::log(2.0);
    }
  }
  return r;
}

/// Small random channel set with gains spread over a few decades.
inline ChannelSet random_channels(std::size_t n, std::size_t k, std::mt19937_64& rng,
                                  double scale = 1e-10) {
  std::uniform_real_distribution<double> e(-1.0, 1.0);
  ChannelSet ch{Matrix(n, k), Matrix(n, k), std::vector<double>(n), std::vector<double>(n)};
  for (double& v : ch.h2.flat()) v = scale * std::pow(10.0, 1.5 * e(rng));
  for (double& v : ch.s2.flat()) v = scale * std::pow(10.0, 1.5 * e(rng));
  for (double& v : ch.g2) v = scale * std::pow(10.0, 1.5 * e(rng));
  for (double& v : ch.u2) v = scale * std::pow(10.0, 1.5 * e(rng));
  return ch;
}

inline ScenarioConfig small_config(int n, int k, double sinr_floor_db = 0.0) {
  ScenarioConfig cfg;
  cfg.n_subcarriers = n;
  cfg.n_users = k;
  cfg.sinr_floor_db = sinr_floor_db;
  return cfg;
}

/// Independent constraint check with raw gains; returns the largest
/// relative violation.
inline double raw_violation(const PowerMatrix& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  double worst = 0.0;
  double comm = 0.0, radar = 0.0, num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < ch.n(); ++n) {
    double col = 0.0;
    for (std::size_t k = 0; k < ch.k(); ++k) {
      const double w = p.comm(k, n);
      worst = std::max({worst, -w / cfg.p_c_cap_w(), (w - cfg.p_c_cap_w()) / cfg.p_c_cap_w()});
      col += w;
    }
    const double pr = p.radar(n);
    worst = std::max({worst, -pr / cfg.p_r_cap_w(), (pr - cfg.p_r_cap_w()) / cfg.p_r_cap_w()});
    comm += col;
    radar += pr;
    num += ch.g2[n] * pr;
    den += ch.u2[n] * col + cfg.noise_radar_w();
  }
  worst = std::max(worst, (comm - cfg.p_c_max_w()) / cfg.p_c_max_w());
  worst = std::max(worst, (radar - cfg.p_r_max_w()) / cfg.p_r_max_w());
  const double need = cfg.sinr_floor() * den;
  worst = std::max(worst, (need - num) / need);
  return worst;
}

/// Uniform point of the box, not necessarily feasible.
inline Matrix random_box_point(std::size_t k, std::size_t n, double comm_cap, double radar_cap,
                               std::mt19937_64& rng, double overshoot = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(k + 1, n);
  for (std::size_t r = 0; r <= k; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = overshoot * (r == k ? radar_cap : comm_cap) * u(rng);
  return m;
}

}  // namespace rcc::testing
