#pragma once

// Exhaustive ground truth for toy instances: every subcarrier ownership
// pattern crossed with uniform power grids, scored with the mixed-integer
// objective and checked against the raw constraints.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "rcc/errors.hpp"
#include "rcc/fp_solver.hpp"
#include "rcc/model.hpp"
#include "rcc/scenario.hpp"

namespace rcc {

struct OracleSettings {
  int grid_levels = 9;               ///< points per power variable, including 0 and the cap
  double max_evaluations = 5e7;      ///< guard on (K+1)^N · levels^(2N)
  unsigned jobs = 1;
};

struct OracleResult {
  double best_rate = 0.0;
  Assignment best;
};

/// Upper bound on the number of grid points the search visits.
inline double oracle_cost(std::size_t n_sub, std::size_t n_users, int grid_levels) {
  return std::pow(static_cast<double>(n_users + 1), static_cast<double>(n_sub)) *
         std::pow(static_cast<double>(grid_levels), 2.0 * static_cast<double>(n_sub));
}

namespace detail {

/// Mixed-radix counter over [0, radix)^digits.
inline bool advance(std::vector<int>& digits, int radix) {
  for (auto& d : digits) {
    if (++d < radix) return true;
    d = 0;
  }
  return false;
}

}  // namespace detail

/// Maximizes the binary-assignment sum rate over the grid. Feasibility is
/// tested with the same arithmetic as radar_sinr_raw, so the returned point
/// passes an exact re-check.
inline OracleResult brute_force(const ChannelSet& ch, const ScenarioConfig& config,
                                const OracleSettings& settings = {}) {
  validate(config);
  check_channels(ch, config);
  if (settings.grid_levels < 2) throw ConfigError("grid_levels must be >= 2");
  const std::size_t N = ch.n();
  const std::size_t K = ch.k();
  if (oracle_cost(N, K, settings.grid_levels) > settings.max_evaluations)
    throw BudgetExceeded("brute force over " + std::to_string(N) + " subcarriers and " +
                         std::to_string(K) + " users exceeds the evaluation budget");

  const int levels = settings.grid_levels;
  const double pc_cap = config.p_c_cap_w();
  const double pr_cap = config.p_r_cap_w();
  const double pc_max = config.p_c_max_w();
  const double pr_max = config.p_r_max_w();
  const double mu = config.sinr_floor();
  const double nc = config.noise_comm_w();
  const double nr = config.noise_radar_w();
  std::vector<double> comm_grid(levels), radar_grid(levels);
  for (int i = 0; i < levels; ++i) {
    comm_grid[i] = pc_cap * i / (levels - 1);
    radar_grid[i] = pr_cap * i / (levels - 1);
  }

  // Feasible radar vectors are shared by every ownership pattern.
  std::vector<std::vector<double>> radar_options;
  {
    std::vector<int> idx(N, 0);
    do {
      std::vector<double> pr(N);
      double total = 0.0;
      for (std::size_t n = 0; n < N; ++n) total += (pr[n] = radar_grid[idx[n]]);
      if (total <= pr_max) radar_options.push_back(std::move(pr));
    } while (detail::advance(idx, levels));
  }

  std::size_t n_patterns = 1;
  for (std::size_t n = 0; n < N; ++n) n_patterns *= K + 1;

  struct Best {
    double rate = -1.0;
    std::size_t pattern = 0;
    Assignment a;
  };

  auto search_pattern = [&](std::size_t pattern, Best& best) {
    // Digit 0 = unowned, digit j = user j-1.
    std::vector<std::optional<std::size_t>> owner(N);
    std::vector<std::size_t> owned;
    for (std::size_t n = 0, rest = pattern; n < N; ++n, rest /= K + 1) {
      const std::size_t d = rest % (K + 1);
      if (d > 0) {
        owner[n] = d - 1;
        owned.push_back(n);
      }
    }
    std::vector<int> cidx(owned.size(), 0);
    std::vector<double> pc(N, 0.0);
    do {
      double comm_total = 0.0;
      for (std::size_t j = 0; j < owned.size(); ++j) comm_total += (pc[owned[j]] = comm_grid[cidx[j]]);
      if (comm_total > pc_max) continue;
      double den = 0.0;
      for (std::size_t n = 0; n < N; ++n) den += ch.u2[n] * pc[n] + nr;
      for (const auto& pr : radar_options) {
        double num = 0.0;
        for (std::size_t n = 0; n < N; ++n) num += ch.g2[n] * pr[n];
        if (!(num / den >= mu)) continue;
        double rate = 0.0;
        for (std::size_t n : owned) {
          const std::size_t k = *owner[n];
          rate += std::log2(1.0 + ch.h2(n, k) * pc[n] / (ch.s2(n, k) * pr[n] + nc));
        }
        if (rate > best.rate || (rate == best.rate && pattern < best.pattern)) {
          best.rate = rate;
          best.pattern = pattern;
          best.a = Assignment{owner, pc, pr, std::vector<double>(N, 0.0)};
        }
      }
    } while (detail::advance(cidx, levels));
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(settings.jobs, static_cast<unsigned>(n_patterns)));
  std::vector<Best> partial(jobs);
  if (jobs == 1) {
    for (std::size_t p = 0; p < n_patterns; ++p) search_pattern(p, partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t p = t; p < n_patterns; p += jobs) search_pattern(p, partial[t]);
      });
    }
    for (auto& th : pool) th.join();
  }
  Best best;
  for (auto& b : partial) {
    if (b.rate > best.rate || (b.rate == best.rate && b.rate >= 0.0 && b.pattern < best.pattern))
      best = std::move(b);
  }
  if (best.rate < 0.0) {
    throw Infeasible("no grid point satisfies the radar SINR floor",
                     max_radar_sinr(make_coefficients(ch, config), PowerLimits::from(config)).sinr);
  }
  return {best.rate, std::move(best.a)};
}

// ---------------------------------------------------------------------------
// Seeded toy instances for solver-vs-oracle comparisons.

struct OracleInstance {
  ScenarioConfig config;
  ChannelSet channels;
};

/// Default channel statistics on N subcarriers and K users, with budgets
/// shrunk so they can bind (a fraction of N × cap) and the SINR floor set
/// to a seeded fraction of the best SINR reachable with comm silent.
inline OracleInstance make_oracle_instance(std::uint64_t seed, int n_subcarriers, int n_users) {
  ScenarioConfig cfg;
  cfg.n_subcarriers = n_subcarriers;
  cfg.n_users = n_users;
  cfg.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frac(0.35, 1.0);
  std::uniform_real_distribution<double> floor_frac(0.05, 0.7);
  const double n = n_subcarriers;
  cfg.p_c_max_dbm = watts_to_dbm(n * cfg.p_c_cap_w() * frac(rng));
  cfg.p_r_max_dbm = watts_to_dbm(n * cfg.p_r_cap_w() * frac(rng));
  const double floor_share = floor_frac(rng);
  ChannelSet ch = generate_channels(cfg, rng);
  const auto bound = max_radar_sinr(make_coefficients(ch, cfg), PowerLimits::from(cfg));
  cfg.sinr_floor_db = linear_to_db(bound.sinr * floor_share);
  return {cfg, std::move(ch)};
}

}  // namespace rcc
