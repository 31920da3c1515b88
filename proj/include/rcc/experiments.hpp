#pragma once

// Seeded parameter sweeps over many channel draws. Each trial keeps one
// channel realization across all sweep values; rows are emitted
// value-major, trial-minor regardless of how trials were scheduled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rcc/errors.hpp"
#include "rcc/fp_solver.hpp"
#include "rcc/model.hpp"
#include "rcc/scenario.hpp"

namespace rcc {

enum class SweepKind { mu, pc_max, pr_cap, pc_cap };

inline std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::mu: return "mu";
    case SweepKind::pc_max: return "pc_max";
    case SweepKind::pr_cap: return "pr_cap";
    case SweepKind::pc_cap: return "pc_cap";
  }
  return "?";
}

inline SweepKind parse_sweep_kind(std::string_view s) {
  if (s == "mu") return SweepKind::mu;
  if (s == "pc_max") return SweepKind::pc_max;
  if (s == "pr_cap") return SweepKind::pr_cap;
  if (s == "pc_cap") return SweepKind::pc_cap;
  throw ConfigError("unknown sweep kind '" + std::string(s) +
                    "' (expected mu, pc_max, pr_cap or pc_cap)");
}

/// Default grids: SINR floors in dB, budgets and caps in dBm.
inline std::vector<double> default_sweep_values(SweepKind k) {
  switch (k) {
    case SweepKind::mu: return {12, 16, 20, 24, 28};
    case SweepKind::pc_max: return {40, 42, 44, 46, 48, 50};
    case SweepKind::pr_cap:
    case SweepKind::pc_cap: return {20, 22, 24, 26, 28, 30};
  }
  return {};
}

struct SweepSpec {
  SweepKind kind = SweepKind::mu;
  std::vector<double> values;
  int trials = 20;
  ScenarioConfig base;
  std::uint64_t seed_base = 1;
  unsigned jobs = 1;
  SolverSettings solver;
};

struct SweepRow {
  SweepKind kind;
  double value_db;
  int trial;
  double sum_rate_bpcu;
  double sinr_db;
  bool feasible;
  int iterations;
};

inline void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep values must not be empty");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i] > spec.values[i - 1]))
      throw ConfigError("sweep values must be strictly increasing");
  for (double v : spec.values)
    if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  validate(spec.base);
}

inline ScenarioConfig apply_sweep_value(ScenarioConfig c, SweepKind kind, double value) {
  switch (kind) {
    case SweepKind::mu: c.sinr_floor_db = value; break;
    case SweepKind::pc_max: c.p_c_max_dbm = value; break;
    case SweepKind::pr_cap: c.p_r_cap_dbm = value; break;
    case SweepKind::pc_cap: c.p_c_cap_dbm = value; break;
  }
  return c;
}

/// Channel seed of a trial; every value of the sweep reuses it.
inline std::uint64_t trial_seed(const SweepSpec& spec, int trial) {
  return spec.seed_base + static_cast<std::uint64_t>(trial);
}

/// Thread count from an explicit request, else RCC_ALLOC_JOBS, else 1.
inline unsigned resolve_jobs(std::optional<unsigned> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("RCC_ALLOC_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

namespace detail {

/// Runs `body(trial)` for every trial on `jobs` threads.
template <typename Body>
void for_each_trial(int trials, unsigned jobs, Body&& body) {
  jobs = std::max(1u, std::min(jobs, static_cast<unsigned>(trials)));
  if (jobs == 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (int t = next++; t < trials; t = next++) body(t);
    });
  }
  for (auto& th : pool) th.join();
}

/// Visits sweep values in the order in which the feasible set grows, so
/// each solve can be warm-started from the previous (still feasible) one.
inline std::vector<std::size_t> relaxing_order(SweepKind kind, std::size_t count) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  if (kind == SweepKind::mu) std::reverse(order.begin(), order.end());
  return order;
}

inline std::vector<SweepRow> assemble(const SweepSpec& spec,
                                      const std::vector<std::vector<SweepRow>>& per_trial) {
  std::vector<SweepRow> rows;
  rows.reserve(spec.values.size() * per_trial.size());
  for (std::size_t v = 0; v < spec.values.size(); ++v)
    for (const auto& trial_rows : per_trial) rows.push_back(trial_rows[v]);
  return rows;
}

}  // namespace detail

/// Solves every (value, trial) pair. Infeasible points are kept as rows
/// with feasible = false, zero rate and the best attainable SINR.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<std::vector<SweepRow>> per_trial(static_cast<std::size_t>(spec.trials));
  detail::for_each_trial(spec.trials, spec.jobs, [&](int trial) {
    ScenarioConfig base = spec.base;
    base.seed = trial_seed(spec, trial);
    const ChannelSet ch = generate_channels(base);
    auto& rows = per_trial[static_cast<std::size_t>(trial)];
    rows.resize(spec.values.size());
    std::optional<PowerMatrix> previous;
    for (std::size_t v : detail::relaxing_order(spec.kind, spec.values.size())) {
      const double value = spec.values[v];
      const ScenarioConfig cfg = apply_sweep_value(base, spec.kind, value);
      SweepRow row{spec.kind, value, trial, 0.0, 0.0, false, 0};
      try {
        SolveOptions opts;
        opts.warm_start = previous;
        const SolveResult r = solve(ch, cfg, spec.solver, opts);
        row.sum_rate_bpcu = r.binary_sum_rate;
        row.sinr_db = r.achieved_sinr_db;
        row.feasible = r.feasible;
        row.iterations = r.outer_iterations;
        if (r.feasible) previous = r.power;
      } catch (const Infeasible& e) {
        row.sinr_db = linear_to_db(e.max_sinr());
      }
      rows[v] = row;
    }
  });
  return detail::assemble(spec, per_trial);
}

// ---------------------------------------------------------------------------
// Interference-free reference

struct NoRadarSolution {
  double sum_rate = 0.0;
  std::vector<std::optional<std::size_t>> owner;
  std::vector<double> power;
};

/// Global optimum without radar interference or SINR floor: every
/// subcarrier goes to its strongest user, then capped water-filling
/// p_n = clip(λ − 1/a_n, 0, cap) under the total budget.
inline NoRadarSolution no_radar_optimum(const ChannelSet& ch, const ScenarioConfig& config) {
  validate(config);
  check_channels(ch, config);
  const std::size_t N = ch.n();
  const double noise = config.noise_comm_w();
  const double cap = config.p_c_cap_w();
  const double budget = config.p_c_max_w();
  NoRadarSolution sol{0.0, std::vector<std::optional<std::size_t>>(N), std::vector<double>(N, 0.0)};
  std::vector<double> gain(N, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < ch.k(); ++k)
      if (ch.h2(n, k) > ch.h2(n, best)) best = k;
    gain[n] = ch.h2(n, best) / noise;
    if (gain[n] > 0.0) sol.owner[n] = best;
  }
  auto fill = [&](double level) {
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      sol.power[n] = gain[n] > 0.0 ? std::clamp(level - 1.0 / gain[n], 0.0, cap) : 0.0;
      total += sol.power[n];
    }
    return total;
  };
  double hi = 0.0;
  for (double g : gain)
    if (g > 0.0) hi = std::max(hi, cap + 1.0 / g);
  if (fill(hi) > budget) {
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (fill(mid) > budget ? hi : lo) = mid;
    }
    fill(lo);
  }
  for (std::size_t n = 0; n < N; ++n) sol.sum_rate += std::log2(1.0 + gain[n] * sol.power[n]);
  return sol;
}

/// Same grid as `spec` with radar interference and the SINR floor removed.
/// The SINR column is NaN (no radar); every row is feasible.
inline std::vector<SweepRow> no_radar_baseline(const SweepSpec& spec) {
  validate(spec);
  std::vector<std::vector<SweepRow>> per_trial(static_cast<std::size_t>(spec.trials));
  detail::for_each_trial(spec.trials, spec.jobs, [&](int trial) {
    ScenarioConfig base = spec.base;
    base.seed = trial_seed(spec, trial);
    ChannelSet ch = generate_channels(base);
    ch.s2.fill(0.0);
    auto& rows = per_trial[static_cast<std::size_t>(trial)];
    for (double value : spec.values) {
      const auto sol = no_radar_optimum(ch, apply_sweep_value(base, spec.kind, value));
      rows.push_back({spec.kind, value, trial, sol.sum_rate,
                      std::numeric_limits<double>::quiet_NaN(), true, 0});
    }
  });
  return detail::assemble(spec, per_trial);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kSweepCsvHeader =
    "sweep_kind,value_db,trial,sum_rate_bpcu,sinr_db,feasible,iterations";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  char buf[64];
  auto num = [&](double v) -> const char* {
    if (std::isnan(v)) return "nan";
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : rows) {
    out << to_string(r.kind) << ',' << num(r.value_db) << ',' << r.trial << ',';
    out << num(r.sum_rate_bpcu) << ',';
    out << num(r.sinr_db) << ',' << (r.feasible ? "true" : "false") << ',' << r.iterations << '\n';
  }
}

}  // namespace rcc
