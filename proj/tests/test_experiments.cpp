#include <gtest/gtest.h>

#include <sstream>

#include "rcc/experiments.hpp"
#include "support.hpp"

using namespace rcc;

namespace {

SweepSpec small_spec(SweepKind kind, std::vector<double> values, int trials = 3) {
  SweepSpec s;
  s.kind = kind;
  s.values = std::move(values);
  s.trials = trials;
  s.base.n_subcarriers = 8;
  s.base.n_users = 3;
  s.solver = SolverSettings::single_start();
  return s;
}

}  // namespace

TEST(SweepSpec, Validation) {
  auto s = small_spec(SweepKind::mu, {});
  EXPECT_THROW(validate(s), ConfigError);
  s.values = {10.0, 10.0};
  EXPECT_THROW(validate(s), ConfigError);
  s.values = {12.0, 10.0};
  EXPECT_THROW(validate(s), ConfigError);
  s.values = {10.0};
  s.trials = 0;
  EXPECT_THROW(validate(s), ConfigError);
  EXPECT_THROW(parse_sweep_kind("snr"), ConfigError);
  EXPECT_EQ(parse_sweep_kind("pr_cap"), SweepKind::pr_cap);
}

TEST(SweepSpec, DefaultGrids) {
  EXPECT_EQ(default_sweep_values(SweepKind::mu), (std::vector<double>{12, 16, 20, 24, 28}));
  EXPECT_EQ(default_sweep_values(SweepKind::pc_max).front(), 40.0);
  EXPECT_EQ(default_sweep_values(SweepKind::pc_cap).back(), 30.0);
}

TEST(Sweep, OneValueOneTrialOneRow) {
  const auto rows = run_sweep(small_spec(SweepKind::mu, {10.0}, 1));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trial, 0);
  EXPECT_EQ(rows[0].value_db, 10.0);
}

TEST(Sweep, RowOrderAndDeterminism) {
  auto spec = small_spec(SweepKind::mu, {6.0, 10.0, 14.0}, 3);
  const auto a = run_sweep(spec);
  spec.jobs = 3;
  const auto b = run_sweep(spec);
  ASSERT_EQ(a.size(), 9u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value_db, spec.values[i / 3]);
    EXPECT_EQ(a[i].trial, static_cast<int>(i % 3));
  }
  std::ostringstream ca, cb;
  write_sweep_csv(ca, a);
  write_sweep_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Sweep, InfeasiblePointsAreKept) {
  const auto rows = run_sweep(small_spec(SweepKind::mu, {10.0, 95.0}, 2));
  ASSERT_EQ(rows.size(), 4u);
  for (int i = 2; i < 4; ++i) {
    EXPECT_FALSE(rows[i].feasible);
    EXPECT_EQ(rows[i].sum_rate_bpcu, 0.0);
    EXPECT_LT(rows[i].sinr_db, 95.0);
  }
}

TEST(Sweep, MuCurveNonIncreasingPerTrial) {
  const auto spec = small_spec(SweepKind::mu, {0.0, 6.0, 12.0, 18.0}, 4);
  const auto rows = run_sweep(spec);
  for (int t = 0; t < spec.trials; ++t)
    for (std::size_t v = 1; v < spec.values.size(); ++v)
      EXPECT_LE(rows[v * 4 + t].sum_rate_bpcu, rows[(v - 1) * 4 + t].sum_rate_bpcu + 1e-6);
}

TEST(Baseline, DominatesAndIgnoresMu) {
  const auto spec = small_spec(SweepKind::mu, {0.0, 10.0, 20.0}, 3);
  const auto rows = run_sweep(spec);
  const auto base = no_radar_baseline(spec);
  ASSERT_EQ(base.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_GE(base[i].sum_rate_bpcu, rows[i].sum_rate_bpcu - 1e-9);
    EXPECT_TRUE(std::isnan(base[i].sinr_db));
    EXPECT_EQ(base[i].sum_rate_bpcu, base[i % 3].sum_rate_bpcu);
  }
}

TEST(Baseline, EqualsSolveWithoutRadar) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig cfg;
    cfg.n_subcarriers = 16;
    cfg.n_users = 3;
    cfg.seed = seed;
    cfg.sinr_floor_db = -400.0;  // μ → 0
    ChannelSet ch = generate_channels(cfg);
    ch.s2.fill(0.0);
    const double ref = no_radar_optimum(ch, cfg).sum_rate;
    EXPECT_NEAR(solve(ch, cfg).binary_sum_rate, ref, 1e-6 * ref);
  }
}

TEST(Baseline, WaterFillingKkt) {
  // Oracle: the water level from a fine scan of the budget equation.
  ScenarioConfig cfg;
  cfg.n_subcarriers = 32;
  cfg.p_c_max_dbm = 40.0;
  const ChannelSet ch = generate_channels(cfg);
  const auto sol = no_radar_optimum(ch, cfg);
  double total = 0.0;
  for (double p : sol.power) total += p;
  EXPECT_NEAR(total, cfg.p_c_max_w(), 1e-9 * cfg.p_c_max_w());
  // Every subcarrier strictly inside (0, cap) shares the same water level.
  double level = -1.0;
  for (std::size_t n = 0; n < ch.n(); ++n) {
    const double p = sol.power[n];
    if (p <= 0.0 || p >= cfg.p_c_cap_w()) continue;
    const double g = ch.h2(n, *sol.owner[n]) / cfg.noise_comm_w();
    if (level < 0.0) level = p + 1.0 / g;
    EXPECT_NEAR(p + 1.0 / g, level, 1e-9 * level);
  }
}

TEST(SweepCsv, HeaderAndFormatting) {
  std::ostringstream out;
  write_sweep_csv(out, {{SweepKind::pr_cap, 22.0, 1, 3.5, std::nan(""), true, 4},
                        {SweepKind::pr_cap, 24.0, 0, 0.0, 12.25, false, 0}});
  EXPECT_EQ(out.str(),
            "sweep_kind,value_db,trial,sum_rate_bpcu,sinr_db,feasible,iterations\n"
            "pr_cap,22,1,3.5,nan,true,4\n"
            "pr_cap,24,0,0,12.25,false,0\n");
}

TEST(Jobs, EnvironmentFallback) {
  ::setenv("RCC_ALLOC_JOBS", "3", 1);
  EXPECT_EQ(resolve_jobs(std::nullopt), 3u);
  EXPECT_EQ(resolve_jobs(5u), 5u);
  ::setenv("RCC_ALLOC_JOBS", "zero", 1);
  EXPECT_EQ(resolve_jobs(std::nullopt), 1u);
  ::unsetenv("RCC_ALLOC_JOBS");
  EXPECT_EQ(resolve_jobs(std::nullopt), 1u);
}
