#pragma once

// Command-line front end. Everything lives here so that tests can drive the
// tool in-process; tools/rcc_alloc.cpp only forwards argv.
//
// Exit codes: 0 ok, 1 usage or config error, 2 infeasible scenario,
// 3 a check subcommand found a violated property.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcc/rcc.hpp"

namespace rcc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInfeasible = 2, kCheckFailed = 3 };

namespace detail {

inline std::string timestamp_tag() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in --values");
    const auto e = item.find_last_not_of(" \t");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("bad number '" + item + "' in --values");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values must list at least one value");
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

inline nlohmann::json result_json(const SolveResult& r, const ScenarioConfig& cfg) {
  nlohmann::json owner = nlohmann::json::array();
  for (const auto& o : r.assignment.owner) owner.push_back(o ? nlohmann::json(*o) : nlohmann::json());
  return {{"config", config_to_json(cfg)},
          {"feasible", r.feasible},
          {"binary_sum_rate_bpcu", r.binary_sum_rate},
          {"relaxed_sum_rate_bpcu", r.relaxed_sum_rate},
          {"achieved_sinr_db", r.achieved_sinr_db},
          {"outer_iterations", r.outer_iterations},
          {"refinement_iterations", r.refinement_iterations},
          {"total_comm_w", r.power.total_comm()},
          {"total_radar_w", r.power.total_radar()},
          {"assignment",
           {{"owner", owner},
            {"comm_power_w", r.assignment.comm_power},
            {"radar_power_w", r.assignment.radar_power}}}};
}

inline void print_summary(std::ostream& out, const SolveResult& r, const ScenarioConfig& cfg) {
  const auto owned = std::count_if(r.assignment.owner.begin(), r.assignment.owner.end(),
                                   [](const auto& o) { return o.has_value(); });
  char buf[256];
  out << "scenario: N=" << cfg.n_subcarriers << " K=" << cfg.n_users << " seed=" << cfg.seed
      << '\n';
  std::snprintf(buf, sizeof buf, "sinr floor: %.3f dB, achieved: %.6f dB\n", cfg.sinr_floor_db,
                r.achieved_sinr_db);
  out << buf;
  std::snprintf(buf, sizeof buf, "sum rate: %.9f bpcu (relaxed %.9f)\n", r.binary_sum_rate,
                r.relaxed_sum_rate);
  out << buf;
  std::snprintf(buf, sizeof buf, "power: comm %.6f W, radar %.6f W\n", r.power.total_comm(),
                r.power.total_radar());
  out << buf;
  out << "owned subcarriers: " << owned << '/' << cfg.n_subcarriers << '\n';
  out << "outer iterations: " << r.outer_iterations
      << ", refinement iterations: " << r.refinement_iterations << '\n';
  out << "feasible: " << (r.feasible ? "true" : "false") << '\n';
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  ScenarioConfig load(std::ostream& err) const {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    for (const auto& w : validate(cfg)) err << "warning: " << w << '\n';
    return cfg;
  }
};

// Sharing-inequality sweep: eta in [0.5, 3]; returns the most negative
// lhs - rhs seen.
inline double prop1_worst_slack(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    double z1 = std::pow(10.0, -3.0 + 6.0 * u(rng));
    double z2 = std::pow(10.0, -3.0 + 6.0 * u(rng));
    if (z1 > z2) std::swap(z1, z2);
    const double W = std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double delta = W * u(rng);
    const double eta = 0.5 + 2.5 * u(rng);
    const auto b = proposition1_inequality(z1, z2, W, delta, eta);
    worst = std::min(worst, b.lhs - b.rhs);
  }
  return worst;
}

// Largest |Q(P, y*(P)) - sum rate| over random projected points.
inline double tightness_worst(std::size_t samples, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n_subcarriers = 16;
  cfg.n_users = 4;
  cfg.seed = seed;
  cfg.sinr_floor_db = 0.0;
  const ChannelSet ch = generate_channels(cfg);
  const CoefficientBundle c = make_coefficients(ch, cfg);
  const Constraints con = make_constraints(c, PowerLimits::from(cfg));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix raw(c.k() + 1, c.n());
    for (double& v : raw.flat()) v = 2.0 * u(rng);
    const PowerMatrix p = project(raw, con);
    const double q = q_value(p, update_y(p, c, cfg.eta), c, cfg.eta);
    worst = std::max(worst, std::abs(q - sum_relaxed_rate(p, c, cfg.eta)));
  }
  return worst;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Joint subcarrier and power allocation for radar-communication coexistence",
               "rcc_alloc"};
  app.require_subcommand(1);

  detail::Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "scenario JSON (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "channel seed (overrides the config)");
  };

  std::string out_dir = ".";
  std::string tag;
  std::optional<unsigned> jobs;
  bool single_start = false;

  auto* solve_cmd = app.add_subcommand("solve", "solve one scenario");
  add_common(solve_cmd);
  solve_cmd->add_option("--out-dir", out_dir, "directory for result JSON and trace CSV");
  solve_cmd->add_option("--tag", tag, "file-name tag (default: UTC timestamp)");
  solve_cmd->add_flag("--single-start", single_start, "skip the extra starting points");

  auto* trace_cmd = app.add_subcommand("trace", "print the outer-iteration trace as CSV");
  add_common(trace_cmd);
  std::string trace_out;
  trace_cmd->add_option("--out", trace_out, "write to this file instead of stdout");
  trace_cmd->add_flag("--single-start", single_start, "skip the extra starting points");

  auto* sweep_cmd = app.add_subcommand("sweep", "seeded parameter sweep");
  add_common(sweep_cmd);
  std::string kind_text;
  std::optional<std::string> values_text;
  int trials = 20;
  bool baseline = false;
  sweep_cmd->add_option("--kind", kind_text, "mu | pc_max | pr_cap | pc_cap")->required();
  sweep_cmd->add_option("--values", values_text, "comma-separated dB/dBm points");
  sweep_cmd->add_option("--trials", trials, "channel draws per value");
  sweep_cmd->add_option("--jobs", jobs, "worker threads (fallback: RCC_ALLOC_JOBS)");
  sweep_cmd->add_option("--out-dir", out_dir, "directory for the CSV files");
  sweep_cmd->add_option("--tag", tag, "file-name tag (default: UTC timestamp)");
  sweep_cmd->add_flag("--baseline", baseline, "also write the no-radar reference sweep");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "solver versus brute force on toy instances");
  int o_n = 3, o_k = 2, o_instances = 50, o_levels = 9;
  std::uint64_t o_seed = 1;
  oracle_cmd->add_option("--n", o_n, "subcarriers")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--k", o_k, "users")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--instances", o_instances, "instance count")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", o_seed, "first instance seed");
  oracle_cmd->add_option("--grid-levels", o_levels, "oracle grid points per variable");
  oracle_cmd->add_option("--jobs", jobs, "oracle threads (fallback: RCC_ALLOC_JOBS)");

  auto* prop_cmd = app.add_subcommand("prop-check", "sharing-inequality and tightness suites");
  std::size_t p_samples = 100000;
  std::uint64_t p_seed = 1;
  prop_cmd->add_option("--samples", p_samples, "random tuples")->check(CLI::PositiveNumber);
  prop_cmd->add_option("--seed", p_seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd || *trace_cmd) {
      const ScenarioConfig cfg = common.load(err);
      const ChannelSet ch = generate_channels(cfg);
      const SolverSettings settings = single_start ? SolverSettings::single_start() : SolverSettings{};
      const SolveResult r = solve(ch, cfg, settings);
      if (*trace_cmd) {
        if (trace_out.empty()) {
          write_trace_csv(out, r.trace);
        } else {
          auto f = detail::open_out(trace_out);
          write_trace_csv(f, r.trace);
        }
        return kOk;
      }
      if (tag.empty()) tag = detail::timestamp_tag();
      const std::filesystem::path dir(out_dir);
      const auto result_path = dir / ("solve_" + tag + ".json");
      const auto trace_path = dir / ("trace_" + tag + ".csv");
      {
        auto f = detail::open_out(result_path);
        f << detail::result_json(r, cfg).dump(2) << '\n';
      }
      {
        auto f = detail::open_out(trace_path);
        write_trace_csv(f, r.trace);
      }
      detail::print_summary(out, r, cfg);
      out << "wrote " << result_path.string() << ", " << trace_path.string() << '\n';
      return kOk;
    }

    if (*sweep_cmd) {
      SweepSpec spec;
      spec.kind = parse_sweep_kind(kind_text);
      spec.values = values_text ? detail::parse_values(*values_text) : default_sweep_values(spec.kind);
      spec.trials = trials;
      spec.base = common.load(err);
      spec.seed_base = spec.base.seed;
      spec.jobs = resolve_jobs(jobs);
      validate(spec);
      if (tag.empty()) tag = detail::timestamp_tag();
      const std::filesystem::path dir(out_dir);
      const std::string stem = std::string(to_string(spec.kind)) + "_" + tag;
      const auto rows = run_sweep(spec);
      {
        auto f = detail::open_out(dir / (stem + ".csv"));
        write_sweep_csv(f, rows);
      }
      const auto infeasible =
          std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.feasible; });
      out << "rows: " << rows.size() << ", infeasible: " << infeasible << '\n';
      out << "wrote " << (dir / (stem + ".csv")).string() << '\n';
      if (baseline) {
        auto f = detail::open_out(dir / (stem + "_baseline.csv"));
        write_sweep_csv(f, no_radar_baseline(spec));
        out << "wrote " << (dir / (stem + "_baseline.csv")).string() << '\n';
      }
      return kOk;
    }

    if (*oracle_cmd) {
      OracleSettings os;
      os.grid_levels = o_levels;
      os.jobs = resolve_jobs(jobs);
      double worst = std::numeric_limits<double>::infinity();
      int at_98 = 0;
      for (int i = 0; i < o_instances; ++i) {
        const std::uint64_t seed = o_seed + static_cast<std::uint64_t>(i);
        const OracleInstance inst = make_oracle_instance(seed, o_n, o_k);
        const OracleResult truth = brute_force(inst.channels, inst.config, os);
        const SolveResult r = solve(inst.channels, inst.config);
        const double ratio = truth.best_rate > 0.0 ? r.binary_sum_rate / truth.best_rate : 1.0;
        worst = std::min(worst, ratio);
        at_98 += ratio >= 0.98;
        char buf[128];
        std::snprintf(buf, sizeof buf, "seed %llu: solver %.9f oracle %.9f ratio %.6f\n",
                      static_cast<unsigned long long>(seed), r.binary_sum_rate, truth.best_rate,
                      ratio);
        out << buf;
      }
      char buf[128];
      std::snprintf(buf, sizeof buf, "worst ratio: %.6f\n", worst);
      out << buf << "instances at >= 0.98: " << at_98 << '/' << o_instances << '\n';
      const bool pass = at_98 >= 0.95 * o_instances && worst >= 0.95;
      return pass ? kOk : kCheckFailed;
    }

    if (*prop_cmd) {
      const double slack = detail::prop1_worst_slack(p_samples, p_seed);
      const std::size_t tight_samples = std::min<std::size_t>(p_samples, 100);
      const double tight = detail::tightness_worst(tight_samples, p_seed);
      char buf[160];
      std::snprintf(buf, sizeof buf, "sharing inequality: %zu samples, worst lhs - rhs = %.3e\n",
                    p_samples, slack);
      out << buf;
      std::snprintf(buf, sizeof buf, "tightness: %zu points, worst |Q - R| = %.3e\n",
                    tight_samples, tight);
      out << buf;
      return slack >= -1e-12 && tight <= 1e-9 ? kOk : kCheckFailed;
    }
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace rcc::cli
