#pragma once

// Scenario description: system parameters, their file format, and the
// randomized channel draw for one BS, K users and a co-located OFDM radar.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcc/errors.hpp"
#include "rcc/matrix.hpp"
#include "rcc/units.hpp"

namespace rcc {

/// Which channel gain scales the intra-subcarrier penalty seen by user k.
/// `receiver` uses h²_{n,k} (interference reaches k through k's own link);
/// `transmitter` uses h²_{n,i} of the interfering user i.
enum class InterferenceGain { receiver, transmitter };

struct PathlossParams {
  double reference_loss_db = 41.0;
  double exponent = 3.5;
  double reference_dist_m = 1.0;
};

struct RadarTargetArea {
  /// Distance at which the one-way pathloss equals the radar round-trip loss.
  double round_trip_dist_m = 45.0;
  /// Extra attenuation on the target-scattered radar signal reaching users.
  double scatter_loss_db = 0.0;
};

struct Geometry {
  double bs_radar_dist_m = 60.0;
  RadarTargetArea radar_target_area;
};

struct ScenarioConfig {
  int n_subcarriers = 128;
  int n_users = 5;
  double carrier_freq_hz = 2.4e9;
  double cell_radius_m = 800.0;
  double noise_comm_dbm = -105.0;
  double noise_radar_dbm = -105.0;
  double p_c_max_dbm = 50.0;
  double p_r_max_dbm = 45.0;
  double p_c_cap_dbm = 30.0;
  double p_r_cap_dbm = 30.0;
  double sinr_floor_db = 20.0;
  double eta = 0.5;
  double shadowing_sigma_db = 8.0;
  bool fading_enabled = true;
  std::uint64_t seed = 1;
  PathlossParams pathloss;
  Geometry geometry;
  InterferenceGain interference_gain = InterferenceGain::receiver;
  /// Permits eta < 1/2, where sharing-free optima are no longer guaranteed.
  bool allow_low_eta = false;

  std::size_t n() const { return static_cast<std::size_t>(n_subcarriers); }
  std::size_t k() const { return static_cast<std::size_t>(n_users); }

  double noise_comm_w() const { return dbm_to_watts(noise_comm_dbm); }
  double noise_radar_w() const { return dbm_to_watts(noise_radar_dbm); }
  double p_c_max_w() const { return dbm_to_watts(p_c_max_dbm); }
  double p_r_max_w() const { return dbm_to_watts(p_r_max_dbm); }
  double p_c_cap_w() const { return dbm_to_watts(p_c_cap_dbm); }
  double p_r_cap_w() const { return dbm_to_watts(p_r_cap_dbm); }
  double sinr_floor() const { return db_to_linear(sinr_floor_db); }
};

/// Throws ConfigError on a hard violation; returns human-readable warnings
/// for soft ones (a per-subcarrier cap above the total budget).
inline std::vector<std::string> validate(const ScenarioConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.n_subcarriers >= 1, "n_subcarriers must be >= 1");
  require(c.n_users >= 1, "n_users must be >= 1");
  for (double v : {c.noise_comm_dbm, c.noise_radar_dbm, c.p_c_max_dbm, c.p_r_max_dbm,
                   c.p_c_cap_dbm, c.p_r_cap_dbm, c.sinr_floor_db, c.shadowing_sigma_db}) {
    require(std::isfinite(v), "dB/dBm fields must be finite");
  }
  require(c.noise_comm_w() > 0.0 && c.noise_radar_w() > 0.0, "noise powers must be positive");
  require(c.p_c_max_w() > 0.0 && c.p_r_max_w() > 0.0 && c.p_c_cap_w() > 0.0 &&
              c.p_r_cap_w() > 0.0,
          "power budgets and caps must convert to positive watts");
  require(c.shadowing_sigma_db >= 0.0, "shadowing_sigma_db must be >= 0");
  require(std::isfinite(c.eta) && c.eta >= 0.0, "eta must be finite and >= 0");
  require(c.eta >= 0.5 || c.allow_low_eta,
          "eta < 0.5 voids the sharing-free guarantee; set allow_low_eta to override");
  require(c.carrier_freq_hz > 0.0, "carrier_freq_hz must be positive");
  require(c.cell_radius_m > 0.0, "cell_radius_m must be positive");
  require(c.pathloss.reference_dist_m > 0.0, "pathloss.reference_dist_m must be positive");
  require(c.pathloss.exponent >= 0.0, "pathloss.exponent must be >= 0");
  require(c.cell_radius_m > c.pathloss.reference_dist_m,
          "cell_radius_m must exceed pathloss.reference_dist_m");
  require(c.geometry.bs_radar_dist_m > 0.0, "geometry.bs_radar_dist_m must be positive");
  require(c.geometry.radar_target_area.round_trip_dist_m > 0.0,
          "geometry.radar_target_area.round_trip_dist_m must be positive");

  std::vector<std::string> warnings;
  if (c.p_c_cap_w() > c.p_c_max_w())
    warnings.emplace_back("p_c_cap_dbm exceeds p_c_max_dbm; the cap is still enforced");
  if (c.p_r_cap_w() > c.p_r_max_w())
    warnings.emplace_back("p_r_cap_dbm exceeds p_r_max_dbm; the cap is still enforced");
  return warnings;
}

// ---------------------------------------------------------------------------
// Config file (JSON). Keys mirror the struct fields; unknown keys are errors.

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key()))
      throw ConfigError("unknown config key '" + where + item.key() + "'");
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad value for '" + where + key + "': " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::read_key;
  detail::reject_unknown(
      j,
      {"n_subcarriers", "n_users", "carrier_freq_hz", "cell_radius_m", "noise_comm_dbm",
       "noise_radar_dbm", "p_c_max_dbm", "p_r_max_dbm", "p_c_cap_dbm", "p_r_cap_dbm",
       "sinr_floor_db", "eta", "shadowing_sigma_db", "fading_enabled", "seed", "pathloss",
       "geometry", "interference_gain", "allow_low_eta"},
      "");
  ScenarioConfig c;
  read_key(j, "n_subcarriers", c.n_subcarriers, "");
  read_key(j, "n_users", c.n_users, "");
  read_key(j, "carrier_freq_hz", c.carrier_freq_hz, "");
  read_key(j, "cell_radius_m", c.cell_radius_m, "");
  read_key(j, "noise_comm_dbm", c.noise_comm_dbm, "");
  read_key(j, "noise_radar_dbm", c.noise_radar_dbm, "");
  read_key(j, "p_c_max_dbm", c.p_c_max_dbm, "");
  read_key(j, "p_r_max_dbm", c.p_r_max_dbm, "");
  read_key(j, "p_c_cap_dbm", c.p_c_cap_dbm, "");
  read_key(j, "p_r_cap_dbm", c.p_r_cap_dbm, "");
  read_key(j, "sinr_floor_db", c.sinr_floor_db, "");
  read_key(j, "eta", c.eta, "");
  read_key(j, "shadowing_sigma_db", c.shadowing_sigma_db, "");
  read_key(j, "fading_enabled", c.fading_enabled, "");
  read_key(j, "seed", c.seed, "");
  read_key(j, "allow_low_eta", c.allow_low_eta, "");
  if (j.contains("interference_gain")) {
    std::string mode;
    read_key(j, "interference_gain", mode, "");
    if (mode == "receiver")
      c.interference_gain = InterferenceGain::receiver;
    else if (mode == "transmitter")
      c.interference_gain = InterferenceGain::transmitter;
    else
      throw ConfigError("interference_gain must be 'receiver' or 'transmitter'");
  }
  if (j.contains("pathloss")) {
    const auto& p = j.at("pathloss");
    detail::reject_unknown(p, {"reference_loss_db", "exponent", "reference_dist_m"}, "pathloss.");
    read_key(p, "reference_loss_db", c.pathloss.reference_loss_db, "pathloss.");
    read_key(p, "exponent", c.pathloss.exponent, "pathloss.");
    read_key(p, "reference_dist_m", c.pathloss.reference_dist_m, "pathloss.");
  }
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    detail::reject_unknown(g, {"bs_radar_dist_m", "radar_target_area"}, "geometry.");
    read_key(g, "bs_radar_dist_m", c.geometry.bs_radar_dist_m, "geometry.");
    if (g.contains("radar_target_area")) {
      const auto& t = g.at("radar_target_area");
      detail::reject_unknown(t, {"round_trip_dist_m", "scatter_loss_db"},
                             "geometry.radar_target_area.");
      read_key(t, "round_trip_dist_m", c.geometry.radar_target_area.round_trip_dist_m,
               "geometry.radar_target_area.");
      read_key(t, "scatter_loss_db", c.geometry.radar_target_area.scatter_loss_db,
               "geometry.radar_target_area.");
    }
  }
  validate(c);
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  return {
      {"n_subcarriers", c.n_subcarriers},
      {"n_users", c.n_users},
      {"carrier_freq_hz", c.carrier_freq_hz},
      {"cell_radius_m", c.cell_radius_m},
      {"noise_comm_dbm", c.noise_comm_dbm},
      {"noise_radar_dbm", c.noise_radar_dbm},
      {"p_c_max_dbm", c.p_c_max_dbm},
      {"p_r_max_dbm", c.p_r_max_dbm},
      {"p_c_cap_dbm", c.p_c_cap_dbm},
      {"p_r_cap_dbm", c.p_r_cap_dbm},
      {"sinr_floor_db", c.sinr_floor_db},
      {"eta", c.eta},
      {"shadowing_sigma_db", c.shadowing_sigma_db},
      {"fading_enabled", c.fading_enabled},
      {"seed", c.seed},
      {"allow_low_eta", c.allow_low_eta},
      {"interference_gain",
       c.interference_gain == InterferenceGain::receiver ? "receiver" : "transmitter"},
      {"pathloss",
       {{"reference_loss_db", c.pathloss.reference_loss_db},
        {"exponent", c.pathloss.exponent},
        {"reference_dist_m", c.pathloss.reference_dist_m}}},
      {"geometry",
       {{"bs_radar_dist_m", c.geometry.bs_radar_dist_m},
        {"radar_target_area",
         {{"round_trip_dist_m", c.geometry.radar_target_area.round_trip_dist_m},
          {"scatter_loss_db", c.geometry.radar_target_area.scatter_loss_db}}}}},
  };
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Channels

/// Squared channel magnitudes (linear power gains) for every link.
struct ChannelSet {
  Matrix h2;               ///< N×K, BS → user k on subcarrier n
  Matrix s2;               ///< N×K, radar → user k (via target scattering)
  std::vector<double> g2;  ///< N, radar round trip
  std::vector<double> u2;  ///< N, BS → radar receiver

  std::size_t n() const { return h2.rows(); }
  std::size_t k() const { return h2.cols(); }

  friend bool operator==(const ChannelSet&, const ChannelSet&) = default;
};

/// Checks shapes against `config` and that every gain is finite and >= 0.
inline void check_channels(const ChannelSet& ch, const ScenarioConfig& config) {
  if (ch.h2.rows() != config.n() || ch.h2.cols() != config.k() || !ch.s2.same_shape(ch.h2) ||
      ch.g2.size() != config.n() || ch.u2.size() != config.n())
    throw DimensionError("channel set dimensions do not match the configuration");
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  for (double v : ch.h2.flat())
    if (!ok(v)) throw DomainError("h2 contains a negative or non-finite gain");
  for (double v : ch.s2.flat())
    if (!ok(v)) throw DomainError("s2 contains a negative or non-finite gain");
  for (double v : ch.g2)
    if (!ok(v)) throw DomainError("g2 contains a negative or non-finite gain");
  for (double v : ch.u2)
    if (!ok(v)) throw DomainError("u2 contains a negative or non-finite gain");
}

/// Log-distance pathloss as a linear gain (< 1 beyond the reference distance).
inline double pathloss_gain(double distance_m, const PathlossParams& p) {
  if (!(distance_m > 0.0)) throw DomainError("pathloss distance must be positive");
  const double loss_db =
      p.reference_loss_db + 10.0 * p.exponent * std::log10(distance_m / p.reference_dist_m);
  return db_to_linear(-loss_db);
}

/// Draws user positions, shadowing and Rayleigh power fades. Each link gets
/// one log-normal shadowing value shared by all its subcarriers; fades are
/// independent per subcarrier with unit mean.
template <typename Rng>
ChannelSet generate_channels(const ScenarioConfig& config, Rng& rng) {
  validate(config);
  const std::size_t n = config.n();
  const std::size_t k = config.k();
  const auto& pl = config.pathloss;
  const double d0 = pl.reference_dist_m;
  const double radius = config.cell_radius_m;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> shadow_db(0.0, 1.0);
  std::exponential_distribution<double> fade_dist(1.0);

  auto shadow = [&] {
    return config.shadowing_sigma_db > 0.0
               ? db_to_linear(config.shadowing_sigma_db * shadow_db(rng))
               : 1.0;
  };
  auto fade = [&] { return config.fading_enabled ? fade_dist(rng) : 1.0; };

  // BS at the origin, radar on the positive x axis.
  const double radar_x = config.geometry.bs_radar_dist_m;
  std::vector<double> dist_bs(k), dist_radar(k);
  for (std::size_t u = 0; u < k; ++u) {
    const double r = std::sqrt(unit(rng) * (radius * radius - d0 * d0) + d0 * d0);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double x = r * std::cos(theta);
    const double y = r * std::sin(theta);
    dist_bs[u] = r;
    dist_radar[u] = std::max(std::hypot(x - radar_x, y), d0);
  }

  ChannelSet ch{Matrix(n, k), Matrix(n, k), std::vector<double>(n), std::vector<double>(n)};
  const double scatter = db_to_linear(-config.geometry.radar_target_area.scatter_loss_db);
  for (std::size_t u = 0; u < k; ++u) {
    const double bs_link = pathloss_gain(dist_bs[u], pl) * shadow();
    const double radar_link = pathloss_gain(dist_radar[u], pl) * scatter * shadow();
    for (std::size_t s = 0; s < n; ++s) {
      ch.h2(s, u) = bs_link * fade();
      ch.s2(s, u) = radar_link * fade();
    }
  }
  const double echo = pathloss_gain(config.geometry.radar_target_area.round_trip_dist_m, pl) *
                      shadow();
  const double leak = pathloss_gain(config.geometry.bs_radar_dist_m, pl) * shadow();
  for (std::size_t s = 0; s < n; ++s) {
    ch.g2[s] = echo * fade();
    ch.u2[s] = leak * fade();
  }
  return ch;
}

inline ChannelSet generate_channels(const ScenarioConfig& config) {
  std::mt19937_64 rng(config.seed);
  return generate_channels(config, rng);
}

}  // namespace rcc
