#pragma once

// Domain types and unit helpers shared by every other module.
// All internal math is carried in SI units (W, Hz, bit/s, m); dBm and Mb/s
// appear only at configuration and reporting boundaries.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace uavnoma {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// dBm -> W. 30 dBm is 1 W by definition.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// W -> dBm, inverse of dbm_to_watt.
inline double watt_to_dbm(double w) { return 30.0 + 10.0 * std::log10(w); }

/// Air-to-ground propagation constants plus the terrestrial MBS link exponent.
struct ChannelParams {
  double alpha1 = 4.88;        // environment constant, also the angle offset in the LoS fit
  double alpha2 = 0.43;        // per-degree slope of the LoS fit
  double eta_los_db = 0.1;     // excess loss under LoS, dB
  double eta_nlos_db = 21.0;   // excess loss under NLoS, dB
  double path_loss_exp = 3.0;  // MBS link exponent, must lie in [2,6]
  double f_c = 2.5e9;          // carrier frequency, Hz
  double c = 3.0e8;            // propagation speed, m/s
  double d0 = 1.0;             // far-field reference distance, m
  double g_tx = 1.0;           // UBS transmit antenna gain
  double g_rx = 1.0;           // UE receive antenna gain (UBS link)
  double g_mtx = 1.0;          // MBS transmit antenna gain
  double g_mrx = 1.0;          // UE receive antenna gain (MBS link)

  double wavelength() const { return c / f_c; }

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// Spectrum and per-subchannel constants. The band is split evenly into
/// n_subchannels orthogonal subchannels.
struct SystemParams {
  double bandwidth_w = 40e6;                      // total bandwidth W, Hz
  int n_subchannels = 4;                          // N_s
  double noise_per_sc = 3.1622776601683794e-12;   // sigma_n^2, W (-85 dBm)
  double mbs_power_per_sc = 0.251188643150958;    // p_n^M, W (24 dBm)
  double ubs_altitude = 100.0;                    // H, m

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

inline double per_sc_bandwidth(const SystemParams& sys) {
  return sys.bandwidth_w / static_cast<double>(sys.n_subchannels);
}

/// One problem instance: geometry, per-UE QoS demands, per-UBS limits.
struct Scenario {
  Point mbs_pos{0.0, 0.0};
  std::vector<Point> ubs_pos;      // length N_d
  std::vector<Point> ue_pos;       // length N_u
  std::vector<double> r_min;       // per-UE minimum rate, bit/s
  std::vector<double> c_max;       // per-UBS backhaul capacity, bit/s
  std::vector<double> p_circuit;   // per-UBS circuit power, W
  std::vector<double> p_max;       // per-UBS total power cap, W
  ChannelParams channel;
  SystemParams system;
  std::uint64_t seed = 0;

  int n_ues() const { return static_cast<int>(ue_pos.size()); }
  int n_ubs() const { return static_cast<int>(ubs_pos.size()); }

  /// Largest per-UBS transmit budget p_max - p_circuit, W.
  double max_tx_budget() const {
    double b = 0.0;
    for (std::size_t j = 0; j < p_max.size(); ++j) b = std::max(b, p_max[j] - p_circuit[j]);
    return b;
  }

  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Iteration caps and tolerances for the solvers and the outer loop.
struct AlgoConfig {
  int r_max = 1000;             // outer iteration cap
  double ee_rel_tol = 1e-4;     // relative convergence tolerance on eta_EE
  double feas_tol = 1e-6;       // relative constraint-audit tolerance
  double strict_margin = 1e-6;  // interior margin on normalized scales
  double bnb_gap = 1e-7;        // absolute MILP gap, normalized objective
  double newton_tol = 1e-8;     // barrier duality-measure target
  int mc_replications = 30;     // Monte-Carlo replications per campaign cell
  int sca_inner_rounds = 1;     // convex solves per outer iteration
  std::string newton_trace_csv; // per-iteration solver trace, empty = off

  void validate() const {
    if (r_max < 1) throw std::invalid_argument("AlgoConfig.r_max: must be >= 1");
    if (ee_rel_tol <= 0) throw std::invalid_argument("AlgoConfig.ee_rel_tol: must be > 0");
    if (feas_tol <= 0) throw std::invalid_argument("AlgoConfig.feas_tol: must be > 0");
    if (strict_margin <= 0) throw std::invalid_argument("AlgoConfig.strict_margin: must be > 0");
    if (bnb_gap <= 0) throw std::invalid_argument("AlgoConfig.bnb_gap: must be > 0");
    if (newton_tol <= 0) throw std::invalid_argument("AlgoConfig.newton_tol: must be > 0");
    if (mc_replications < 1) throw std::invalid_argument("AlgoConfig.mc_replications: must be >= 1");
    if (sca_inner_rounds < 1) throw std::invalid_argument("AlgoConfig.sca_inner_rounds: must be >= 1");
  }
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace detail

inline void Scenario::validate() const {
  using detail::require;
  require(!ue_pos.empty(), "Scenario.ue_pos: need at least one UE");
  require(!ubs_pos.empty(), "Scenario.ubs_pos: need at least one UBS");
  require(r_min.size() == ue_pos.size(), "Scenario.r_min: length must equal number of UEs");
  require(c_max.size() == ubs_pos.size(), "Scenario.c_max: length must equal number of UBSs");
  require(p_circuit.size() == ubs_pos.size(), "Scenario.p_circuit: length must equal number of UBSs");
  require(p_max.size() == ubs_pos.size(), "Scenario.p_max: length must equal number of UBSs");
  for (std::size_t i = 0; i < r_min.size(); ++i)
    require(r_min[i] > 0 && std::isfinite(r_min[i]), "Scenario.r_min: entries must be positive");
  for (std::size_t j = 0; j < c_max.size(); ++j)
    require(c_max[j] > 0 && std::isfinite(c_max[j]), "Scenario.c_max: entries must be positive");
  for (std::size_t j = 0; j < p_max.size(); ++j) {
    require(p_circuit[j] >= 0, "Scenario.p_circuit: entries must be >= 0");
    require(p_max[j] > p_circuit[j], "Scenario.p_max: must exceed p_circuit (empty transmit budget)");
  }
  require(channel.alpha1 > 0, "ChannelParams.alpha1: must be > 0");
  require(channel.alpha2 > 0, "ChannelParams.alpha2: must be > 0");
  require(channel.path_loss_exp >= 2.0 && channel.path_loss_exp <= 6.0,
          "ChannelParams.path_loss_exp: must lie in [2,6]");
  require(channel.d0 > 0, "ChannelParams.d0: must be > 0");
  require(channel.f_c > 0, "ChannelParams.f_c: must be > 0");
  require(channel.c > 0, "ChannelParams.c: must be > 0");
  require(channel.g_tx > 0 && channel.g_rx > 0 && channel.g_mtx > 0 && channel.g_mrx > 0,
          "ChannelParams.g_*: antenna gains must be > 0");
  require(channel.wavelength() > 0, "ChannelParams: derived wavelength must be > 0");
  require(system.bandwidth_w > 0, "SystemParams.bandwidth_w: must be > 0");
  require(system.n_subchannels >= 1, "SystemParams.n_subchannels: must be >= 1");
  require(system.noise_per_sc > 0, "SystemParams.noise_per_sc: must be > 0");
  require(system.mbs_power_per_sc >= 0, "SystemParams.mbs_power_per_sc: must be >= 0");
  require(system.ubs_altitude > 0, "SystemParams.ubs_altitude: must be > 0");
}

// ---------------------------------------------------------------------------
// JSON serialization. Round trip is bit exact: parse(serialize(s)) == s.

inline nlohmann::json to_json(const Point& p) { return nlohmann::json::array({p.x, p.y}); }

inline Point point_from_json(const nlohmann::json& j) {
  return Point{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["mbs_pos"] = to_json(s.mbs_pos);
  j["ubs_pos"] = nlohmann::json::array();
  for (const auto& p : s.ubs_pos) j["ubs_pos"].push_back(to_json(p));
  j["ue_pos"] = nlohmann::json::array();
  for (const auto& p : s.ue_pos) j["ue_pos"].push_back(to_json(p));
  j["r_min"] = s.r_min;
  j["c_max"] = s.c_max;
  j["p_circuit"] = s.p_circuit;
  j["p_max"] = s.p_max;
  j["channel"] = {
      {"alpha1", s.channel.alpha1},
      {"alpha2", s.channel.alpha2},
      {"eta_los_db", s.channel.eta_los_db},
      {"eta_nlos_db", s.channel.eta_nlos_db},
      {"path_loss_exp", s.channel.path_loss_exp},
      {"f_c", s.channel.f_c},
      {"c", s.channel.c},
      {"d0", s.channel.d0},
      {"g_tx", s.channel.g_tx},
      {"g_rx", s.channel.g_rx},
      {"g_mtx", s.channel.g_mtx},
      {"g_mrx", s.channel.g_mrx},
  };
  j["system"] = {
      {"bandwidth_w", s.system.bandwidth_w},
      {"n_subchannels", s.system.n_subchannels},
      {"noise_per_sc", s.system.noise_per_sc},
      {"mbs_power_per_sc", s.system.mbs_power_per_sc},
      {"ubs_altitude", s.system.ubs_altitude},
  };
  j["seed"] = s.seed;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.mbs_pos = point_from_json(j.at("mbs_pos"));
  for (const auto& p : j.at("ubs_pos")) s.ubs_pos.push_back(point_from_json(p));
  for (const auto& p : j.at("ue_pos")) s.ue_pos.push_back(point_from_json(p));
  s.r_min = j.at("r_min").get<std::vector<double>>();
  s.c_max = j.at("c_max").get<std::vector<double>>();
  s.p_circuit = j.at("p_circuit").get<std::vector<double>>();
  s.p_max = j.at("p_max").get<std::vector<double>>();
  const auto& ch = j.at("channel");
  s.channel.alpha1 = ch.at("alpha1").get<double>();
  s.channel.alpha2 = ch.at("alpha2").get<double>();
  s.channel.eta_los_db = ch.at("eta_los_db").get<double>();
  s.channel.eta_nlos_db = ch.at("eta_nlos_db").get<double>();
  s.channel.path_loss_exp = ch.at("path_loss_exp").get<double>();
  s.channel.f_c = ch.at("f_c").get<double>();
  s.channel.c = ch.at("c").get<double>();
  s.channel.d0 = ch.at("d0").get<double>();
  s.channel.g_tx = ch.at("g_tx").get<double>();
  s.channel.g_rx = ch.at("g_rx").get<double>();
  s.channel.g_mtx = ch.at("g_mtx").get<double>();
  s.channel.g_mrx = ch.at("g_mrx").get<double>();
  const auto& sy = j.at("system");
  s.system.bandwidth_w = sy.at("bandwidth_w").get<double>();
  s.system.n_subchannels = sy.at("n_subchannels").get<int>();
  s.system.noise_per_sc = sy.at("noise_per_sc").get<double>();
  s.system.mbs_power_per_sc = sy.at("mbs_power_per_sc").get<double>();
  s.system.ubs_altitude = sy.at("ubs_altitude").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline nlohmann::json algo_config_to_json(const AlgoConfig& c) {
  return {
      {"r_max", c.r_max},
      {"ee_rel_tol", c.ee_rel_tol},
      {"feas_tol", c.feas_tol},
      {"strict_margin", c.strict_margin},
      {"bnb_gap", c.bnb_gap},
      {"newton_tol", c.newton_tol},
      {"mc_replications", c.mc_replications},
      {"sca_inner_rounds", c.sca_inner_rounds},
  };
}

inline AlgoConfig algo_config_from_json(const nlohmann::json& j) {
  AlgoConfig c;
  if (j.contains("r_max")) c.r_max = j.at("r_max").get<int>();
  if (j.contains("ee_rel_tol")) c.ee_rel_tol = j.at("ee_rel_tol").get<double>();
  if (j.contains("feas_tol")) c.feas_tol = j.at("feas_tol").get<double>();
  if (j.contains("strict_margin")) c.strict_margin = j.at("strict_margin").get<double>();
  if (j.contains("bnb_gap")) c.bnb_gap = j.at("bnb_gap").get<double>();
  if (j.contains("newton_tol")) c.newton_tol = j.at("newton_tol").get<double>();
  if (j.contains("mc_replications")) c.mc_replications = j.at("mc_replications").get<int>();
  if (j.contains("sca_inner_rounds")) c.sca_inner_rounds = j.at("sca_inner_rounds").get<int>();
  if (j.contains("newton_trace_csv")) c.newton_trace_csv = j.at("newton_trace_csv").get<std::string>();
  c.validate();
  return c;
}

}  // namespace uavnoma
