#pragma once

// Scenario generation, the Monte-Carlo campaign runner, and plot-ready
// result emission. Reproducibility rests on SplitMix64: a fixed, portable
// generator, so identical (spec, seed) inputs give byte-identical outputs
// on every platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavnoma/iaspo.hpp"

namespace uavnoma {

/// SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, one round of mixing
/// per draw. Doubles take the top 53 bits, uniform on [0, 1).
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  SplitMix64 g(base ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xBF58476D1CE4E5B9ull) ^
               (c * 0x94D049BB133111EBull));
  return g.next();
}

inline constexpr double kAnnulusInnerM = 250.0;
inline constexpr double kAnnulusOuterM = 500.0;
inline constexpr double kDemandLowBps = 1e6;
inline constexpr double kDemandHighBps = 2e6;

/// Draw a scenario: UBSs and UEs area-uniform on the annulus around the
/// MBS at the origin, per-UE demands uniform between the demand bounds,
/// reference system constants everywhere. Deterministic in the seed.
inline Scenario generate_scenario(int n_ues, int n_ubs, std::uint64_t seed) {
  if (n_ues < 1 || n_ubs < 1)
    throw std::invalid_argument("generate_scenario: counts must be >= 1");
  Scenario s;
  s.seed = seed;
  s.mbs_pos = {0.0, 0.0};
  SplitMix64 rng(seed);
  auto draw_point = [&rng] {
    const double r2lo = kAnnulusInnerM * kAnnulusInnerM;
    const double r2hi = kAnnulusOuterM * kAnnulusOuterM;
    const double r = std::sqrt(r2lo + rng.next_double() * (r2hi - r2lo));
    const double ang = 2.0 * std::numbers::pi * rng.next_double();
    return Point{r * std::cos(ang), r * std::sin(ang)};
  };
  for (int j = 0; j < n_ubs; ++j) s.ubs_pos.push_back(draw_point());
  for (int i = 0; i < n_ues; ++i) s.ue_pos.push_back(draw_point());
  for (int i = 0; i < n_ues; ++i)
    s.r_min.push_back(kDemandLowBps + rng.next_double() * (kDemandHighBps - kDemandLowBps));
  s.c_max.assign(n_ubs, 1e8);
  s.p_circuit.assign(n_ubs, dbm_to_watt(20.0));
  s.p_max.assign(n_ubs, dbm_to_watt(24.0));
  s.validate();
  return s;
}

struct CampaignSpec {
  enum class Sweep : std::uint8_t { NUes, NUbs };

  Sweep sweep = Sweep::NUes;
  std::vector<int> sweep_values{4, 6, 8, 10, 12};
  int fixed_value = 4;  // the counterpart count held constant
  int replications = 30;
  std::vector<Algorithm> algorithms{Algorithm::Iaspo, Algorithm::Asoo, Algorithm::IaspoFdma};
  std::uint64_t base_seed = 1;

  void validate() const {
    if (replications < 1) throw std::invalid_argument("CampaignSpec.replications: must be >= 1");
    if (sweep_values.empty())
      throw std::invalid_argument("CampaignSpec.sweep_values: must be non-empty");
    for (int v : sweep_values)
      if (v < 1) throw std::invalid_argument("CampaignSpec.sweep_values: must be positive");
    if (fixed_value < 1) throw std::invalid_argument("CampaignSpec.fixed_value: must be >= 1");
    if (algorithms.empty())
      throw std::invalid_argument("CampaignSpec.algorithms: must be non-empty");
  }
};

inline CampaignSpec campaign_spec_from_json(const nlohmann::json& j) {
  CampaignSpec spec;
  if (j.contains("sweep")) {
    const std::string sw = j.at("sweep").get<std::string>();
    if (sw == "n_ues") spec.sweep = CampaignSpec::Sweep::NUes;
    else if (sw == "n_ubs") spec.sweep = CampaignSpec::Sweep::NUbs;
    else throw std::invalid_argument("CampaignSpec.sweep: expected n_ues or n_ubs");
  }
  if (j.contains("sweep_values")) spec.sweep_values = j.at("sweep_values").get<std::vector<int>>();
  if (j.contains("fixed_value")) spec.fixed_value = j.at("fixed_value").get<int>();
  if (j.contains("replications")) spec.replications = j.at("replications").get<int>();
  if (j.contains("base_seed")) spec.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("algorithms")) {
    spec.algorithms.clear();
    for (const auto& name : j.at("algorithms")) {
      const auto a = algorithm_from_string(name.get<std::string>());
      if (!a) throw std::invalid_argument("CampaignSpec.algorithms: unknown algorithm name");
      spec.algorithms.push_back(*a);
    }
  }
  spec.validate();
  return spec;
}

inline nlohmann::json to_json(const CampaignSpec& spec) {
  nlohmann::json j;
  j["sweep"] = spec.sweep == CampaignSpec::Sweep::NUes ? "n_ues" : "n_ubs";
  j["sweep_values"] = spec.sweep_values;
  j["fixed_value"] = spec.fixed_value;
  j["replications"] = spec.replications;
  j["base_seed"] = spec.base_seed;
  j["algorithms"] = nlohmann::json::array();
  for (Algorithm a : spec.algorithms) j["algorithms"].push_back(to_string(a));
  return j;
}

struct CampaignCell {
  int sweep_value = 0;
  Algorithm algorithm = Algorithm::Iaspo;
  std::vector<double> f_ee;         // one entry per replication
  std::vector<std::uint64_t> seeds; // scenario seed used per replication
  double mean_f_ee = 0.0;
  double std_f_ee = 0.0;
  int resamples = 0;
  bool aborted = false;
};

struct RawRunEntry {
  int sweep_value = 0;
  int replication = 0;
  std::uint64_t scenario_seed = 0;
  RunRecord record;
};

struct CampaignResult {
  CampaignSpec spec;
  std::vector<CampaignCell> cells;  // sweep-major, algorithm-minor
  std::vector<RawRunEntry> raw;

  const CampaignCell& cell(int sweep_value, Algorithm a) const {
    for (const auto& c : cells)
      if (c.sweep_value == sweep_value && c.algorithm == a) return c;
    throw std::out_of_range("CampaignResult: no such cell");
  }
};

/// Run every requested algorithm on shared per-replication scenarios.
/// Scenarios on which any requested algorithm is infeasible are resampled
/// with a derived seed and counted; a sweep point is abandoned only after
/// 10x replications consecutive failures. Every kept run must pass the
/// constraint audit.
inline CampaignResult run_campaign(const CampaignSpec& spec, const AlgoConfig& cfg) {
  spec.validate();
  cfg.validate();
  CampaignResult result;
  result.spec = spec;

  for (std::size_t sv = 0; sv < spec.sweep_values.size(); ++sv) {
    const int value = spec.sweep_values[sv];
    const int n_ues = spec.sweep == CampaignSpec::Sweep::NUes ? value : spec.fixed_value;
    const int n_ubs = spec.sweep == CampaignSpec::Sweep::NUes ? spec.fixed_value : value;

    std::vector<CampaignCell> group;
    for (Algorithm a : spec.algorithms)
      group.push_back(CampaignCell{value, a, {}, {}, 0.0, 0.0, 0, false});

    int consecutive_failures = 0;
    std::uint64_t attempt = 0;
    bool aborted = false;
    for (int rep = 0; rep < spec.replications && !aborted; ++rep) {
      for (;;) {
        const std::uint64_t seed = derive_seed(spec.base_seed, sv, rep, attempt);
        ++attempt;
        const Scenario scen = generate_scenario(n_ues, n_ubs, seed);
        const GainTables g = build_gain_tables(scen);
        std::vector<RunRecord> recs;
        bool all_ok = true;
        for (Algorithm a : spec.algorithms) {
          recs.push_back(run_algorithm(a, scen, cfg, g));
          if (recs.back().status == RunStatus::Infeasible) {
            all_ok = false;
            break;
          }
        }
        if (!all_ok) {
          for (auto& cell : group) ++cell.resamples;
          if (++consecutive_failures > 10 * spec.replications) {
            aborted = true;
            break;
          }
          continue;
        }
        consecutive_failures = 0;
        for (std::size_t k = 0; k < spec.algorithms.size(); ++k) {
          if (!recs[k].final_report.feasible())
            throw std::runtime_error("run_campaign: run failed the constraint audit (seed " +
                                     std::to_string(seed) + ", algorithm " +
                                     to_string(spec.algorithms[k]) + ")");
          group[k].f_ee.push_back(recs[k].final_report.f_ee);
          group[k].seeds.push_back(seed);
          result.raw.push_back(RawRunEntry{value, rep, seed, std::move(recs[k])});
        }
        break;
      }
    }
    for (auto& cell : group) {
      cell.aborted = aborted && cell.f_ee.empty();
      if (!cell.f_ee.empty()) {
        double sum = 0.0;
        for (double v : cell.f_ee) sum += v;
        cell.mean_f_ee = sum / static_cast<double>(cell.f_ee.size());
        double acc = 0.0;
        for (double v : cell.f_ee) acc += (v - cell.mean_f_ee) * (v - cell.mean_f_ee);
        cell.std_f_ee = cell.f_ee.size() > 1
                            ? std::sqrt(acc / static_cast<double>(cell.f_ee.size() - 1))
                            : 0.0;
      } else {
        cell.mean_f_ee = std::numeric_limits<double>::quiet_NaN();
        cell.std_f_ee = std::numeric_limits<double>::quiet_NaN();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

namespace expcli_detail {

inline std::string fmt9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline double cell_mean(const CampaignResult& res, int value, Algorithm a) {
  for (const auto& c : res.cells)
    if (c.sweep_value == value && c.algorithm == a) return c.mean_f_ee;
  return std::numeric_limits<double>::quiet_NaN();
}

inline const RunRecord* find_raw(const CampaignResult& res, int value, int rep, Algorithm a) {
  for (const auto& e : res.raw)
    if (e.sweep_value == value && e.replication == rep && e.record.algorithm == a)
      return &e.record;
  return nullptr;
}

}  // namespace expcli_detail

inline nlohmann::json to_json(const CampaignResult& res) {
  nlohmann::json j;
  j["spec"] = to_json(res.spec);
  j["cells"] = nlohmann::json::array();
  for (const auto& c : res.cells) {
    j["cells"].push_back({
        {"sweep_value", c.sweep_value},
        {"algorithm", to_string(c.algorithm)},
        {"mean_f_ee", c.mean_f_ee},
        {"std_f_ee", c.std_f_ee},
        {"resamples", c.resamples},
        {"aborted", c.aborted},
        {"f_ee", c.f_ee},
        {"seeds", c.seeds},
    });
  }
  return j;
}

/// Write fig1.csv (per-iteration f_EE of each algorithm on the first kept
/// seed of the first sweep point), the sweep table (fig2.csv for a UE
/// sweep, fig3.csv for a UBS sweep), campaign.json, and the raw run
/// records. Returns the paths written.
inline std::vector<std::string> emit_results(const CampaignResult& res,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "raw", ec);
  if (ec)
    throw std::runtime_error("emit_results: cannot create output directory " + out_dir + ": " +
                             ec.message());
  auto open_out = [](const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("emit_results: cannot open " + path.string());
    return os;
  };
  const std::vector<Algorithm> all{Algorithm::Iaspo, Algorithm::Asoo, Algorithm::IaspoFdma};

  // fig1: iteration series on one seeded run
  {
    const fs::path path = fs::path(out_dir) / "fig1.csv";
    auto os = open_out(path);
    os << "r,iaspo,asoo,iaspo_fdma\n";
    const int v0 = res.spec.sweep_values.front();
    std::size_t depth = 1;
    for (Algorithm a : all) {
      const RunRecord* r = expcli_detail::find_raw(res, v0, 0, a);
      if (r) depth = std::max(depth, r->iters.size());
    }
    for (std::size_t it = 0; it < depth; ++it) {
      os << it;
      for (Algorithm a : all) {
        const RunRecord* r = expcli_detail::find_raw(res, v0, 0, a);
        if (!r || r->iters.empty()) {
          os << ",nan";
          continue;
        }
        const std::size_t k = std::min(it, r->iters.size() - 1);  // one-shot runs hold flat
        os << "," << expcli_detail::fmt9(r->iters[k].f_ee);
      }
      os << "\n";
    }
    written.push_back(path.string());
  }

  // sweep table
  {
    const bool ue_sweep = res.spec.sweep == CampaignSpec::Sweep::NUes;
    const fs::path path = fs::path(out_dir) / (ue_sweep ? "fig2.csv" : "fig3.csv");
    auto os = open_out(path);
    os << "x,iaspo,asoo,iaspo_fdma\n";
    for (int v : res.spec.sweep_values) {
      os << v;
      for (Algorithm a : all) os << "," << expcli_detail::fmt9(expcli_detail::cell_mean(res, v, a));
      os << "\n";
    }
    written.push_back(path.string());
  }

  // machine-readable aggregate and the raw per-seed records
  {
    const fs::path path = fs::path(out_dir) / "campaign.json";
    auto os = open_out(path);
    os << to_json(res).dump(2) << "\n";
    written.push_back(path.string());
  }
  for (const auto& e : res.raw) {
    const fs::path path = fs::path(out_dir) / "raw" /
                          ("run_" + std::to_string(e.sweep_value) + "_" +
                           std::to_string(e.replication) + "_" + to_string(e.record.algorithm) +
                           ".json");
    auto os = open_out(path);
    nlohmann::json j = to_json(e.record, /*include_wallclock=*/false);
    j["scenario_seed"] = e.scenario_seed;
    os << j.dump(2) << "\n";
    written.push_back(path.string());
  }
  return written;
}

}  // namespace uavnoma
