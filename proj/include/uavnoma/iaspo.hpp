#pragma once

// Outer loop: alternating association/subchannel optimization and power
// control with the efficiency ratio as a parametric (Dinkelbach-style)
// objective, plus the association-only and one-UE-per-subchannel baselines.
//
// The recorded per-iteration eta_EE is the end-of-iteration value
// eta_EE(A^(r+1), P^(r+1)). It is non-decreasing by construction:
//  - a proposed association is kept only if it does not lower eta_R at the
//    current powers (the guard), and only if re-conforming the powers to it
//    does not lower eta_EE (otherwise the previous state is retained);
//  - the power step never returns a point whose objective
//    eta_R - eta_EE * eta_P is below its feasible warm start.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavnoma/assoc.hpp"
#include "uavnoma/scapower.hpp"

namespace uavnoma {

enum class RunStatus : std::uint8_t { Converged, IterationCap, Infeasible };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::IterationCap: return "IterationCap";
    case RunStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

enum class Algorithm : std::uint8_t { Iaspo, Asoo, IaspoFdma };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Iaspo: return "iaspo";
    case Algorithm::Asoo: return "asoo";
    case Algorithm::IaspoFdma: return "iaspo_fdma";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "iaspo") return Algorithm::Iaspo;
  if (s == "asoo") return Algorithm::Asoo;
  if (s == "iaspo_fdma") return Algorithm::IaspoFdma;
  return std::nullopt;
}

struct IterRow {
  int r = 0;
  double eta_r = 0.0;       // bit/s, end of iteration
  double eta_p = 0.0;       // W, end of iteration
  double eta_ee = 0.0;      // bit/s per W, end of iteration
  double f_ee = 0.0;        // (N_u / N_d) * eta_ee
  std::uint64_t a_hash = 0;
  std::uint64_t p_checksum = 0;
  bool guard_triggered = false;
  double wallclock_s = 0.0;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::Iaspo;
  RunStatus status = RunStatus::Infeasible;
  int n_ues = 0, n_ubs = 0;
  std::vector<IterRow> iters;
  double last_eta_ee_param = 0.0;  // Dinkelbach parameter of the final power step
  Assignment final_assignment;
  PowerAlloc final_power;
  EvalReport final_report;

  double final_f_ee() const { return final_report.f_ee; }
};

/// Ratio of the worst per-UE rate to the worst per-UBS power draw.
inline double eta_ee(const Assignment& a, const PowerAlloc& p, const GainTables& g,
                     const Scenario& s) {
  return evaluate(a, p, g, s).eta_ee;
}

enum class PowerInitMode : std::uint8_t { Noma, Fdma };

/// Uniform starting powers: with pairing both shares get a quarter of the
/// per-subchannel budget split, without pairing the single share gets half.
inline PowerAlloc initial_power(const Scenario& s, PowerInitMode mode) {
  PowerAlloc p = PowerAlloc::zeros(s.n_ubs(), s.system.n_subchannels);
  for (int j = 0; j < s.n_ubs(); ++j) {
    const double budget = s.p_max[j] - s.p_circuit[j];
    for (int n = 0; n < s.system.n_subchannels; ++n) {
      if (mode == PowerInitMode::Noma) {
        p.p1_at(j, n) = budget / (4.0 * s.system.n_subchannels);
        p.p2_at(j, n) = p.p1_at(j, n);
      } else {
        p.p1_at(j, n) = budget / (2.0 * s.system.n_subchannels);
      }
    }
  }
  return p;
}

namespace iaspo_detail {

inline bool rate_feasible(const EvalReport& rep) {
  for (const auto& v : rep.violations)
    if (v.id == "C5" || v.id == "C6") return false;
  return true;
}

/// Conform powers to the assignment, then scale down any UBS pushed over
/// its capacity by the interference drop. Switching unused shares off can
/// only raise rates, so demand stays satisfied unless the scaling itself
/// starves a UE; that case is reported as failure.
inline std::optional<PowerAlloc> rate_safe_conform(const Assignment& a, const PowerAlloc& p,
                                                   const GainTables& g, const Scenario& s,
                                                   double feas_tol) {
  PowerAlloc out = conform_power(a, p);
  for (int round = 0; round < 10; ++round) {
    const EvalReport rep = evaluate(a, out, g, s, feas_tol);
    int worst = -1;
    double worst_mag = 0.0;
    for (const auto& v : rep.violations)
      if (v.id == "C6" && v.magnitude > worst_mag) {
        worst = v.index;
        worst_mag = v.magnitude;
      }
    if (worst < 0) break;
    // bisect a scale factor for this UBS until its load fits
    double lo = 0.0, hi = 1.0;
    PowerAlloc base = out;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      PowerAlloc test = base;
      for (int n = 0; n < s.system.n_subchannels; ++n) {
        test.p1_at(worst, n) *= mid;
        test.p2_at(worst, n) *= mid;
      }
      const EvalReport r = evaluate(a, test, g, s, feas_tol);
      if (r.load_per_ubs[worst] <= s.c_max[worst] * (1.0 - 1e-9))
        lo = mid;
      else
        hi = mid;
    }
    for (int n = 0; n < s.system.n_subchannels; ++n) {
      out.p1_at(worst, n) *= lo;
      out.p2_at(worst, n) *= lo;
    }
  }
  const EvalReport final_rep = evaluate(a, out, g, s, feas_tol);
  if (!rate_feasible(final_rep)) return std::nullopt;
  return out;
}

struct EngineOptions {
  AccessMode mode = AccessMode::Noma;
  PowerInitMode init = PowerInitMode::Noma;
  bool optimize_power = true;
  int max_iterations = -1;  // -1: use cfg.r_max
};

inline RunRecord run_engine(const Scenario& s, const AlgoConfig& cfg, const GainTables& g,
                            Algorithm tag, const EngineOptions& opt) {
  s.validate();
  cfg.validate();
  RunRecord rec;
  rec.algorithm = tag;
  rec.n_ues = s.n_ues();
  rec.n_ubs = s.n_ubs();
  rec.status = RunStatus::IterationCap;

  PowerAlloc p_cur = initial_power(s, opt.init);
  Assignment a_cur;
  bool have_state = false;
  double v_prev = 0.0;
  const int iter_cap = opt.max_iterations > 0 ? opt.max_iterations : cfg.r_max;

  for (int r = 0; r < iter_cap; ++r) {
    const auto tick = std::chrono::steady_clock::now();
    bool guard = false;

    Assignment a_new;
    const TwoStageResult ts = run_two_stage(p_cur, g, s, cfg, opt.mode);
    if (ts.status != SolveStatus::Optimal) {
      if (!have_state) {
        rec.status = RunStatus::Infeasible;
        return rec;
      }
      a_new = a_cur;  // demand became unsatisfiable at these powers; keep the last association
      guard = true;
    } else {
      a_new = ts.assignment;
      if (have_state) {
        const double eta_r_new = evaluate(a_new, p_cur, g, s, cfg.feas_tol).eta_r;
        const double eta_r_old = evaluate(a_cur, p_cur, g, s, cfg.feas_tol).eta_r;
        if (eta_r_new < eta_r_old) {
          a_new = a_cur;
          guard = true;
        }
      }
    }

    // powers consistent with the accepted association
    PowerAlloc p_ws = PowerAlloc::zeros(p_cur.n_ubs, p_cur.n_sc);
    if (!have_state) {
      const auto safe = rate_safe_conform(a_new, p_cur, g, s, cfg.feas_tol);
      if (!safe) {
        rec.status = RunStatus::Infeasible;
        return rec;
      }
      p_ws = *safe;
    } else {
      p_ws = conform_power(a_new, p_cur);
      const EvalReport probe = evaluate(a_new, p_ws, g, s, cfg.feas_tol);
      const EvalReport incumbent = evaluate(a_cur, p_cur, g, s, cfg.feas_tol);
      if (!rate_feasible(probe) || probe.eta_ee < incumbent.eta_ee) {
        a_new = a_cur;
        p_ws = p_cur;
        guard = true;
      }
    }

    const double anchor = evaluate(a_new, p_ws, g, s, cfg.feas_tol).eta_ee;
    rec.last_eta_ee_param = anchor;

    PowerAlloc p_next = p_ws;
    if (opt.optimize_power) {
      try {
        p_next = sca_power_step(a_new, p_ws, anchor, g, s, cfg);
      } catch (const FeasibilityRestorationFailed&) {
        p_next = p_ws;  // no progress this round; the loop state stays feasible
      }
    }

    const EvalReport end_rep = evaluate(a_new, p_next, g, s, cfg.feas_tol);
    IterRow row;
    row.r = r;
    row.eta_r = end_rep.eta_r;
    row.eta_p = end_rep.eta_p;
    row.eta_ee = end_rep.eta_ee;
    row.f_ee = end_rep.f_ee;
    row.a_hash = a_new.hash();
    row.p_checksum = p_next.checksum();
    row.guard_triggered = guard;
    row.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    rec.iters.push_back(row);

    const bool settled =
        have_state &&
        std::fabs(end_rep.eta_ee - v_prev) <= cfg.ee_rel_tol * std::max(v_prev, 1e-12) &&
        std::fabs(end_rep.eta_ee - anchor) <= cfg.ee_rel_tol * std::max(anchor, 1e-12);
    a_cur = a_new;
    p_cur = p_next;
    have_state = true;
    v_prev = end_rep.eta_ee;
    if (settled) {
      rec.status = RunStatus::Converged;
      break;
    }
  }

  if (opt.max_iterations == 1) rec.status = RunStatus::Converged;  // one-shot baseline
  rec.final_assignment = a_cur;
  rec.final_power = p_cur;
  rec.final_report = evaluate(a_cur, p_cur, g, s, cfg.feas_tol);
  return rec;
}

}  // namespace iaspo_detail

/// Full alternating optimization.
inline RunRecord run_iaspo(const Scenario& s, const AlgoConfig& cfg, const GainTables& g) {
  iaspo_detail::EngineOptions opt;
  return iaspo_detail::run_engine(s, cfg, g, Algorithm::Iaspo, opt);
}

/// Association and subchannel optimization only, at the initial powers.
inline RunRecord run_asoo(const Scenario& s, const AlgoConfig& cfg, const GainTables& g) {
  iaspo_detail::EngineOptions opt;
  opt.optimize_power = false;
  opt.max_iterations = 1;
  return iaspo_detail::run_engine(s, cfg, g, Algorithm::Asoo, opt);
}

/// Alternating optimization with at most one UE per subchannel.
inline RunRecord run_iaspo_fdma(const Scenario& s, const AlgoConfig& cfg, const GainTables& g) {
  iaspo_detail::EngineOptions opt;
  opt.mode = AccessMode::Fdma;
  opt.init = PowerInitMode::Fdma;
  return iaspo_detail::run_engine(s, cfg, g, Algorithm::IaspoFdma, opt);
}

inline RunRecord run_algorithm(Algorithm a, const Scenario& s, const AlgoConfig& cfg,
                               const GainTables& g) {
  switch (a) {
    case Algorithm::Iaspo: return run_iaspo(s, cfg, g);
    case Algorithm::Asoo: return run_asoo(s, cfg, g);
    case Algorithm::IaspoFdma: return run_iaspo_fdma(s, cfg, g);
  }
  throw std::logic_error("run_algorithm: unknown algorithm");
}

// ---------------------------------------------------------------------------
// serialization

/// Full record. Wallclock columns can be omitted so that archived outputs
/// of deterministic pipelines stay byte-identical across reruns.
inline nlohmann::json to_json(const RunRecord& r, bool include_wallclock = true) {
  nlohmann::json j;
  j["algorithm"] = to_string(r.algorithm);
  j["status"] = to_string(r.status);
  j["n_ues"] = r.n_ues;
  j["n_ubs"] = r.n_ubs;
  j["last_eta_ee_param"] = r.last_eta_ee_param;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : r.iters) {
    nlohmann::json row{
        {"r", it.r},
        {"eta_r", it.eta_r},
        {"eta_p", it.eta_p},
        {"eta_ee", it.eta_ee},
        {"f_ee", it.f_ee},
        {"a_hash", it.a_hash},
        {"p_checksum", it.p_checksum},
        {"guard_triggered", it.guard_triggered},
    };
    if (include_wallclock) row["wallclock_s"] = it.wallclock_s;
    j["iterations"].push_back(std::move(row));
  }
  if (r.status != RunStatus::Infeasible) {
    j["solution"] = solution_to_json(r.final_assignment, r.final_power);
    j["final_report"] = to_json(r.final_report);
  }
  return j;
}

/// One row per iteration: r, eta_R in Mb/s, eta_P in W, f_EE, guard flag.
inline void write_run_csv(std::ostream& os, const RunRecord& r) {
  os << "r,eta_R_mbps,eta_P_w,f_ee,guard\n";
  char buf[160];
  for (const auto& it : r.iters) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%d\n", it.r, it.eta_r / 1e6, it.eta_p,
                  it.f_ee, it.guard_triggered ? 1 : 0);
    os << buf;
  }
}

}  // namespace uavnoma
