#pragma once

// Power-control step: first-order upper bounds of the concave rate pieces
// at an expansion point, assembly of the resulting convex inner problem,
// and a log-barrier Newton solver producing the next power iterate. Any
// feasible point of the inner problem is feasible for the original
// constraints because the bounds are global.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavnoma/rates.hpp"

namespace uavnoma {

struct FeasibilityRestorationFailed : std::runtime_error {
  explicit FeasibilityRestorationFailed(const std::string& what) : std::runtime_error(what) {}
};

/// First-order expansion data at a power point, per (i, j, n), all in bit/s
/// (levels) and bit/s per W (slopes):
///   B/D: level and reciprocal slope of the full primary argument
///        (own signal + other-cell interference + MBS + noise),
///   E/F: the interference-only analogues,
///   G/H: the total-received analogues used for the secondary bound.
struct TaylorCoeffs {
  int n_ues = 0, n_ubs = 0, n_sc = 0;
  std::vector<double> B, D, E, F, G, H;

  std::size_t idx(int i, int j, int n) const {
    return (static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n;
  }
};

namespace sca_detail {

inline double interference_only_arg(int i, int j, int n, const PowerAlloc& p,
                                    const GainTables& g, const SystemParams& sys) {
  return detail::external_interference(i, j, n, p, g, sys);
}

inline double full_primary_arg(int i, int j, int n, const PowerAlloc& p, const GainTables& g,
                               const SystemParams& sys) {
  return p.p1_at(j, n) * g.at(i, j, n) + interference_only_arg(i, j, n, p, g, sys);
}

inline double total_received_arg(int i, int j, int n, const PowerAlloc& p, const GainTables& g,
                                 const SystemParams& sys) {
  return p.total_at(j, n) * g.at(i, j, n) + interference_only_arg(i, j, n, p, g, sys);
}

}  // namespace sca_detail

inline TaylorCoeffs taylor_coeffs(const PowerAlloc& p_r, const GainTables& g, const Scenario& s) {
  TaylorCoeffs tc;
  tc.n_ues = g.n_ues;
  tc.n_ubs = g.n_ubs;
  tc.n_sc = g.n_sc;
  const std::size_t total = static_cast<std::size_t>(g.n_ues) * g.n_ubs * g.n_sc;
  tc.B.resize(total);
  tc.D.resize(total);
  tc.E.resize(total);
  tc.F.resize(total);
  tc.G.resize(total);
  tc.H.resize(total);
  const double wn = per_sc_bandwidth(s.system);
  const double slope_num = wn * std::log2(std::numbers::e);
  for (int i = 0; i < g.n_ues; ++i)
    for (int j = 0; j < g.n_ubs; ++j)
      for (int n = 0; n < g.n_sc; ++n) {
        const std::size_t k = tc.idx(i, j, n);
        const double full = sca_detail::full_primary_arg(i, j, n, p_r, g, s.system);
        const double ifc = sca_detail::interference_only_arg(i, j, n, p_r, g, s.system);
        const double tot = sca_detail::total_received_arg(i, j, n, p_r, g, s.system);
        tc.B[k] = wn * std::log2(full);
        tc.D[k] = slope_num / full;
        tc.E[k] = wn * std::log2(ifc);
        tc.F[k] = slope_num / ifc;
        tc.G[k] = wn * std::log2(tot);
        tc.H[k] = slope_num / tot;
      }
  return tc;
}

struct BoundCheckReport {
  double max_violation_mbps = 0.0;      // positive when some bound fails
  double max_tightness_gap_mbps = 0.0;  // |bound - function| at the expansion point itself
};

/// Check all four first-order upper bounds at an arbitrary power point P
/// against the expansion at P_r. Values are reported on the Mb/s scale.
inline BoundCheckReport bound_check(const PowerAlloc& p, const PowerAlloc& p_r,
                                    const TaylorCoeffs& tc, const GainTables& g,
                                    const Scenario& s) {
  using namespace sca_detail;
  BoundCheckReport rep;
  const double wn = per_sc_bandwidth(s.system);
  const bool at_expansion = p.p1 == p_r.p1 && p.p2 == p_r.p2;
  for (int i = 0; i < g.n_ues; ++i)
    for (int j = 0; j < g.n_ubs; ++j)
      for (int n = 0; n < g.n_sc; ++n) {
        const std::size_t k = tc.idx(i, j, n);
        double own_delta = g.at(i, j, n) * (p.p1_at(j, n) - p_r.p1_at(j, n));
        double cross_delta = 0.0, all_delta = 0.0;
        for (int c = 0; c < g.n_ubs; ++c) {
          const double d = (p.total_at(c, n) - p_r.total_at(c, n)) * g.at(i, c, n);
          all_delta += d;
          if (c != j) cross_delta += d;
        }
        const double fn_full = wn * std::log2(full_primary_arg(i, j, n, p, g, s.system));
        const double fn_ifc = wn * std::log2(interference_only_arg(i, j, n, p, g, s.system));
        const double fn_tot = wn * std::log2(total_received_arg(i, j, n, p, g, s.system));
        const double bd_full = tc.B[k] + tc.D[k] * (own_delta + cross_delta);
        const double bd_ifc = tc.E[k] + tc.F[k] * cross_delta;
        const double bd_tot = tc.G[k] + tc.H[k] * all_delta;
        // four bounded pieces: the full argument backs both the primary
        // numerator bound and the secondary denominator bound
        for (const auto& [fn, bd] : {std::pair{fn_full, bd_full}, std::pair{fn_full, bd_full},
                                     std::pair{fn_ifc, bd_ifc}, std::pair{fn_tot, bd_tot}}) {
          rep.max_violation_mbps = std::max(rep.max_violation_mbps, (fn - bd) / 1e6);
          if (at_expansion)
            rep.max_tightness_gap_mbps =
                std::max(rep.max_tightness_gap_mbps, std::fabs(fn - bd) / 1e6);
        }
      }
  return rep;
}

/// Convex inner problem in normalized variables: active-subchannel powers
/// (units of the largest transmit budget), then per-UE rate auxiliaries,
/// eta_R and eta_P (Mb/s and power units). Every row is concave of the form
///   sum_k  c_k * ln(a_k . z + b_k)  +  d . z + e  >= 0
/// with positive log coefficients.
struct ConvexProblem {
  struct LogTerm {
    double coeff = 0.0;
    std::vector<std::pair<int, double>> lin;
    double constant = 0.0;
  };
  struct Row {
    std::string tag;
    std::vector<LogTerm> logs;
    std::vector<std::pair<int, double>> lin;
    double constant = 0.0;
    std::vector<int> vars;  // union of variables appearing in the row
  };

  int n_vars = 0;
  int n_power_vars = 0;
  int eta_base = 0;   // first per-UE auxiliary
  int eta_r_var = 0;
  int eta_p_var = 0;
  std::vector<int> pvar_of;  // [(j * n_sc + n) * 2 + slot] -> var index or -1
  int n_ubs = 0, n_sc = 0;
  double power_scale = 1.0;
  double rate_scale = 1e6;
  double eta_ee_norm = 0.0;
  std::vector<double> objective;
  std::vector<Row> rows;

  int pvar(int j, int n, int slot) const {
    return pvar_of[(static_cast<std::size_t>(j) * n_sc + n) * 2 + slot];
  }

  double row_value(const Row& r, const std::vector<double>& z) const {
    double v = r.constant;
    for (const auto& [var, c] : r.lin) v += c * z[var];
    for (const auto& lt : r.logs) {
      double arg = lt.constant;
      for (const auto& [var, c] : lt.lin) arg += c * z[var];
      if (arg <= 0.0) return -std::numeric_limits<double>::infinity();
      v += lt.coeff * std::log(arg);
    }
    return v;
  }

  /// Dense gradient of one row (resized and zeroed inside).
  void row_gradient(const Row& r, const std::vector<double>& z, std::vector<double>& grad) const {
    grad.assign(n_vars, 0.0);
    for (const auto& [var, c] : r.lin) grad[var] += c;
    for (const auto& lt : r.logs) {
      double arg = lt.constant;
      for (const auto& [var, c] : lt.lin) arg += c * z[var];
      for (const auto& [var, c] : lt.lin) grad[var] += lt.coeff * c / arg;
    }
  }
};

namespace sca_detail {

inline void note_var(std::vector<int>& vars, int v) { vars.push_back(v); }

inline void finish_row(ConvexProblem::Row& row) {
  for (const auto& [v, c] : row.lin) row.vars.push_back(v);
  for (const auto& lt : row.logs)
    for (const auto& [v, c] : lt.lin) row.vars.push_back(v);
  std::sort(row.vars.begin(), row.vars.end());
  row.vars.erase(std::unique(row.vars.begin(), row.vars.end()), row.vars.end());
}

}  // namespace sca_detail

/// Assemble the convex inner problem for assignment A at expansion point
/// P_r with the fixed efficiency parameter eta_ee. Only subchannels that
/// serve at least one UE get power variables; the secondary share exists
/// only on pairs. tc must be the expansion at exactly P_r.
inline ConvexProblem build_p7(const Assignment& a, const PowerAlloc& p_r, const TaylorCoeffs& tc,
                              double eta_ee, const GainTables& g, const Scenario& s) {
  ConvexProblem cp;
  cp.n_ubs = a.n_ubs;
  cp.n_sc = a.n_sc;
  cp.power_scale = s.max_tx_budget();
  cp.rate_scale = 1e6;
  cp.eta_ee_norm = eta_ee * cp.power_scale / cp.rate_scale;
  cp.pvar_of.assign(static_cast<std::size_t>(a.n_ubs) * a.n_sc * 2, -1);

  int next = 0;
  for (int j = 0; j < a.n_ubs; ++j)
    for (int n = 0; n < a.n_sc; ++n) {
      const ChannelRole& role = a.role(j, n);
      if (role.kind == RoleKind::Empty) continue;
      cp.pvar_of[(static_cast<std::size_t>(j) * a.n_sc + n) * 2 + 0] = next++;
      if (role.kind == RoleKind::Pair)
        cp.pvar_of[(static_cast<std::size_t>(j) * a.n_sc + n) * 2 + 1] = next++;
    }
  cp.n_power_vars = next;
  cp.eta_base = next;
  cp.eta_r_var = cp.eta_base + a.n_ues;
  cp.eta_p_var = cp.eta_r_var + 1;
  cp.n_vars = cp.eta_p_var + 1;
  cp.objective.assign(cp.n_vars, 0.0);
  cp.objective[cp.eta_r_var] = 1.0;
  cp.objective[cp.eta_p_var] = -cp.eta_ee_norm;

  const double wn = per_sc_bandwidth(s.system);
  const double kappa = wn / (std::numbers::ln2 * cp.rate_scale);
  const double ps = cp.power_scale;
  const double rs = cp.rate_scale;

  // linear forms of the three argument families, in normalized variables
  auto cross_terms = [&](int i, int j_excl, int n, ConvexProblem::LogTerm& lt) {
    for (int k = 0; k < a.n_ubs; ++k) {
      if (k == j_excl) continue;
      for (int slot = 0; slot < 2; ++slot) {
        const int v = cp.pvar(k, n, slot);
        if (v >= 0) lt.lin.push_back({v, g.at(i, k, n) * ps});
      }
    }
  };
  auto const_in = [&](int i, int n) {
    return s.system.mbs_power_per_sc * g.mbs_at(i, n) + s.system.noise_per_sc;
  };
  auto ref_cross = [&](int i, int j_excl, int n) {
    double acc = 0.0;
    for (int k = 0; k < a.n_ubs; ++k)
      if (k != j_excl) acc += p_r.total_at(k, n) * g.at(i, k, n);
    return acc;
  };

  // taylor-affine pieces appended onto row.lin / row.constant
  auto add_ifc_bound = [&](int i, int j, int n, double sign, ConvexProblem::Row& row) {
    const std::size_t k = tc.idx(i, j, n);
    row.constant += sign * (tc.E[k] - tc.F[k] * ref_cross(i, j, n)) / rs;
    for (int c = 0; c < a.n_ubs; ++c) {
      if (c == j) continue;
      for (int slot = 0; slot < 2; ++slot) {
        const int v = cp.pvar(c, n, slot);
        if (v >= 0) row.lin.push_back({v, sign * tc.F[k] * g.at(i, c, n) * ps / rs});
      }
    }
  };
  auto add_full_bound = [&](int i, int j, int n, double sign, ConvexProblem::Row& row) {
    const std::size_t k = tc.idx(i, j, n);
    const double ref = p_r.p1_at(j, n) * g.at(i, j, n) + ref_cross(i, j, n);
    row.constant += sign * (tc.B[k] - tc.D[k] * ref) / rs;
    const int own = cp.pvar(j, n, 0);
    if (own >= 0) row.lin.push_back({own, sign * tc.D[k] * g.at(i, j, n) * ps / rs});
    for (int c = 0; c < a.n_ubs; ++c) {
      if (c == j) continue;
      for (int slot = 0; slot < 2; ++slot) {
        const int v = cp.pvar(c, n, slot);
        if (v >= 0) row.lin.push_back({v, sign * tc.D[k] * g.at(i, c, n) * ps / rs});
      }
    }
  };
  auto add_tot_bound = [&](int i, int j, int n, double sign, ConvexProblem::Row& row) {
    const std::size_t k = tc.idx(i, j, n);
    double ref = 0.0;
    for (int c = 0; c < a.n_ubs; ++c) ref += p_r.total_at(c, n) * g.at(i, c, n);
    row.constant += sign * (tc.G[k] - tc.H[k] * ref) / rs;
    for (int c = 0; c < a.n_ubs; ++c)
      for (int slot = 0; slot < 2; ++slot) {
        const int v = cp.pvar(c, n, slot);
        if (v >= 0) row.lin.push_back({v, sign * tc.H[k] * g.at(i, c, n) * ps / rs});
      }
  };

  // per-UE rate rows: approximate achievable rate minus eta_i
  for (int i = 0; i < a.n_ues; ++i) {
    ConvexProblem::Row row;
    row.tag = "qos_" + std::to_string(i);
    for (int j = 0; j < a.n_ubs; ++j)
      for (int n = 0; n < a.n_sc; ++n) {
        const ChannelRole& role = a.role(j, n);
        if (role.kind == RoleKind::Empty) continue;
        if (role.primary == i) {
          ConvexProblem::LogTerm lt;  // ln of own signal + interference
          lt.coeff = kappa;
          lt.constant = const_in(i, n);
          const int own = cp.pvar(j, n, 0);
          lt.lin.push_back({own, g.at(i, j, n) * ps});
          cross_terms(i, j, n, lt);
          row.logs.push_back(std::move(lt));
          add_ifc_bound(i, j, n, -1.0, row);
        } else if (role.kind == RoleKind::Pair && role.secondary == i) {
          ConvexProblem::LogTerm lt;  // ln of the total received power
          lt.coeff = kappa;
          lt.constant = const_in(i, n);
          for (int slot = 0; slot < 2; ++slot) {
            const int v = cp.pvar(j, n, slot);
            if (v >= 0) lt.lin.push_back({v, g.at(i, j, n) * ps});
          }
          cross_terms(i, j, n, lt);
          row.logs.push_back(std::move(lt));
          add_full_bound(i, j, n, -1.0, row);
        }
      }
    row.lin.push_back({cp.eta_base + i, -1.0});
    sca_detail::finish_row(row);
    cp.rows.push_back(std::move(row));
  }

  // demand and min-rate coupling
  for (int i = 0; i < a.n_ues; ++i) {
    ConvexProblem::Row demand;
    demand.tag = "demand_" + std::to_string(i);
    demand.lin.push_back({cp.eta_base + i, 1.0});
    demand.constant = -s.r_min[i] / rs;
    sca_detail::finish_row(demand);
    cp.rows.push_back(std::move(demand));

    ConvexProblem::Row minrate;
    minrate.tag = "minrate_" + std::to_string(i);
    minrate.lin.push_back({cp.eta_base + i, 1.0});
    minrate.lin.push_back({cp.eta_r_var, -1.0});
    sca_detail::finish_row(minrate);
    cp.rows.push_back(std::move(minrate));
  }

  // per-UBS capacity rows: capacity minus the upper-bounded served load
  for (int j = 0; j < a.n_ubs; ++j) {
    ConvexProblem::Row row;
    row.tag = "capacity_" + std::to_string(j);
    row.constant = s.c_max[j] / rs;
    for (int n = 0; n < a.n_sc; ++n) {
      const ChannelRole& role = a.role(j, n);
      if (role.kind == RoleKind::Empty) continue;
      {
        const int i = role.primary;
        add_full_bound(i, j, n, -1.0, row);
        ConvexProblem::LogTerm lt;  // + ln of the interference-only argument
        lt.coeff = kappa;
        lt.constant = const_in(i, n);
        cross_terms(i, j, n, lt);
        row.logs.push_back(std::move(lt));
      }
      if (role.kind == RoleKind::Pair) {
        const int i = role.secondary;
        add_tot_bound(i, j, n, -1.0, row);
        ConvexProblem::LogTerm lt;  // + ln of own signal + interference
        lt.coeff = kappa;
        lt.constant = const_in(i, n);
        const int own = cp.pvar(j, n, 0);
        lt.lin.push_back({own, g.at(i, j, n) * ps});
        cross_terms(i, j, n, lt);
        row.logs.push_back(std::move(lt));
      }
    }
    sca_detail::finish_row(row);
    cp.rows.push_back(std::move(row));
  }

  // per-UBS power accounting: eta_P cover and the hard cap
  for (int j = 0; j < a.n_ubs; ++j) {
    ConvexProblem::Row cover;
    cover.tag = "eta_p_" + std::to_string(j);
    cover.lin.push_back({cp.eta_p_var, 1.0});
    cover.constant = -s.p_circuit[j] / ps;
    ConvexProblem::Row cap;
    cap.tag = "power_cap_" + std::to_string(j);
    cap.constant = (s.p_max[j] - s.p_circuit[j]) / ps;
    for (int n = 0; n < a.n_sc; ++n)
      for (int slot = 0; slot < 2; ++slot) {
        const int v = cp.pvar(j, n, slot);
        if (v < 0) continue;
        cover.lin.push_back({v, -1.0});
        cap.lin.push_back({v, -1.0});
      }
    sca_detail::finish_row(cover);
    sca_detail::finish_row(cap);
    cp.rows.push_back(std::move(cover));
    cp.rows.push_back(std::move(cap));
  }

  // loose ceiling keeping eta_P bounded even with a zero efficiency weight
  {
    double p_cap = 0.0;
    for (int j = 0; j < a.n_ubs; ++j) p_cap = std::max(p_cap, s.p_max[j]);
    ConvexProblem::Row row;
    row.tag = "power_ceiling";
    row.constant = 1.1 * p_cap / ps;
    row.lin.push_back({cp.eta_p_var, -1.0});
    sca_detail::finish_row(row);
    cp.rows.push_back(std::move(row));
  }

  // pair ordering and nonnegativity
  for (int j = 0; j < a.n_ubs; ++j)
    for (int n = 0; n < a.n_sc; ++n) {
      const int v2 = cp.pvar(j, n, 1);
      if (v2 < 0) continue;
      ConvexProblem::Row row;
      row.tag = "pair_order_" + std::to_string(j) + "_" + std::to_string(n);
      row.lin.push_back({cp.pvar(j, n, 0), -1.0});
      row.lin.push_back({v2, 1.0});
      sca_detail::finish_row(row);
      cp.rows.push_back(std::move(row));
    }
  for (int v = 0; v < cp.n_power_vars; ++v) {
    ConvexProblem::Row row;
    row.tag = "nonneg_" + std::to_string(v);
    row.lin.push_back({v, 1.0});
    sca_detail::finish_row(row);
    cp.rows.push_back(std::move(row));
  }
  return cp;
}

struct BarrierResult {
  bool converged = false;
  std::vector<double> z;
  double objective = 0.0;      // normalized c . z
  double kkt_residual = 0.0;   // stationarity residual of the final iterate
  double duality_measure = 0.0;
  int newton_iters = 0;
  int outer_rounds = 0;
};

namespace sca_detail {

/// Dense Cholesky solve with escalating ridge regularization.
inline bool solve_spd(std::vector<double> h, std::vector<double> rhs, int n,
                      std::vector<double>& x) {
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(h[i * n + i]));
  for (double ridge = 0.0; ridge <= scale * 1e-4 + 1e-30;
       ridge = ridge == 0.0 ? scale * 1e-14 + 1e-300 : ridge * 100.0) {
    std::vector<double> l = h;
    for (int i = 0; i < n; ++i) l[i * n + i] += ridge;
    bool ok = true;
    for (int c = 0; c < n && ok; ++c) {
      double d = l[c * n + c];
      for (int k = 0; k < c; ++k) d -= l[c * n + k] * l[c * n + k];
      if (d <= 0.0) {
        ok = false;
        break;
      }
      d = std::sqrt(d);
      l[c * n + c] = d;
      for (int r = c + 1; r < n; ++r) {
        double v = l[r * n + c];
        for (int k = 0; k < c; ++k) v -= l[r * n + k] * l[c * n + k];
        l[r * n + c] = v / d;
      }
    }
    if (!ok) continue;
    x = rhs;
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < r; ++k) x[r] -= l[r * n + k] * x[k];
      x[r] /= l[r * n + r];
    }
    for (int r = n - 1; r >= 0; --r) {
      for (int k = r + 1; k < n; ++k) x[r] -= l[k * n + r] * x[k];
      x[r] /= l[r * n + r];
    }
    return true;
  }
  return false;
}

}  // namespace sca_detail

/// Path-following log barrier with damped Newton steps. The start point
/// must be strictly feasible. The barrier parameter grows tenfold per
/// round until the duality measure n_rows / t drops below tol.
inline BarrierResult barrier_maximize(const ConvexProblem& cp, std::vector<double> z,
                                      double tol, std::ostream* trace = nullptr) {
  BarrierResult res;
  const int n = cp.n_vars;
  const int m = static_cast<int>(cp.rows.size());
  for (const auto& row : cp.rows)
    if (cp.row_value(row, z) <= 0.0) return res;  // not strictly feasible

  std::vector<double> grad(n), hess(static_cast<std::size_t>(n) * n), step(n), gr(n);

  // the linear objective is measured against a per-round reference so that
  // t * (c.z - c.z_ref) stays well inside double precision at large t
  std::vector<double> z_ref = z;
  auto barrier_value = [&](const std::vector<double>& pt, double t, bool& ok) {
    double phi = 0.0;
    for (int v = 0; v < n; ++v) phi -= t * cp.objective[v] * (pt[v] - z_ref[v]);
    for (const auto& row : cp.rows) {
      const double val = cp.row_value(row, pt);
      if (val <= 0.0) {
        ok = false;
        return 0.0;
      }
      phi -= std::log(val);
    }
    ok = true;
    return phi;
  };

  double t = 1.0;
  double t_certified = 0.0;
  double lambda_certified = 0.0;
  const int max_outer = 64;
  bool stalled = false;
  for (int outer = 0; outer < max_outer && !stalled; ++outer) {
    // centering at this t; the first approach from the warm start may need
    // far more steps than the later path-following rounds
    z_ref = z;
    double lambda2_end = std::numeric_limits<double>::infinity();
    const int inner_cap = outer == 0 ? 200 : 40;
    for (int inner = 0; inner < inner_cap; ++inner) {
      std::fill(grad.begin(), grad.end(), 0.0);
      std::fill(hess.begin(), hess.end(), 0.0);
      for (int v = 0; v < n; ++v) grad[v] -= t * cp.objective[v];
      for (const auto& row : cp.rows) {
        const double val = cp.row_value(row, z);
        cp.row_gradient(row, z, gr);
        const double inv = 1.0 / val;
        for (int a : row.vars) grad[a] -= gr[a] * inv;
        for (int a : row.vars)
          for (int b : row.vars) hess[static_cast<std::size_t>(a) * n + b] += gr[a] * gr[b] * inv * inv;
        for (const auto& lt : row.logs) {
          double arg = lt.constant;
          for (const auto& [var, c] : lt.lin) arg += c * z[var];
          const double w = lt.coeff / (arg * arg) * inv;
          for (const auto& [va, ca] : lt.lin)
            for (const auto& [vb, cb] : lt.lin)
              hess[static_cast<std::size_t>(va) * n + vb] += w * ca * cb;
        }
      }
      std::vector<double> rhs(n);
      for (int v = 0; v < n; ++v) rhs[v] = -grad[v];
      if (!sca_detail::solve_spd(hess, rhs, n, step)) break;
      double lambda2 = 0.0;
      for (int v = 0; v < n; ++v) lambda2 += -grad[v] * step[v];
      ++res.newton_iters;
      if (lambda2 < 0.0) break;  // numerical loss of positive definiteness
      lambda2_end = lambda2;
      if (lambda2 * 0.5 <= 1e-10) break;

      bool ok = false;
      const double phi0 = barrier_value(z, t, ok);
      double slope = 0.0;
      for (int v = 0; v < n; ++v) slope += grad[v] * step[v];
      double alpha = 1.0;
      std::vector<double> trial(n);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (int v = 0; v < n; ++v) trial[v] = z[v] + alpha * step[v];
        bool tok = false;
        const double phi1 = barrier_value(trial, t, tok);
        if (tok && phi1 <= phi0 + 0.25 * alpha * slope) {
          z = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        stalled = true;  // no descent possible: stop escalating the barrier
        break;
      }
    }
    res.outer_rounds = outer + 1;
    if (trace) {
      double obj = 0.0;
      for (int v = 0; v < n; ++v) obj += cp.objective[v] * z[v];
      (*trace) << outer << "," << t << "," << static_cast<double>(m) / t << "," << obj << "\n";
    }
    // within the quadratic-convergence region the m/t gap estimate holds;
    // once rounds stop certifying, larger t cannot improve the certificate
    if (lambda2_end <= 1e-4) {
      t_certified = t;
      lambda_certified = std::sqrt(std::max(lambda2_end, 0.0));
    } else {
      break;
    }
    if (static_cast<double>(m) / t <= tol) break;
    t *= 10.0;
  }
  if (t_certified <= 0.0) return res;  // never centered: report failure

  // certified suboptimality of the returned point on the normalized
  // objective: m/t at the last centered parameter, inflated by the Newton
  // decrement there
  res.duality_measure = static_cast<double>(m) / t_certified;
  res.kkt_residual = res.duality_measure * (1.0 + lambda_certified);
  res.converged = res.duality_measure <= tol * (1.0 + 1e-9);
  res.z = std::move(z);
  res.objective = 0.0;
  for (int v = 0; v < n; ++v) res.objective += cp.objective[v] * res.z[v];
  return res;
}

/// Max-relative mismatch between analytic row gradients and central finite
/// differences at z.
inline double max_gradient_error(const ConvexProblem& cp, const std::vector<double>& z,
                                 double h = 1e-6) {
  double worst = 0.0;
  std::vector<double> gr;
  std::vector<double> zp = z, zm = z;
  for (const auto& row : cp.rows) {
    cp.row_gradient(row, z, gr);
    for (int v : row.vars) {
      zp[v] = z[v] + h;
      zm[v] = z[v] - h;
      const double fp = cp.row_value(row, zp);
      const double fm = cp.row_value(row, zm);
      zp[v] = z[v];
      zm[v] = z[v];
      if (!std::isfinite(fp) || !std::isfinite(fm)) continue;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::fabs(fd - gr[v]) / std::max(1.0, std::fabs(gr[v])));
    }
  }
  return worst;
}

struct ConvexOutcome {
  PowerAlloc power;
  BarrierResult barrier;
  bool restored = false;  // a phase-I shift was needed to open the interior
};

namespace sca_detail {

/// Extract the power matrix from a solution vector.
inline PowerAlloc powers_from_z(const ConvexProblem& cp, const std::vector<double>& z) {
  PowerAlloc p = PowerAlloc::zeros(cp.n_ubs, cp.n_sc);
  for (int j = 0; j < cp.n_ubs; ++j)
    for (int n = 0; n < cp.n_sc; ++n) {
      const int v1 = cp.pvar(j, n, 0);
      const int v2 = cp.pvar(j, n, 1);
      if (v1 >= 0) p.p1_at(j, n) = std::max(0.0, z[v1]) * cp.power_scale;
      if (v2 >= 0) p.p2_at(j, n) = std::max(0.0, z[v2]) * cp.power_scale;
    }
  return p;
}

/// Per-UE approximate rate at z, read off the qos rows (their value with
/// the auxiliary zeroed), in normalized units.
inline std::vector<double> rates_from_rows(const ConvexProblem& cp, std::vector<double> z,
                                           int n_ues) {
  for (int i = 0; i < n_ues; ++i) z[cp.eta_base + i] = 0.0;
  std::vector<double> r(n_ues);
  for (int i = 0; i < n_ues; ++i) r[i] = cp.row_value(cp.rows[i], z);
  return r;
}

/// Phase-I problem: maximize a single slack s so that every rate-family row
/// clears its requirement by s. Power-side rows are carried unchanged.
inline ConvexProblem phase1_problem(const ConvexProblem& cp, const Scenario& s, int n_ues) {
  ConvexProblem p1;
  p1.n_ubs = cp.n_ubs;
  p1.n_sc = cp.n_sc;
  p1.power_scale = cp.power_scale;
  p1.rate_scale = cp.rate_scale;
  p1.pvar_of = cp.pvar_of;
  p1.n_power_vars = cp.n_power_vars;
  p1.eta_base = cp.n_power_vars;  // unused, kept consistent
  p1.eta_r_var = cp.n_power_vars;
  p1.eta_p_var = cp.n_power_vars;
  const int s_var = cp.n_power_vars;
  p1.n_vars = s_var + 1;
  p1.objective.assign(p1.n_vars, 0.0);
  p1.objective[s_var] = 1.0;
  for (const auto& row : cp.rows) {
    if (row.tag.starts_with("demand_") || row.tag.starts_with("minrate_")) continue;
    ConvexProblem::Row r;
    r.tag = row.tag;
    r.constant = row.constant;
    r.logs = row.logs;
    for (const auto& [v, c] : row.lin) {
      if (v >= cp.n_power_vars) continue;  // drop auxiliary couplings
      r.lin.push_back({v, c});
    }
    if (row.tag.starts_with("qos_")) {
      const int i = std::stoi(row.tag.substr(4));
      r.constant -= s.r_min[i] / cp.rate_scale;  // rate >= r_min + slack
      r.lin.push_back({s_var, -1.0});
    } else if (row.tag.starts_with("capacity_")) {
      r.lin.push_back({s_var, -1.0});
    }
    r.vars.clear();
    finish_row(r);
    p1.rows.push_back(std::move(r));
  }
  return p1;
}

}  // namespace sca_detail

/// Solve the inner problem from a strictly interior power start. Builds the
/// auxiliary start, runs a phase-I slack maximization if the rate rows have
/// no strict margin, and never returns a point whose normalized objective
/// is below the start's.
inline ConvexOutcome solve_convex(const ConvexProblem& cp, const PowerAlloc& start,
                                  const Scenario& s, const AlgoConfig& cfg,
                                  std::ostream* trace = nullptr) {
  const int n_ues = static_cast<int>(s.r_min.size());
  ConvexOutcome out;
  std::vector<double> z(cp.n_vars, 0.0);
  for (int j = 0; j < cp.n_ubs; ++j)
    for (int n = 0; n < cp.n_sc; ++n) {
      const int v1 = cp.pvar(j, n, 0);
      const int v2 = cp.pvar(j, n, 1);
      if (v1 >= 0) z[v1] = start.p1_at(j, n) / cp.power_scale;
      if (v2 >= 0) z[v2] = start.p2_at(j, n) / cp.power_scale;
    }

  auto aux_start = [&](std::vector<double>& zz) -> bool {
    const std::vector<double> rate = sca_detail::rates_from_rows(cp, zz, n_ues);
    double min_eta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_ues; ++i) {
      const double slack = rate[i] - s.r_min[i] / cp.rate_scale;
      if (slack <= 1e-12) return false;
      // wall distance grows with the available slack but never drops below
      // the configured strict margin
      const double margin = std::min(0.5 * slack, std::max(cfg.strict_margin, 1e-3 * slack));
      zz[cp.eta_base + i] = rate[i] - margin;
      min_eta = std::min(min_eta, zz[cp.eta_base + i]);
    }
    zz[cp.eta_r_var] = min_eta - std::max(cfg.strict_margin, 1e-3 * std::fabs(min_eta));
    double max_power = 0.0;
    for (int j = 0; j < cp.n_ubs; ++j) {
      double pj = s.p_circuit[j] / cp.power_scale;
      for (int n = 0; n < cp.n_sc; ++n)
        for (int slot = 0; slot < 2; ++slot) {
          const int v = cp.pvar(j, n, slot);
          if (v >= 0) pj += zz[v];
        }
      max_power = std::max(max_power, pj);
    }
    zz[cp.eta_p_var] = max_power + std::max(cfg.strict_margin, 1e-3 * max_power);
    // every row must now be strictly positive
    for (const auto& row : cp.rows)
      if (cp.row_value(row, zz) <= 0.0) return false;
    return true;
  };

  if (!aux_start(z)) {
    // phase-I: push the rate rows strictly inside
    const ConvexProblem p1 = sca_detail::phase1_problem(cp, s, n_ues);
    std::vector<double> z1(p1.n_vars, 0.0);
    for (int v = 0; v < cp.n_power_vars; ++v) z1[v] = z[v];
    double worst = std::numeric_limits<double>::infinity();
    {
      std::vector<double> probe = z1;
      probe[p1.n_vars - 1] = 0.0;
      for (const auto& row : p1.rows) {
        bool relaxed = row.tag.starts_with("qos_") || row.tag.starts_with("capacity_");
        if (!relaxed) continue;
        worst = std::min(worst, p1.row_value(row, probe));
      }
    }
    z1[p1.n_vars - 1] = worst - std::max(1e-3, 0.1 * std::fabs(worst));
    const BarrierResult r1 = barrier_maximize(p1, z1, std::max(cfg.newton_tol, 1e-9), nullptr);
    if (!r1.converged || r1.z[p1.n_vars - 1] <= 1e-12)
      throw FeasibilityRestorationFailed(
          "solve_convex: no strictly feasible point for the rate constraints at this expansion");
    out.restored = true;
    for (int v = 0; v < cp.n_power_vars; ++v) z[v] = r1.z[v];
    if (!aux_start(z))
      throw FeasibilityRestorationFailed(
          "solve_convex: restored point still lacks a strict interior");
  }

  const double start_objective = [&] {
    double acc = 0.0;
    for (int v = 0; v < cp.n_vars; ++v) acc += cp.objective[v] * z[v];
    return acc;
  }();

  BarrierResult br = barrier_maximize(cp, z, cfg.newton_tol, trace);
  if (br.z.empty() || br.objective < start_objective) {
    // keep the feasible warm start rather than a failed or worse iterate;
    // an improved iterate is kept even when the gap certificate fell short
    br.z = z;
    br.objective = start_objective;
    br.converged = false;
  }
  out.power = sca_detail::powers_from_z(cp, br.z);
  out.barrier = std::move(br);
  return out;
}

/// One power-control step at fixed assignment and fixed efficiency
/// parameter. The input point is conformed to the assignment, nudged
/// strictly inside the power-side constraints, expanded, solved, and the
/// result is kept only if it improves the true objective
/// eta_R - eta_ee * eta_P; otherwise the conformed input is returned.
/// The returned point always satisfies the unapproximated constraints.
inline PowerAlloc sca_power_step(const Assignment& a, const PowerAlloc& p_r, double eta_ee,
                                 const GainTables& g, const Scenario& s, const AlgoConfig& cfg,
                                 ConvexOutcome* outcome = nullptr) {
  const PowerAlloc reference = conform_power(a, p_r);
  auto true_objective = [&](const PowerAlloc& p) {
    const EvalReport rep = evaluate(a, p, g, s, cfg.feas_tol);
    return rep.eta_r - eta_ee * rep.eta_p;
  };

  PowerAlloc current = reference;
  ConvexOutcome last;
  for (int round = 0; round < cfg.sca_inner_rounds; ++round) {
    // strict interior nudges on the power side; wall distances are kept at
    // ~1e-6 of the budget scale so the barrier Hessian stays conditioned,
    // which shifts rates by amounts far below the audit tolerance
    PowerAlloc p0 = current;
    const double floor_w = 1e-6 * s.max_tx_budget();
    for (int j = 0; j < a.n_ubs; ++j) {
      for (int n = 0; n < a.n_sc; ++n) {
        const ChannelRole& role = a.role(j, n);
        if (role.kind == RoleKind::Empty) continue;
        p0.p1_at(j, n) = std::max(p0.p1_at(j, n), floor_w);
        if (role.kind == RoleKind::Pair) {
          p0.p2_at(j, n) = std::max(p0.p2_at(j, n), 2.0 * floor_w);
          const double total = p0.total_at(j, n);
          const double cap1 = 0.5 * total * (1.0 - 1e-4);
          if (p0.p1_at(j, n) >= cap1) {
            p0.p1_at(j, n) = cap1;
            p0.p2_at(j, n) = total - cap1;
          }
        }
      }
      const double budget = s.p_max[j] - s.p_circuit[j];
      const double used = p0.ubs_total(j);
      if (used >= budget * (1.0 - 1e-6) && used > 0.0) {
        const double shrink = budget * (1.0 - 1e-5) / used;
        for (int n = 0; n < a.n_sc; ++n) {
          p0.p1_at(j, n) *= shrink;
          p0.p2_at(j, n) *= shrink;
        }
      }
    }

    const TaylorCoeffs tc = taylor_coeffs(p0, g, s);
    const ConvexProblem cp = build_p7(a, p0, tc, eta_ee, g, s);
    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (!cfg.newton_trace_csv.empty()) {
      trace_file.open(cfg.newton_trace_csv, std::ios::app);
      trace = &trace_file;
    }
    last = solve_convex(cp, p0, s, cfg, trace);
    current = last.power;
  }

  PowerAlloc result = conform_power(a, current);
  if (true_objective(result) < true_objective(reference)) result = reference;

  const EvalReport audit = evaluate(a, result, g, s, cfg.feas_tol);
  if (!audit.feasible())
    throw std::logic_error("sca_power_step: output failed the constraint audit");
  if (outcome) *outcome = std::move(last);
  return result;
}

}  // namespace uavnoma
