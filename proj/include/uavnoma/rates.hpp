#pragma once

// SINR and rate computation, role resolution on shared subchannels, the
// network-wide evaluation report, and the C1-C9 constraint auditor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavnoma/channel.hpp"
#include "uavnoma/model.hpp"

namespace uavnoma {

enum class RoleKind : std::uint8_t { Empty, Single, Pair };

/// Decoding roles on one (j, n) subchannel. In a Pair the primary is the
/// higher-gain UE (it cancels the secondary's signal); the secondary gets
/// the larger power share.
struct ChannelRole {
  RoleKind kind = RoleKind::Empty;
  int primary = -1;
  int secondary = -1;
};

/// Binary association tensor a[i][j][n] plus the derived per-subchannel roles.
struct Assignment {
  int n_ues = 0;
  int n_ubs = 0;
  int n_sc = 0;
  std::vector<std::uint8_t> a;      // [i][j][n]
  std::vector<ChannelRole> roles;   // [j][n]

  bool serves(int i, int j, int n) const {
    return a[(static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n] != 0;
  }
  std::uint8_t& cell(int i, int j, int n) {
    return a[(static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n];
  }
  std::uint8_t cell(int i, int j, int n) const {
    return a[(static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n];
  }
  const ChannelRole& role(int j, int n) const {
    return roles[static_cast<std::size_t>(j) * n_sc + n];
  }
  ChannelRole& role(int j, int n) { return roles[static_cast<std::size_t>(j) * n_sc + n]; }

  static Assignment empty(int n_ues, int n_ubs, int n_sc) {
    Assignment as;
    as.n_ues = n_ues;
    as.n_ubs = n_ubs;
    as.n_sc = n_sc;
    as.a.assign(static_cast<std::size_t>(n_ues) * n_ubs * n_sc, 0);
    as.roles.assign(static_cast<std::size_t>(n_ubs) * n_sc, ChannelRole{});
    return as;
  }

  /// FNV-1a over the binary tensor; stable across platforms.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t v : a) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Per-(UBS, subchannel) transmit power split: p1 for the primary role,
/// p2 for the secondary role.
struct PowerAlloc {
  int n_ubs = 0;
  int n_sc = 0;
  std::vector<double> p1;  // [j][n]
  std::vector<double> p2;  // [j][n]

  double p1_at(int j, int n) const { return p1[static_cast<std::size_t>(j) * n_sc + n]; }
  double p2_at(int j, int n) const { return p2[static_cast<std::size_t>(j) * n_sc + n]; }
  double& p1_at(int j, int n) { return p1[static_cast<std::size_t>(j) * n_sc + n]; }
  double& p2_at(int j, int n) { return p2[static_cast<std::size_t>(j) * n_sc + n]; }
  double total_at(int j, int n) const { return p1_at(j, n) + p2_at(j, n); }

  double ubs_total(int j) const {
    double t = 0.0;
    for (int n = 0; n < n_sc; ++n) t += total_at(j, n);
    return t;
  }

  static PowerAlloc zeros(int n_ubs, int n_sc) {
    PowerAlloc p;
    p.n_ubs = n_ubs;
    p.n_sc = n_sc;
    p.p1.assign(static_cast<std::size_t>(n_ubs) * n_sc, 0.0);
    p.p2.assign(static_cast<std::size_t>(n_ubs) * n_sc, 0.0);
    return p;
  }

  /// FNV-1a over the IEEE-754 bit patterns, stable across platforms.
  std::uint64_t checksum() const {
    std::uint64_t h = 1469598103934665603ull;
    auto fold = [&h](double d) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(d));
      std::memcpy(&bits, &d, sizeof(bits));
      for (int b = 0; b < 64; b += 8) {
        h ^= (bits >> b) & 0xffu;
        h *= 1099511628211ull;
      }
    };
    for (double d : p1) fold(d);
    for (double d : p2) fold(d);
    return h;
  }
};

struct Violation {
  std::string id;    // "C1" .. "C9"
  int index = 0;     // UE, UBS, or flattened (j, n) index depending on the family
  double magnitude = 0.0;
};

/// Network-wide evaluation at one (assignment, power) point.
struct EvalReport {
  std::vector<double> rate_per_ue;    // R_i, bit/s
  std::vector<double> load_per_ubs;   // served traffic per UBS, bit/s
  std::vector<double> power_per_ubs;  // p_j + p_j^c, W
  double eta_r = 0.0;                 // min_i R_i
  double eta_p = 0.0;                 // max_j (p_j + p_j^c)
  double eta_ee = 0.0;                // eta_r / eta_p
  double f_ee = 0.0;                  // (N_u / N_d) * eta_ee
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
};

/// Resolve per-subchannel decoding roles from a raw binary tensor: the
/// higher-gain UE becomes the primary, ties broken toward the lower UE index.
/// Rejects more than two UEs on one subchannel.
inline Assignment resolve_roles(const Assignment& raw, const GainTables& g) {
  Assignment out = raw;
  for (int j = 0; j < out.n_ubs; ++j) {
    for (int n = 0; n < out.n_sc; ++n) {
      int members[2] = {-1, -1};
      int count = 0;
      for (int i = 0; i < out.n_ues; ++i) {
        if (!out.serves(i, j, n)) continue;
        if (count >= 2)
          throw std::invalid_argument("resolve_roles: more than two UEs on one subchannel");
        members[count++] = i;
      }
      ChannelRole role;
      if (count == 1) {
        role.kind = RoleKind::Single;
        role.primary = members[0];
      } else if (count == 2) {
        role.kind = RoleKind::Pair;
        const double h0 = g.at(members[0], j, n);
        const double h1 = g.at(members[1], j, n);
        // members[] is index-sorted, so equal gains keep the lower index primary
        if (h1 > h0) std::swap(members[0], members[1]);
        role.primary = members[0];
        role.secondary = members[1];
      }
      out.role(j, n) = role;
    }
  }
  return out;
}

namespace detail {

/// Interference at UE i on subchannel n from every UBS except j, plus the
/// MBS contribution and noise. Every other cell contributes p1 + p2 as
/// carried in P, whether or not it serves anyone there.
inline double external_interference(int i, int j, int n, const PowerAlloc& p,
                                    const GainTables& g, const SystemParams& sys) {
  double acc = sys.mbs_power_per_sc * g.mbs_at(i, n) + sys.noise_per_sc;
  for (int k = 0; k < p.n_ubs; ++k) {
    if (k == j) continue;
    acc += p.total_at(k, n) * g.at(i, k, n);
  }
  return acc;
}

}  // namespace detail

/// SINR of a primary-role UE (alone on the subchannel, or the stronger of a
/// pair after SIC).
inline double sinr_primary(int i, int j, int n, const PowerAlloc& p, const GainTables& g,
                           const SystemParams& sys) {
  return p.p1_at(j, n) * g.at(i, j, n) / detail::external_interference(i, j, n, p, g, sys);
}

/// SINR of a secondary-role UE; the co-channel primary signal is not
/// cancelled and adds to the denominator.
inline double sinr_secondary(int i, int j, int n, const PowerAlloc& p, const GainTables& g,
                             const SystemParams& sys) {
  const double den =
      p.p1_at(j, n) * g.at(i, j, n) + detail::external_interference(i, j, n, p, g, sys);
  return p.p2_at(j, n) * g.at(i, j, n) / den;
}

/// Shannon rate over one subchannel, bit/s.
inline double rate_from_sinr(double sinr, const SystemParams& sys) {
  return per_sc_bandwidth(sys) * std::log2(1.0 + sinr);
}

/// Rate of UE i on (j, n) under its resolved role, bit/s. Zero if unserved.
inline double link_rate(int i, int j, int n, const Assignment& a, const PowerAlloc& p,
                        const GainTables& g, const SystemParams& sys) {
  const ChannelRole& role = a.role(j, n);
  if (role.kind == RoleKind::Empty) return 0.0;
  if (role.primary == i) return rate_from_sinr(sinr_primary(i, j, n, p, g, sys), sys);
  if (role.kind == RoleKind::Pair && role.secondary == i)
    return rate_from_sinr(sinr_secondary(i, j, n, p, g, sys), sys);
  return 0.0;
}

/// Switch off power shares no role can use: p2 is cleared off pair
/// subchannels, and a pair whose stored split has p1 > p2 is reordered so
/// the secondary keeps the larger share. Rates and the audit both read the
/// power matrix literally, so feeding a power matrix produced under a
/// different assignment through this first keeps C3/C4 consistent.
inline PowerAlloc conform_power(const Assignment& a, const PowerAlloc& p) {
  PowerAlloc out = p;
  for (int j = 0; j < p.n_ubs; ++j) {
    for (int n = 0; n < p.n_sc; ++n) {
      const ChannelRole& role = a.role(j, n);
      if (role.kind == RoleKind::Pair) {
        const double lo = std::min(out.p1_at(j, n), out.p2_at(j, n));
        const double hi = std::max(out.p1_at(j, n), out.p2_at(j, n));
        out.p1_at(j, n) = lo;
        out.p2_at(j, n) = hi;
      } else {
        if (role.kind == RoleKind::Empty) out.p1_at(j, n) = 0.0;
        out.p2_at(j, n) = 0.0;
      }
    }
  }
  return out;
}

/// Full evaluation: per-UE rates under resolved roles, per-UBS load and
/// power, the max-min efficiency figures, and the C1-C9 audit. Violations
/// are data, not errors; each family is checked at a relative tolerance.
inline EvalReport evaluate(const Assignment& a, const PowerAlloc& p, const GainTables& g,
                           const Scenario& s, double feas_tol = 1e-6) {
  EvalReport rep;
  const int nu = a.n_ues, nd = a.n_ubs, ns = a.n_sc;
  rep.rate_per_ue.assign(nu, 0.0);
  rep.load_per_ubs.assign(nd, 0.0);
  rep.power_per_ubs.assign(nd, 0.0);

  for (int j = 0; j < nd; ++j) {
    for (int n = 0; n < ns; ++n) {
      const ChannelRole& role = a.role(j, n);
      if (role.kind == RoleKind::Empty) continue;
      const double rp = rate_from_sinr(sinr_primary(role.primary, j, n, p, g, s.system), s.system);
      rep.rate_per_ue[role.primary] += rp;
      rep.load_per_ubs[j] += rp;
      if (role.kind == RoleKind::Pair) {
        const double rs =
            rate_from_sinr(sinr_secondary(role.secondary, j, n, p, g, s.system), s.system);
        rep.rate_per_ue[role.secondary] += rs;
        rep.load_per_ubs[j] += rs;
      }
    }
  }
  for (int j = 0; j < nd; ++j) rep.power_per_ubs[j] = p.ubs_total(j) + s.p_circuit[j];

  rep.eta_r = *std::min_element(rep.rate_per_ue.begin(), rep.rate_per_ue.end());
  rep.eta_p = *std::max_element(rep.power_per_ubs.begin(), rep.power_per_ubs.end());
  rep.eta_ee = rep.eta_r / rep.eta_p;
  rep.f_ee = (static_cast<double>(nu) / static_cast<double>(nd)) * rep.eta_ee;

  // Constraint audit. C2 holds structurally (binary storage); C7 is the
  // definition used for power_per_ubs above.
  auto flag = [&rep](const char* id, int index, double magnitude) {
    if (magnitude > 0.0) rep.violations.push_back({id, index, magnitude});
  };
  for (int j = 0; j < nd; ++j) {
    const double pscale = std::max(s.p_max[j], 1e-12);
    for (int n = 0; n < ns; ++n) {
      int cnt = 0;
      for (int i = 0; i < nu; ++i) cnt += a.serves(i, j, n) ? 1 : 0;
      flag("C1", j * ns + n, static_cast<double>(cnt - 2));
      const bool pair = a.role(j, n).kind == RoleKind::Pair;
      if (!pair) flag("C3", j * ns + n, p.p2_at(j, n) - feas_tol * pscale);
      if (pair) flag("C4", j * ns + n, p.p1_at(j, n) - p.p2_at(j, n) - feas_tol * pscale);
      flag("C9", j * ns + n, -(std::min(p.p1_at(j, n), p.p2_at(j, n))) - feas_tol * pscale);
    }
    flag("C6", j, rep.load_per_ubs[j] - s.c_max[j] * (1.0 + feas_tol));
    flag("C8", j, rep.power_per_ubs[j] - s.p_max[j] * (1.0 + feas_tol));
  }
  for (int i = 0; i < nu; ++i)
    flag("C5", i, s.r_min[i] * (1.0 - feas_tol) - rep.rate_per_ue[i]);
  return rep;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["rate_per_ue"] = r.rate_per_ue;
  j["load_per_ubs"] = r.load_per_ubs;
  j["power_per_ubs"] = r.power_per_ubs;
  j["eta_r"] = r.eta_r;
  j["eta_p"] = r.eta_p;
  j["eta_ee"] = r.eta_ee;
  j["f_ee"] = r.f_ee;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back({{"id", v.id}, {"index", v.index}, {"magnitude", v.magnitude}});
  return j;
}

inline nlohmann::json solution_to_json(const Assignment& a, const PowerAlloc& p) {
  nlohmann::json j;
  auto tensor = nlohmann::json::array();
  for (int i = 0; i < a.n_ues; ++i) {
    auto per_ubs = nlohmann::json::array();
    for (int jx = 0; jx < a.n_ubs; ++jx) {
      auto per_sc = nlohmann::json::array();
      for (int n = 0; n < a.n_sc; ++n) per_sc.push_back(static_cast<int>(a.cell(i, jx, n)));
      per_ubs.push_back(per_sc);
    }
    tensor.push_back(per_ubs);
  }
  j["a"] = tensor;
  auto mat = [&](const std::vector<double>& m) {
    auto rows = nlohmann::json::array();
    for (int jx = 0; jx < p.n_ubs; ++jx) {
      auto row = nlohmann::json::array();
      for (int n = 0; n < p.n_sc; ++n) row.push_back(m[static_cast<std::size_t>(jx) * p.n_sc + n]);
      rows.push_back(row);
    }
    return rows;
  };
  j["p1"] = mat(p.p1);
  j["p2"] = mat(p.p2);
  return j;
}

/// Parse a raw solution (no role resolution; caller resolves against gains).
inline std::pair<Assignment, PowerAlloc> solution_from_json(const nlohmann::json& j) {
  const auto& t = j.at("a");
  const int nu = static_cast<int>(t.size());
  const int nd = static_cast<int>(t.at(0).size());
  const int ns = static_cast<int>(t.at(0).at(0).size());
  Assignment a = Assignment::empty(nu, nd, ns);
  for (int i = 0; i < nu; ++i)
    for (int jx = 0; jx < nd; ++jx)
      for (int n = 0; n < ns; ++n)
        a.cell(i, jx, n) = t.at(i).at(jx).at(n).get<int>() != 0 ? 1 : 0;
  PowerAlloc p = PowerAlloc::zeros(nd, ns);
  for (int jx = 0; jx < nd; ++jx)
    for (int n = 0; n < ns; ++n) {
      p.p1_at(jx, n) = j.at("p1").at(jx).at(n).get<double>();
      p.p2_at(jx, n) = j.at("p2").at(jx).at(n).get<double>();
    }
  return {a, p};
}

}  // namespace uavnoma
