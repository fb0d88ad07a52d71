#pragma once

// Air-to-ground and terrestrial channel gains, and the precomputed gain
// tables every SINR computation reads from.

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "uavnoma/model.hpp"

namespace uavnoma {

/// LoS probability of the air-to-ground link for a UBS at altitude H and a
/// UE at horizontal distance d_h. The elevation angle is taken in degrees;
/// directly overhead (d_h = 0) counts as 90 degrees.
inline double los_probability(double altitude_m, double d_horiz_m, const ChannelParams& cp) {
  const double theta_deg = d_horiz_m == 0.0
                               ? 90.0
                               : (180.0 / std::numbers::pi) * std::atan(altitude_m / d_horiz_m);
  return 1.0 / (1.0 + cp.alpha1 * std::exp(-cp.alpha2 * (theta_deg - cp.alpha1)));
}

/// Power gain of the UBS->UE link: free-space term scaled by the
/// probability-weighted LoS/NLoS excess loss.
inline double gain_atg(const Point& ue, const Point& ubs, double altitude_m,
                       const ChannelParams& cp) {
  const double d_h = distance(ue, ubs);
  const double d = std::sqrt(d_h * d_h + altitude_m * altitude_m);
  const double p_los = los_probability(altitude_m, d_h, cp);
  const double wl = cp.wavelength();
  const double free_space =
      (cp.g_tx * cp.g_rx * wl * wl) /
      (16.0 * std::numbers::pi * std::numbers::pi * (d / cp.d0) * (d / cp.d0));
  const double excess_db = p_los * cp.eta_los_db + (1.0 - p_los) * cp.eta_nlos_db;
  return free_space * std::pow(10.0, -excess_db / 10.0);
}

/// Power gain of the MBS->UE link under the plain path-loss model.
/// Distances inside the far-field reference d0 are rejected.
inline double gain_mbs(const Point& ue, const Point& mbs, const ChannelParams& cp) {
  const double d = distance(ue, mbs);
  if (d < cp.d0)
    throw std::domain_error("gain_mbs: UE-MBS distance below far-field reference d0");
  const double wl = cp.wavelength();
  return (cp.g_mtx * cp.g_mrx * wl * wl) /
         (16.0 * std::numbers::pi * std::numbers::pi * std::pow(d / cp.d0, cp.path_loss_exp));
}

/// Precomputed channel gains: h[i][j][n] for UBS links, h_m[i][n] for the
/// MBS link. Entries are constant across n when antenna gains do not depend
/// on the subchannel; the index is kept for fidelity to the data model.
struct GainTables {
  int n_ues = 0;
  int n_ubs = 0;
  int n_sc = 0;
  std::vector<double> h;    // [i][j][n]
  std::vector<double> h_m;  // [i][n]

  double at(int i, int j, int n) const { return h[(static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n]; }
  double& at(int i, int j, int n) { return h[(static_cast<std::size_t>(i) * n_ubs + j) * n_sc + n]; }
  double mbs_at(int i, int n) const { return h_m[static_cast<std::size_t>(i) * n_sc + n]; }
  double& mbs_at(int i, int n) { return h_m[static_cast<std::size_t>(i) * n_sc + n]; }

  static GainTables zeros(int n_ues, int n_ubs, int n_sc) {
    GainTables g;
    g.n_ues = n_ues;
    g.n_ubs = n_ubs;
    g.n_sc = n_sc;
    g.h.assign(static_cast<std::size_t>(n_ues) * n_ubs * n_sc, 0.0);
    g.h_m.assign(static_cast<std::size_t>(n_ues) * n_sc, 0.0);
    return g;
  }
};

inline GainTables build_gain_tables(const Scenario& s) {
  GainTables g = GainTables::zeros(s.n_ues(), s.n_ubs(), s.system.n_subchannels);
  for (int i = 0; i < g.n_ues; ++i) {
    const double hm = gain_mbs(s.ue_pos[i], s.mbs_pos, s.channel);
    for (int n = 0; n < g.n_sc; ++n) g.mbs_at(i, n) = hm;
    for (int j = 0; j < g.n_ubs; ++j) {
      const double hij = gain_atg(s.ue_pos[i], s.ubs_pos[j], s.system.ubs_altitude, s.channel);
      for (int n = 0; n < g.n_sc; ++n) g.at(i, j, n) = hij;
    }
  }
  return g;
}

/// Debug dump, one row per (i, j, n) entry. Not part of the solver contract.
inline void dump_gains_csv(std::ostream& os, const GainTables& g) {
  os << "i,j,n,h\n";
  char buf[64];
  for (int i = 0; i < g.n_ues; ++i)
    for (int j = 0; j < g.n_ubs; ++j)
      for (int n = 0; n < g.n_sc; ++n) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g\n", i, j, n, g.at(i, j, n));
        os << buf;
      }
}

}  // namespace uavnoma
