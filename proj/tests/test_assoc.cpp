#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "uavnoma/assoc.hpp"

using namespace uavnoma;

namespace {

// Synthetic fixture with exact, hand-chosen primary-form rates: one UBS, no
// MBS interference, unit noise and unit power, gains chosen so that
// rate(i, n) = 1e7 * log2(1 + h_in).
struct RateMatrixFixture {
  Scenario s;
  GainTables g;
  PowerAlloc p;

  RateMatrixFixture(const std::vector<std::vector<double>>& rates_mbps, double r_min_mbps,
                    double c_max_mbps) {
    const int nu = static_cast<int>(rates_mbps.size());
    const int ns = static_cast<int>(rates_mbps[0].size());
    s.mbs_pos = {0, 0};
    s.ubs_pos = {{10, 0}};
    s.system.bandwidth_w = 1e7 * ns;
    s.system.n_subchannels = ns;
    s.system.mbs_power_per_sc = 0.0;
    s.system.noise_per_sc = 1.0;
    s.c_max = {c_max_mbps * 1e6};
    s.p_circuit = {0.1};
    s.p_max = {2.0 * ns + 1.0};
    g = GainTables::zeros(nu, 1, ns);
    p = PowerAlloc::zeros(1, ns);
    for (int i = 0; i < nu; ++i) {
      s.ue_pos.push_back({100.0 + i, 0.0});
      s.r_min.push_back(r_min_mbps * 1e6);
      for (int n = 0; n < ns; ++n) g.at(i, 0, n) = std::exp2(rates_mbps[i][n] / 10.0) - 1.0;
    }
    for (int n = 0; n < ns; ++n) {
      p.p1_at(0, n) = 1.0;
      p.p2_at(0, n) = 1.0;  // pairing candidates price with the secondary share
    }
  }
};

// Exhaustive search over one-UE-per-subchannel assignments maximizing the
// minimum per-UE rate subject to demand and capacity.
double brute_force_primary(const PowerAlloc& p, const GainTables& g, const Scenario& s) {
  const int nu = g.n_ues, nd = g.n_ubs, ns = g.n_sc;
  const int cells = nd * ns;
  std::vector<double> r(static_cast<std::size_t>(nu) * cells);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nd; ++j)
      for (int n = 0; n < ns; ++n)
        r[i * cells + j * ns + n] = rate_from_sinr(sinr_primary(i, j, n, p, g, s.system), s.system);

  double best = -1.0;
  std::vector<int> owner(cells, -1);
  std::function<void(int)> rec = [&](int cell) {
    if (cell == cells) {
      std::vector<double> rate(nu, 0.0), load(nd, 0.0);
      for (int c = 0; c < cells; ++c) {
        if (owner[c] < 0) continue;
        rate[owner[c]] += r[owner[c] * cells + c];
        load[c / ns] += r[owner[c] * cells + c];
      }
      for (int i = 0; i < nu; ++i)
        if (rate[i] < s.r_min[i]) return;
      for (int j = 0; j < nd; ++j)
        if (load[j] > s.c_max[j]) return;
      best = std::max(best, *std::min_element(rate.begin(), rate.end()));
      return;
    }
    for (int i = -1; i < nu; ++i) {
      owner[cell] = i;
      rec(cell + 1);
    }
    owner[cell] = -1;
  };
  rec(0);
  return best;
}

// Exhaustive search over at-most-two-UEs-per-subchannel assignments at the
// fixed raw powers, evaluated through the rates module. Feasibility here is
// the association subproblem's: demand (C5) and capacity (C6) only.
double brute_force_joint(const PowerAlloc& p, const GainTables& g, const Scenario& s,
                         double feas_tol) {
  const int nu = g.n_ues, nd = g.n_ubs, ns = g.n_sc;
  const int cells = nd * ns;
  double best = -1.0;
  std::vector<std::pair<int, int>> pick(cells, {-1, -1});
  std::function<void(int)> rec = [&](int cell) {
    if (cell == cells) {
      Assignment raw = Assignment::empty(nu, nd, ns);
      for (int c = 0; c < cells; ++c) {
        if (pick[c].first >= 0) raw.cell(pick[c].first, c / ns, c % ns) = 1;
        if (pick[c].second >= 0) raw.cell(pick[c].second, c / ns, c % ns) = 1;
      }
      const Assignment a = resolve_roles(raw, g);
      const EvalReport rep = evaluate(a, p, g, s, feas_tol);
      for (const auto& v : rep.violations)
        if (v.id == "C5" || v.id == "C6") return;
      best = std::max(best, rep.eta_r);
      return;
    }
    pick[cell] = {-1, -1};
    rec(cell + 1);
    for (int i = 0; i < nu; ++i) {
      pick[cell] = {i, -1};
      rec(cell + 1);
      for (int k = i + 1; k < nu; ++k) {
        pick[cell] = {i, k};
        rec(cell + 1);
      }
    }
    pick[cell] = {-1, -1};
  };
  rec(0);
  return best;
}

Scenario small_random_scenario(int nu, int nd, int ns, unsigned seed) {
  Scenario s;
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  s.mbs_pos = {0, 0};
  s.system.n_subchannels = ns;
  s.system.bandwidth_w = 1e7 * ns;
  for (int j = 0; j < nd; ++j) {
    const double ang = 2 * 3.141592653589793 * u(gen);
    const double rad = 250 + 250 * u(gen);
    s.ubs_pos.push_back({rad * std::cos(ang), rad * std::sin(ang)});
    s.c_max.push_back(1e8);
    s.p_circuit.push_back(0.1);
    s.p_max.push_back(0.251188643150958);
  }
  for (int i = 0; i < nu; ++i) {
    const double ang = 2 * 3.141592653589793 * u(gen);
    const double rad = 250 + 250 * u(gen);
    s.ue_pos.push_back({rad * std::cos(ang), rad * std::sin(ang)});
    s.r_min.push_back((1.0 + u(gen)) * 1e6);
  }
  s.seed = seed;
  return s;
}

PowerAlloc uniform_power(const Scenario& s) {
  PowerAlloc p = PowerAlloc::zeros(s.n_ubs(), s.system.n_subchannels);
  for (int j = 0; j < s.n_ubs(); ++j)
    for (int n = 0; n < s.system.n_subchannels; ++n) {
      p.p1_at(j, n) = (s.p_max[j] - s.p_circuit[j]) / (4.0 * s.system.n_subchannels);
      p.p2_at(j, n) = p.p1_at(j, n);
    }
  return p;
}

}  // namespace

TEST_CASE("forced single assignment") {
  RateMatrixFixture fx({{10.0}}, 1.0, 100.0);
  const MilpSolution sol = solve_milp(build_primary_ilp(fx.p, fx.g, fx.s), 1e-9);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.values[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(10.0).epsilon(1e-7));  // Mb/s
}

TEST_CASE("two-UE rate matrix picks the max-min diagonal") {
  RateMatrixFixture fx({{10.0, 2.0}, {3.0, 9.0}}, 1.0, 100.0);
  const MilpSolution sol = solve_milp(build_primary_ilp(fx.p, fx.g, fx.s), 1e-9);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-7));
  CHECK(sol.objective * 1e6 ==
        doctest::Approx(brute_force_primary(fx.p, fx.g, fx.s)).epsilon(1e-7));
}

TEST_CASE("unreachable demand is infeasible") {
  RateMatrixFixture fx({{10.0, 2.0}, {3.0, 9.0}}, 11.0, 100.0);
  CHECK(solve_milp(build_primary_ilp(fx.p, fx.g, fx.s), 1e-9).status == SolveStatus::Infeasible);
}

TEST_CASE("primary ILP matches brute force on random instances") {
  for (unsigned seed : {11u, 22u, 33u}) {
    const Scenario s = small_random_scenario(3, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    const PowerAlloc p = uniform_power(s);
    const MilpSolution sol = solve_milp(build_primary_ilp(p, g, s), 1e-9);
    const double brute = brute_force_primary(p, g, s);
    if (brute < 0.0) {
      CHECK(sol.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective * 1e6 == doctest::Approx(brute).epsilon(1e-6));
  }
}

TEST_CASE("unoccupied channels open to every UE; occupied ones split by gain") {
  // capacity 19.05 Mb/s: the optimal 10 + 9 fits, adding the 0.2 channel does not
  RateMatrixFixture fx({{10.0, 2.0, 0.2}, {3.0, 9.0, 0.2}}, 0.5, 19.05);
  const MilpSolution primary = solve_milp(build_primary_ilp(fx.p, fx.g, fx.s), 1e-9);
  REQUIRE(primary.status == SolveStatus::Optimal);
  const CandidateSets cs = build_candidate_sets(primary, fx.p, fx.g, fx.s);
  REQUIRE(cs.incumbent_at(0, 2) == -1);
  int unoccupied = 0, stronger = 0, weaker = 0;
  for (const auto& c : cs.candidates) {
    switch (c.cls) {
      case CandidateSets::Class::Unoccupied:
        ++unoccupied;
        CHECK(c.n == 2);  // the only channel left open
        break;
      case CandidateSets::Class::StrongerJoins: ++stronger; break;
      case CandidateSets::Class::WeakerJoins: ++weaker; break;
    }
    if (c.cls != CandidateSets::Class::Unoccupied) CHECK(cs.incumbent_at(c.j, c.n) >= 0);
  }
  CHECK(unoccupied == 2);  // both UEs are candidates for the open channel
  CHECK(stronger + weaker >= 1);
}

TEST_CASE("delta rates match a from-scratch two-regime evaluation") {
  int checked = 0;
  for (unsigned seed : {7u, 12u, 31u, 84u}) {
    const Scenario s = small_random_scenario(3, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    const PowerAlloc p = uniform_power(s);
    const MilpSolution primary = solve_milp(build_primary_ilp(p, g, s), 1e-9);
    if (primary.status != SolveStatus::Optimal) continue;
    const CandidateSets cs = build_candidate_sets(primary, p, g, s);
    const double wn = per_sc_bandwidth(s.system);
    for (const auto& c : cs.candidates) {
      if (c.cls != CandidateSets::Class::StrongerJoins) continue;
      const int ip = cs.incumbent_at(c.j, c.n);
      double ext = s.system.mbs_power_per_sc * g.mbs_at(ip, c.n) + s.system.noise_per_sc;
      for (int k = 0; k < s.n_ubs(); ++k)
        if (k != c.j) ext += (p.p1_at(k, c.n) + p.p2_at(k, c.n)) * g.at(ip, k, c.n);
      const double h = g.at(ip, c.j, c.n);
      const double as_secondary =
          wn * std::log2(1.0 + p.p2_at(c.j, c.n) * h / (p.p1_at(c.j, c.n) * h + ext));
      const double as_primary = wn * std::log2(1.0 + p.p1_at(c.j, c.n) * h / ext);
      CHECK(c.delta_r == doctest::Approx(as_secondary - as_primary).epsilon(1e-12));
      ++checked;
    }
  }
  CHECK(checked >= 1);
}

TEST_CASE("FDMA candidate set stays off occupied channels") {
  RateMatrixFixture fx({{10.0, 2.0}, {3.0, 9.0}}, 1.0, 100.0);
  const MilpSolution primary = solve_milp(build_primary_ilp(fx.p, fx.g, fx.s), 1e-9);
  REQUIRE(primary.status == SolveStatus::Optimal);
  // both subchannels taken at stage 1, so no FDMA candidates remain
  const CandidateSets cs = build_candidate_sets(primary, fx.p, fx.g, fx.s, AccessMode::Fdma);
  CHECK(cs.candidates.empty());
}

TEST_CASE("secondary stage never lowers the primary objective") {
  for (unsigned seed : {5u, 17u, 42u, 91u}) {
    const Scenario s = small_random_scenario(3, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    const PowerAlloc p = uniform_power(s);
    AlgoConfig cfg;
    const TwoStageResult ts = run_two_stage(p, g, s, cfg);
    if (ts.status != SolveStatus::Optimal) continue;
    if (!ts.sets.candidates.empty() && ts.secondary.status == SolveStatus::Optimal)
      CHECK(ts.secondary.objective >= ts.primary.objective - 1e-6);
  }
}

TEST_CASE("two-stage result respects the brute-force landscape") {
  RateMatrixFixture fx({{10.0, 1.0, 0.5}, {0.5, 9.0, 0.5}, {0.5, 6.0, 4.0}}, 0.4, 100.0);
  AlgoConfig cfg;
  const TwoStageResult ts = run_two_stage(fx.p, fx.g, fx.s, cfg);
  REQUIRE(ts.status == SolveStatus::Optimal);
  const double joint = brute_force_joint(fx.p, fx.g, fx.s, cfg.feas_tol);
  CHECK(ts.eta_r <= joint + 1e-6);
  CHECK(ts.eta_r >= ts.primary.objective * 1e6 - 1.0);
  for (int n = 0; n < 3; ++n) {
    int cnt = 0;
    for (int i = 0; i < 3; ++i) cnt += ts.assignment.serves(i, 0, n) ? 1 : 0;
    CHECK(cnt <= 2);
  }
}

TEST_CASE("two-stage value bounded by the joint optimum on seeded instances") {
  int compared = 0;
  for (unsigned seed : {3u, 14u, 59u, 2653u}) {
    const Scenario s = small_random_scenario(3, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    const PowerAlloc p = uniform_power(s);
    AlgoConfig cfg;
    const TwoStageResult ts = run_two_stage(p, g, s, cfg);
    if (ts.status != SolveStatus::Optimal) continue;  // pairing can save instances one-per-channel cannot
    const double joint = brute_force_joint(p, g, s, cfg.feas_tol);
    CHECK(ts.eta_r <= joint * (1.0 + 1e-9) + 1.0);
    ++compared;
  }
  CHECK(compared >= 2);
}

TEST_CASE("composed assignment is consistent with a from-scratch evaluation") {
  for (unsigned seed : {8u, 21u}) {
    const Scenario s = small_random_scenario(4, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    const PowerAlloc p = uniform_power(s);
    AlgoConfig cfg;
    const TwoStageResult ts = run_two_stage(p, g, s, cfg);
    if (ts.status != SolveStatus::Optimal) continue;
    CHECK(ts.eta_r == doctest::Approx(ts.ilp_eta_r).epsilon(1e-6));
    for (int j = 0; j < s.n_ubs(); ++j)
      for (int n = 0; n < s.system.n_subchannels; ++n) {
        const ChannelRole& role = ts.assignment.role(j, n);
        if (role.kind != RoleKind::Pair) continue;
        CHECK(g.at(role.primary, j, n) >= g.at(role.secondary, j, n));
      }
  }
}

TEST_CASE("FDMA mode never pairs") {
  for (unsigned seed : {4u, 13u}) {
    const Scenario s = small_random_scenario(3, 2, 2, seed);
    const GainTables g = build_gain_tables(s);
    PowerAlloc p = uniform_power(s);
    for (double& v : p.p2) v = 0.0;
    AlgoConfig cfg;
    const TwoStageResult ts = run_two_stage(p, g, s, cfg, AccessMode::Fdma);
    if (ts.status != SolveStatus::Optimal) continue;
    for (int j = 0; j < s.n_ubs(); ++j)
      for (int n = 0; n < s.system.n_subchannels; ++n)
        CHECK(ts.assignment.role(j, n).kind != RoleKind::Pair);
  }
}

TEST_CASE("ILP text dumps carry the association variable names") {
  RateMatrixFixture fx({{10.0, 2.0}, {3.0, 9.0}}, 1.0, 100.0);
  const std::string text = to_lp_text(build_primary_ilp(fx.p, fx.g, fx.s));
  CHECK(text.find("a_0_0_0") != std::string::npos);
  CHECK(text.find("a_1_0_1") != std::string::npos);
  CHECK(text.find("eta_R") != std::string::npos);
}
