#pragma once

// Shared fixtures for the solver-level test suites: annulus scenarios with
// the reference system constants, and the uniform power initializations.

#include <cmath>
#include <random>

#include "uavnoma/assoc.hpp"
#include "uavnoma/rates.hpp"

namespace testsupport {

inline uavnoma::Scenario table_scenario(int nu, int nd, unsigned seed) {
  uavnoma::Scenario s;
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  s.mbs_pos = {0.0, 0.0};
  auto draw = [&] {
    const double r = std::sqrt(250.0 * 250.0 + u(gen) * (500.0 * 500.0 - 250.0 * 250.0));
    const double a = 2.0 * 3.141592653589793 * u(gen);
    return uavnoma::Point{r * std::cos(a), r * std::sin(a)};
  };
  for (int j = 0; j < nd; ++j) {
    s.ubs_pos.push_back(draw());
    s.c_max.push_back(1e8);
    s.p_circuit.push_back(0.1);
    s.p_max.push_back(0.251188643150958);
  }
  for (int i = 0; i < nu; ++i) {
    s.ue_pos.push_back(draw());
    s.r_min.push_back((1.0 + u(gen)) * 1e6);
  }
  s.seed = seed;
  return s;
}

inline uavnoma::PowerAlloc noma_initial(const uavnoma::Scenario& s) {
  uavnoma::PowerAlloc p =
      uavnoma::PowerAlloc::zeros(s.n_ubs(), s.system.n_subchannels);
  for (int j = 0; j < s.n_ubs(); ++j)
    for (int n = 0; n < s.system.n_subchannels; ++n) {
      const double v = (s.p_max[j] - s.p_circuit[j]) / (4.0 * s.system.n_subchannels);
      p.p1_at(j, n) = v;
      p.p2_at(j, n) = v;
    }
  return p;
}

/// Association at the uniform start, conformed powers, ready for a power step.
struct PreparedInstance {
  uavnoma::Scenario s;
  uavnoma::GainTables g;
  uavnoma::Assignment a;
  uavnoma::PowerAlloc p;  // conformed to a
  bool ok = false;
};

inline PreparedInstance prepared_instance(int nu, int nd, unsigned seed,
                                          const uavnoma::AlgoConfig& cfg) {
  PreparedInstance inst;
  inst.s = table_scenario(nu, nd, seed);
  inst.g = uavnoma::build_gain_tables(inst.s);
  const uavnoma::PowerAlloc p0 = noma_initial(inst.s);
  const uavnoma::TwoStageResult ts = uavnoma::run_two_stage(p0, inst.g, inst.s, cfg);
  if (ts.status != uavnoma::SolveStatus::Optimal) return inst;
  inst.a = ts.assignment;
  inst.p = uavnoma::conform_power(inst.a, p0);
  const uavnoma::EvalReport rep = uavnoma::evaluate(inst.a, inst.p, inst.g, inst.s, cfg.feas_tol);
  for (const auto& v : rep.violations)
    if (v.id == "C5" || v.id == "C6") return inst;
  inst.ok = true;
  return inst;
}

}  // namespace testsupport
