// Command-line front end: scenario generation, single runs, Monte-Carlo
// campaigns, and solution audits.
//
// Exit codes: 0 success, 2 infeasible (or audit violations), 3 solver failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavnoma/expcli.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

uavnoma::AlgoConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return uavnoma::algo_config_from_json(load_json(path));
}

int cmd_generate(int n_ues, int n_ubs, std::uint64_t seed, const std::string& out) {
  const uavnoma::Scenario s = uavnoma::generate_scenario(n_ues, n_ubs, seed);
  write_text(out, uavnoma::to_json(s).dump(2) + "\n");
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& algo_name,
            const std::string& config_path, const std::string& out, const std::string& csv_out,
            const std::string& gains_out, const std::string& trace_out) {
  const uavnoma::Scenario s = uavnoma::scenario_from_json(load_json(scenario_path));
  s.validate();
  uavnoma::AlgoConfig cfg = load_config(config_path);
  cfg.newton_trace_csv = trace_out;
  const auto algo = uavnoma::algorithm_from_string(algo_name);
  if (!algo) throw std::runtime_error("unknown algorithm: " + algo_name);

  const uavnoma::GainTables g = uavnoma::build_gain_tables(s);
  if (!gains_out.empty()) {
    std::ostringstream os;
    uavnoma::dump_gains_csv(os, g);
    write_text(gains_out, os.str());
  }

  const uavnoma::RunRecord rec = uavnoma::run_algorithm(*algo, s, cfg, g);
  write_text(out, uavnoma::to_json(rec).dump(2) + "\n");
  if (!csv_out.empty()) {
    std::ostringstream os;
    uavnoma::write_run_csv(os, rec);
    write_text(csv_out, os.str());
  }
  if (rec.status == uavnoma::RunStatus::Infeasible) {
    std::cerr << "run: scenario infeasible for " << algo_name << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_campaign(const std::string& spec_path, const std::string& out_dir,
                 const std::string& config_path, std::optional<int> replications,
                 std::optional<std::uint64_t> seed) {
  uavnoma::CampaignSpec spec = uavnoma::campaign_spec_from_json(load_json(spec_path));
  if (replications) spec.replications = *replications;
  if (seed) spec.base_seed = *seed;
  spec.validate();
  const uavnoma::AlgoConfig cfg = load_config(config_path);
  const uavnoma::CampaignResult res = uavnoma::run_campaign(spec, cfg);
  const auto written = uavnoma::emit_results(res, out_dir);
  for (const auto& path : written) std::cout << path << "\n";
  for (const auto& cell : res.cells)
    if (cell.aborted) {
      std::cerr << "campaign: sweep point " << cell.sweep_value
                << " abandoned after repeated infeasible scenarios\n";
      return kExitInfeasible;
    }
  return kExitOk;
}

int cmd_audit(const std::string& scenario_path, const std::string& solution_path,
              const std::string& out, double feas_tol) {
  const uavnoma::Scenario s = uavnoma::scenario_from_json(load_json(scenario_path));
  s.validate();
  nlohmann::json sol_json = load_json(solution_path);
  if (sol_json.contains("solution")) sol_json = sol_json.at("solution");
  auto [raw, power] = uavnoma::solution_from_json(sol_json);
  const uavnoma::GainTables g = uavnoma::build_gain_tables(s);

  nlohmann::json report;
  try {
    const uavnoma::Assignment a = uavnoma::resolve_roles(raw, g);
    const uavnoma::EvalReport rep = uavnoma::evaluate(a, power, g, s, feas_tol);
    report = uavnoma::to_json(rep);
    write_text(out, report.dump(2) + "\n");
    return rep.feasible() ? kExitOk : kExitInfeasible;
  } catch (const std::invalid_argument&) {
    // more than two UEs on some subchannel: report the cap violation alone
    report["violations"] = nlohmann::json::array();
    for (int j = 0; j < raw.n_ubs; ++j)
      for (int n = 0; n < raw.n_sc; ++n) {
        int cnt = 0;
        for (int i = 0; i < raw.n_ues; ++i) cnt += raw.serves(i, j, n) ? 1 : 0;
        if (cnt > 2)
          report["violations"].push_back(
              {{"id", "C1"}, {"index", j * raw.n_sc + n}, {"magnitude", cnt - 2}});
      }
    write_text(out, report.dump(2) + "\n");
    return kExitInfeasible;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-UAV NOMA downlink energy-efficiency toolkit"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "draw a random scenario and write it as JSON");
  int n_ues = 10, n_ubs = 4;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "-";
  generate->add_option("--n-ues", n_ues, "number of UEs")->check(CLI::PositiveNumber);
  generate->add_option("--n-ubs", n_ubs, "number of UBSs")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out", gen_out, "output path, - for stdout");

  auto* run = app.add_subcommand("run", "run one algorithm on one scenario");
  std::string run_scenario, run_algo = "iaspo", run_config, run_out = "-", run_csv, run_gains,
              run_trace;
  run->add_option("--scenario", run_scenario, "scenario JSON")->required();
  run->add_option("--algo", run_algo, "iaspo | asoo | iaspo_fdma");
  run->add_option("--config", run_config, "solver configuration JSON");
  run->add_option("--out", run_out, "run record JSON output, - for stdout");
  run->add_option("--csv", run_csv, "per-iteration CSV output");
  run->add_option("--dump-gains", run_gains, "write the gain tables as CSV");
  run->add_option("--newton-trace", run_trace, "append the inner solver trace as CSV");

  auto* campaign = app.add_subcommand("campaign", "run a Monte-Carlo sweep campaign");
  std::string camp_spec, camp_out, camp_config;
  std::optional<int> camp_reps;
  std::optional<std::uint64_t> camp_seed;
  campaign->add_option("--spec", camp_spec, "campaign spec JSON")->required();
  campaign->add_option("--out", camp_out, "output directory")->required();
  campaign->add_option("--config", camp_config, "solver configuration JSON");
  campaign->add_option("--replications", camp_reps, "override the replication count");
  campaign->add_option("--seed", camp_seed, "override the base seed");

  auto* audit = app.add_subcommand("audit", "audit a solution against a scenario");
  std::string audit_scenario, audit_solution, audit_out = "-";
  double audit_tol = 1e-6;
  audit->add_option("--scenario", audit_scenario, "scenario JSON")->required();
  audit->add_option("--solution", audit_solution, "solution or run-record JSON")->required();
  audit->add_option("--out", audit_out, "violation report output, - for stdout");
  audit->add_option("--feas-tol", audit_tol, "relative audit tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(n_ues, n_ubs, gen_seed, gen_out);
    if (run->parsed())
      return cmd_run(run_scenario, run_algo, run_config, run_out, run_csv, run_gains, run_trace);
    if (campaign->parsed())
      return cmd_campaign(camp_spec, camp_out, camp_config, camp_reps, camp_seed);
    if (audit->parsed()) return cmd_audit(audit_scenario, audit_solution, audit_out, audit_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}
