// Command-line front end: validation suite, single-instance solve with
// dossier output, parameter sweeps, and beampattern export.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "cfisac/experiments.hpp"
#include "cfisac/extract.hpp"
#include "cfisac/fim.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/sdp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;

struct CommonOpts {
  std::string config_path;
  std::string scale;  // "", "desk", "paper"
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;     // linear, broadcast to all UEs
  std::optional<double> gamma_db;  // dB, broadcast
  std::optional<double> psi_db;    // dB
  double tol = 0.0;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "scenario config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--scale", o.scale,
                  "override array size: desk (N=8) or paper (N=30)")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", o.seed, "override the config rng_seed");
  cmd->add_option("--gamma", o.gamma, "override UE SINR floor (linear)");
  cmd->add_option("--gamma-db", o.gamma_db, "override UE SINR floor (dB)");
  cmd->add_option("--psi-db", o.psi_db, "override Eve SNR ceiling (dB)");
  cmd->add_option("--tol", o.tol, "solver tolerance (0 = scale default)");
  cmd->add_flag("--verbose", o.verbose, "per-iteration solver trace");
}

cfisac::ScenarioConfig load_with_overrides(const CommonOpts& o) {
  cfisac::ScenarioConfig cfg = cfisac::load_scenario_config(o.config_path);
  if (o.scale == "desk") cfg.N = 8;
  if (o.scale == "paper") cfg.N = 30;
  if (o.seed) cfg.rng_seed = *o.seed;
  if (o.gamma && o.gamma_db)
    throw CLI::ValidationError("give --gamma or --gamma-db, not both");
  if (o.gamma) cfg.gamma.assign(cfg.K, *o.gamma);
  if (o.gamma_db) cfg.gamma.assign(cfg.K, cfisac::from_db(*o.gamma_db));
  if (o.psi_db) cfg.psi = cfisac::from_db(*o.psi_db);
  cfg.validate();
  return cfg;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file " + path);
  return file;
}

int run_solve_like(const CommonOpts& opts, const std::string& out_path,
                   bool beampattern_mode, double grid_step_deg) {
  const cfisac::ScenarioConfig cfg = load_with_overrides(opts);
  const cfisac::Scenario scn = cfisac::build_scenario(cfg);
  const cfisac::FimOperator op = cfisac::assemble_fim_operator(scn);
  const cfisac::DesignProblem dp = cfisac::build_problem(scn, op);
  const double tol =
      opts.tol > 0.0 ? opts.tol : cfisac::default_tolerance(cfg.N);
  const cfisac::DesignSolutionVars sol =
      cfisac::solve(dp, tol, nullptr, opts.verbose);

  if (sol.report.status == cfisac::SolveStatus::Infeasible) {
    std::cerr << "infeasible";
    if (!sol.report.infeasible_family.empty())
      std::cerr << " (smallest conflicting family: "
                << sol.report.infeasible_family << ")";
    std::cerr << "\n";
    return kExitInfeasible;
  }
  if (sol.report.status != cfisac::SolveStatus::Optimal) {
    std::cerr << "solver failure: " << sol.report.detail << "\n";
    return kExitSolverFailure;
  }

  std::ofstream file;
  std::ostream& os = open_out(out_path, file);
  if (beampattern_mode) {
    const int n =
        static_cast<int>(std::lround(180.0 / grid_step_deg)) + 1;
    Eigen::VectorXd grid_rad(n);
    for (int i = 0; i < n; ++i)
      grid_rad[i] = (-90.0 + i * grid_step_deg) * std::numbers::pi / 180.0;
    os << "ap,theta_deg,gain_db,level_db\n" << std::setprecision(10);
    for (int m = 0; m < cfg.M; ++m) {
      const cfisac::Beampattern bp =
          cfisac::an_beampattern(sol.vars.R[m], grid_rad);
      for (int i = 0; i < n; ++i)
        os << m << ',' << (-90.0 + i * grid_step_deg) << ',' << bp.gain_db[i]
           << ',' << cfisac::to_db(bp.raw[i]) << "\n";
    }
  } else {
    const cfisac::DesignSolution ds =
        cfisac::verify_tightness(sol.vars, scn, op);
    cfisac::write_dossier(ds, scn, sol.report, os);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "secure cell-free ISAC waveform designer: CRB-optimal transmit "
      "covariances under SINR floors, an Eve SNR ceiling, and per-AP power "
      "budgets"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand(
      "validate", "run the oracle-backed property suite (CI entry point)");
  std::uint64_t val_seed = 11;
  std::string val_out;
  bool val_quiet = false;
  validate->add_option("--seed", val_seed, "suite seed");
  validate->add_option("--out", val_out, "write the report CSV here");
  validate->add_flag("--quiet", val_quiet, "suppress per-check lines");

  // solve
  auto* solve_cmd = app.add_subcommand(
      "solve", "solve one instance and write the solution dossier");
  CommonOpts solve_opts;
  std::string solve_out;
  add_common(solve_cmd, solve_opts);
  solve_cmd->add_option("--out", solve_out, "dossier path (default stdout)");

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a parameter sweep from a spec JSON");
  std::string sweep_spec_path, sweep_out;
  int sweep_workers = 0;
  double sweep_tol = 0.0;
  sweep_cmd->add_option("--spec", sweep_spec_path, "sweep spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep_out, "output directory override");
  sweep_cmd->add_option("--workers", sweep_workers, "parallel solver count");
  sweep_cmd->add_option("--tol", sweep_tol, "solver tolerance override");

  // beampattern
  auto* bp_cmd = app.add_subcommand(
      "beampattern", "solve one instance and export the AN beampatterns");
  CommonOpts bp_opts;
  std::string bp_out;
  double bp_step = 0.05;
  add_common(bp_cmd, bp_opts);
  bp_cmd->add_option("--out", bp_out, "CSV path (default stdout)");
  bp_cmd->add_option("--step", bp_step, "grid step in degrees")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const cfisac::ValidationReport report =
          cfisac::run_validation(val_seed, !val_quiet);
      if (!val_out.empty()) {
        std::ofstream file;
        cfisac::write_validation_csv(report, open_out(val_out, file));
      }
      const bool ok = report.all_pass();
      std::cout << (ok ? "validation passed (" : "validation FAILED (")
                << report.checks.size() << " checks)\n";
      return ok ? kExitOk : kExitValidationFailure;
    }

    if (*solve_cmd) return run_solve_like(solve_opts, solve_out, false, 0.0);
    if (*bp_cmd) return run_solve_like(bp_opts, bp_out, true, bp_step);

    if (*sweep_cmd) {
      std::ifstream in(sweep_spec_path);
      nlohmann::json j;
      in >> j;
      cfisac::SweepSpec spec;
      if (j.contains("base_config"))
        spec.base =
            cfisac::load_scenario_config(j.at("base_config").get<std::string>());
      else
        spec.base = cfisac::parse_scenario_config(j.at("base").dump());
      const std::string pname = j.at("param").get<std::string>();
      if (pname == "gamma")
        spec.param = cfisac::SweptParam::Gamma;
      else if (pname == "psi")
        spec.param = cfisac::SweptParam::Psi;
      else if (pname == "proximity")
        spec.param = cfisac::SweptParam::Proximity;
      else if (pname == "N")
        spec.param = cfisac::SweptParam::Antennas;
      else if (pname == "seed")
        spec.param = cfisac::SweptParam::Seed;
      else
        throw std::runtime_error("unknown sweep param: " + pname);
      spec.values = j.at("values").get<std::vector<double>>();
      spec.trials = j.value("trials", 1);
      spec.output_dir = j.value("output_dir", std::string{});
      spec.tol = j.value("tol", 0.0);
      spec.workers = j.value("workers", 1);
      if (j.contains("box")) {
        const auto box = j.at("box").get<std::vector<double>>();
        if (box.size() != 4)
          throw std::runtime_error("box must be [x0, x1, y0, y1]");
        spec.box_x0 = box[0];
        spec.box_x1 = box[1];
        spec.box_y0 = box[2];
        spec.box_y1 = box[3];
      }
      if (!sweep_out.empty()) spec.output_dir = sweep_out;
      if (sweep_workers > 0) spec.workers = sweep_workers;
      if (sweep_tol > 0.0) spec.tol = sweep_tol;
      if (spec.output_dir.empty())
        throw std::runtime_error(
            "no output directory (set output_dir in the spec or pass --out)");

      const cfisac::SweepResult result = cfisac::run_sweep(spec);
      std::cout << "point,value,feasible_trials,status,mean_crb_theta0_deg,"
                   "mean_snr_eve_db\n";
      for (std::size_t p = 0; p < result.summary.size(); ++p) {
        const cfisac::SweepRow& r = result.summary[p];
        std::cout << p << ',' << spec.values[p] << ',' << r.trial << ','
                  << (r.status == cfisac::SolveStatus::Optimal ? "optimal"
                      : r.status == cfisac::SolveStatus::Infeasible
                          ? "infeasible"
                          : "numerical-failure")
                  << ','
                  << (r.crb_theta_deg.empty() ? std::nan("")
                                              : r.crb_theta_deg[0])
                  << ',' << r.snr_eve_db << "\n";
      }
      std::cout << "wrote " << spec.output_dir
                << "/{rows.csv,summary.csv,plot_description.json}\n";
      return kExitOk;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}
