#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cfisac/fim.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/sdp.hpp"
#include "oracles.hpp"

using namespace cfisac;
using Eigen::Vector2d;

namespace {

ScenarioConfig desk_config() {
  ScenarioConfig cfg;
  cfg.ap_positions = {Vector2d(10.0, 0.0), Vector2d(80.0, 0.0)};
  cfg.ue_positions = {Vector2d(30.0, 20.0), Vector2d(50.0, 35.0)};
  cfg.eve_position = Vector2d(45.0, 50.0);
  cfg.N = 8;
  cfg.M = 2;
  cfg.K = 2;
  cfg.P_m = {1.0, 1.0};
  cfg.delta2 = Eigen::MatrixXd::Constant(2, 2, 0.1);
  cfg.gamma = {1.0, 1.0};
  cfg.psi = 1.0;
  cfg.rng_seed = 1;
  return cfg;
}

ScenarioConfig paper_config() {
  ScenarioConfig cfg = desk_config();
  cfg.ue_positions = {Vector2d(30.0, 20.0), Vector2d(40.0, 35.0),
                      Vector2d(50.0, 15.0), Vector2d(60.0, 40.0)};
  cfg.N = 30;
  cfg.K = 4;
  cfg.gamma = {1.0, 1.0, 1.0, 1.0};
  return cfg;
}

struct Solved {
  Scenario scn;
  FimOperator op;
  DesignSolutionVars out;
};

Solved run_design(const ScenarioConfig& cfg, double tol = 0.0) {
  Scenario scn = build_scenario(cfg);
  FimOperator op = assemble_fim_operator(scn);
  const DesignProblem prob = build_problem(scn, op);
  const double use_tol = tol > 0.0 ? tol : default_tolerance(cfg.N);
  DesignSolutionVars out = solve(prob, use_tol);
  return Solved{std::move(scn), std::move(op), std::move(out)};
}

int count_blocks(const ConicProblem& p, int size, BlockKind kind) {
  int n = 0;
  for (const auto& b : p.blocks)
    if (b.size == size && b.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("variable and constraint inventory at full scale") {
  const ScenarioConfig cfg = paper_config();
  const Scenario scn = build_scenario(cfg);
  const FimOperator op = assemble_fim_operator(scn);
  const DesignProblem prob = build_problem(scn, op);

  CHECK(prob.layout.dim() == 10);  // 2 M^2 + M with M = 2
  CHECK(prob.n_streams == 5);      // K + 1

  const ConicProblem& cp = prob.conic;
  cp.validate();
  CHECK(count_blocks(cp, 60, BlockKind::HermitianPsd) == 5);   // W_s
  CHECK(count_blocks(cp, 30, BlockKind::HermitianPsd) == 2);   // R_m
  CHECK(count_blocks(cp, 11, BlockKind::HermitianPsd) == 10);  // Schur
  int nonneg = 0;
  for (const auto& b : cp.blocks)
    if (b.kind == BlockKind::Nonneg) nonneg += b.size;
  CHECK(nonneg == 10);  // epigraph scalars

  CHECK(cp.blocks[prob.first_w].name == "W0");
  CHECK(cp.blocks[prob.first_r].name == "R0");
  CHECK(cp.blocks[prob.first_schur].name == "U0");
  CHECK(cp.blocks[prob.epigraph_block].name == "t");

  REQUIRE(cp.inequalities.size() == 7);
  std::vector<std::string> names;
  for (const auto& c : cp.inequalities) names.push_back(c.name);
  for (int k = 0; k < 4; ++k)
    CHECK(std::count(names.begin(), names.end(),
                     "sinr[" + std::to_string(k) + "]") == 1);
  CHECK(std::count(names.begin(), names.end(), "snr") == 1);
  CHECK(std::count(names.begin(), names.end(), "power[0]") == 1);
  CHECK(std::count(names.begin(), names.end(), "power[1]") == 1);
  CHECK(!cp.equalities.empty());  // Schur linking rows
}

TEST_CASE("solves without communication users") {
  ScenarioConfig cfg;
  cfg.ap_positions = {Vector2d(10.0, 0.0)};
  cfg.eve_position = Vector2d(60.0, 20.0);
  cfg.N = 4;
  cfg.M = 1;
  cfg.K = 0;
  cfg.P_m = {1.0};
  cfg.delta2 = Eigen::MatrixXd::Constant(1, 1, 0.1);
  cfg.gamma = {};
  cfg.psi = 100.0;  // loose ceiling: pure sensing design
  cfg.rng_seed = 3;

  const Solved s = run_design(cfg, 1e-8);
  REQUIRE(s.out.report.status == SolveStatus::Optimal);
  CHECK(std::isfinite(s.out.report.objective));
  CHECK(s.out.report.objective > 0.0);
  for (const auto& row : s.out.report.activity)
    CHECK(row.name.rfind("sinr", 0) != 0);  // no SINR rows exist
}

TEST_CASE("unreachable SINR floor is reported infeasible with its family") {
  ScenarioConfig cfg = desk_config();
  cfg.gamma = {1e9, 1e9};
  const Solved s = run_design(cfg);
  REQUIRE(s.out.report.status == SolveStatus::Infeasible);
  CHECK(s.out.report.infeasible_family == "power+sinr");
}

TEST_CASE("grid search certifies the relaxed optimum on the tiny scenario") {
  const ScenarioConfig cfg = oracles::tiny_config();
  const Solved s = run_design(cfg, 1e-9);
  REQUIRE(s.out.report.status == SolveStatus::Optimal);

  const auto oracle = oracles::brute_force_tiny(s.scn, s.op);
  REQUIRE(std::isfinite(oracle.objective));
  // The relaxation can only undercut the rank-1 grid optimum...
  CHECK(s.out.report.objective <= oracle.objective * (1.0 + 1e-6));
  // ...and must land within one percent of it.
  CHECK(std::abs(s.out.report.objective - oracle.objective) <=
        0.01 * oracle.objective);
}

TEST_CASE("quadrupled power divides the objective by four when only power binds") {
  ScenarioConfig cfg = desk_config();
  cfg.gamma = {1e-8, 1e-8};
  cfg.psi = 1e8;

  const Solved base = run_design(cfg);
  REQUIRE(base.out.report.status == SolveStatus::Optimal);

  cfg.P_m = {4.0, 4.0};
  const Solved scaled = run_design(cfg);
  REQUIRE(scaled.out.report.status == SolveStatus::Optimal);

  CHECK(base.out.report.objective / scaled.out.report.objective ==
        doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("desk solve meets the feasibility and exactness contracts") {
  const ScenarioConfig cfg = desk_config();
  const Solved s = run_design(cfg);
  REQUIRE(s.out.report.status == SolveStatus::Optimal);

  // Epigraph total tracks the directly inverted information matrix.
  CHECK(s.out.report.epigraph_gap_rel < 1e-4);
  CHECK(s.out.epigraph.size() == 10);
  const double tr_direct =
      fim_trace_inverse(evaluate_fim(s.op, s.out.vars));
  CHECK(s.out.report.objective ==
        doctest::Approx(tr_direct).epsilon(1e-10));
  CHECK(s.out.epigraph.sum() ==
        doctest::Approx(s.out.report.epigraph_total).epsilon(1e-9));

  // Constraint satisfaction at the returned point.
  for (int k = 0; k < cfg.K; ++k)
    CHECK(sinr_ue(s.scn, s.out.vars, k) >= cfg.gamma[k] * (1.0 - 1e-6));
  CHECK(snr_eve(s.scn, s.out.vars) <= cfg.psi * (1.0 + 1e-6));
  for (int m = 0; m < cfg.M; ++m)
    CHECK(ap_power(s.out.vars, m, cfg.N) <= cfg.P_m[m] * (1.0 + 1e-6));
  CHECK_NOTHROW(s.out.vars.validate());  // PSD within solver tolerance

  // Named activity rows cover every design constraint.
  CHECK(s.out.report.activity.size() == 5);  // 2 SINR + SNR + 2 power
}

TEST_CASE("objective is monotone in the constraint levels") {
  ScenarioConfig cfg = desk_config();

  cfg.gamma = {0.8, 0.8};
  const double obj_lo_gamma = run_design(cfg).out.report.objective;
  cfg.gamma = {1.6, 1.6};
  const double obj_hi_gamma = run_design(cfg).out.report.objective;
  CHECK(obj_hi_gamma >= obj_lo_gamma - 1e-6);

  cfg.gamma = {1.0, 1.0};
  cfg.psi = 0.5;
  const double obj_tight_psi = run_design(cfg).out.report.objective;
  cfg.psi = 2.0;
  const double obj_loose_psi = run_design(cfg).out.report.objective;
  CHECK(obj_tight_psi >= obj_loose_psi - 1e-6);
}

TEST_CASE("documented default tolerances") {
  CHECK(default_tolerance(8) == doctest::Approx(1e-8));
  CHECK(default_tolerance(30) == doctest::Approx(1e-6));
}

TEST_CASE("full-scale eavesdropper ceiling is active at a high SINR floor") {
  ScenarioConfig cfg = paper_config();
  cfg.gamma = {5.0, 5.0, 5.0, 5.0};
  cfg.psi = 1.0;  // 0 dB ceiling
  const Solved s = run_design(cfg);
  REQUIRE(s.out.report.status == SolveStatus::Optimal);
  const double eve_db = to_db(snr_eve(s.scn, s.out.vars));
  CHECK(std::abs(eve_db - 0.0) <= 0.05);
}
