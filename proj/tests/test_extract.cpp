#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cfisac/extract.hpp"
#include "oracles.hpp"

using namespace cfisac;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

constexpr double kDeg = 180.0 / 3.14159265358979323846;

ScenarioConfig desk_config() {
  ScenarioConfig cfg;
  cfg.ap_positions = {Eigen::Vector2d(10.0, 0.0), Eigen::Vector2d(80.0, 0.0)};
  cfg.ue_positions = {Eigen::Vector2d(30.0, 20.0), Eigen::Vector2d(50.0, 35.0)};
  cfg.eve_position = Eigen::Vector2d(45.0, 50.0);
  cfg.N = 8;
  cfg.M = 2;
  cfg.K = 2;
  cfg.P_m = {1.0, 1.0};
  cfg.delta2 = Eigen::MatrixXd::Constant(2, 2, 0.1);
  cfg.gamma = {1.0, 1.0};
  cfg.psi = 1.0;
  cfg.rng_seed = 5;
  return cfg;
}

/// Rank-1 variables whose sensing stream is exactly zero: the tight shape.
LiftedVariables tight_vars(std::mt19937_64& rng, int n, int m, int s) {
  LiftedVariables vars = oracles::random_lifted(rng, n, m, s, 1, 0.1);
  vars.W.back().setZero();
  return vars;
}

}  // namespace

TEST_CASE("exact rank-1 stream extraction honors the phase convention") {
  VectorXcd v(4);
  v << cplx(1.0, 1.0), cplx(0.5, 0.0), cplx(-0.3, 0.2), cplx(0.0, 0.1);
  v.normalize();

  LiftedVariables vars;
  vars.W = {3.0 * v * v.adjoint(), MatrixXcd::Zero(4, 4)};
  vars.R = {MatrixXcd::Zero(4, 4)};

  const BeamformerSet bf = extract_beamformers(vars, 4, 1);
  REQUIRE(bf.f.size() == 1);
  const VectorXcd& f = bf.f[0];
  CHECK(f.squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK((f * f.adjoint() - vars.W[0]).norm() < 1e-12);
  CHECK(std::abs(f(0).imag()) < 1e-12);  // first nonzero entry real...
  CHECK(f(0).real() > 0.0);              // ...and positive
  CHECK(std::abs(f.dot(v)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("zero stream extracts the zero beamformer") {
  LiftedVariables vars;
  vars.W = {MatrixXcd::Zero(4, 4), MatrixXcd::Zero(4, 4)};
  vars.R = {MatrixXcd::Zero(4, 4)};
  const BeamformerSet bf = extract_beamformers(vars, 4, 1);
  CHECK(bf.f[0].norm() == 0.0);
}

TEST_CASE("rank-2 stream is rejected with its spectrum attached") {
  LiftedVariables vars;
  vars.W = {MatrixXcd::Identity(2, 2), MatrixXcd::Zero(2, 2)};
  vars.R = {MatrixXcd::Zero(2, 2)};

  CHECK_THROWS_AS(extract_beamformers(vars, 2, 1), NotRankOneError);
  try {
    extract_beamformers(vars, 2, 1);
  } catch (const NotRankOneError& e) {
    CHECK(e.info.name == "W0");
    CHECK(e.info.rank1_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.info.eigenvalues.size() == 2);
    CHECK(std::string(e.what()).find("rank-1") != std::string::npos);
  }
}

TEST_CASE("round-trip error is bounded by the rank ratio") {
  std::mt19937_64 rng(17);
  VectorXcd u = oracles::random_cvec(rng, 6, 1.0).normalized();
  VectorXcd w = oracles::random_cvec(rng, 6, 1.0);
  w -= u * u.dot(w);  // orthogonalize
  w.normalize();

  const double l1 = 2.0, l2 = 2.0 * 4e-4;  // ratio below the 1e-3 threshold
  LiftedVariables vars;
  vars.W = {l1 * u * u.adjoint() + l2 * w * w.adjoint(), MatrixXcd::Zero(6, 6)};
  vars.R = {MatrixXcd::Zero(6, 6)};

  const BeamformerSet bf = extract_beamformers(vars, 6, 1);
  const MatrixXcd rebuilt = bf.f[0] * bf.f[0].adjoint();
  const double rel = (vars.W[0] - rebuilt).norm() / vars.W[0].norm();
  CHECK(rel <= l2 / l1 + 1e-9);
}

TEST_CASE("exact rank-1 variables earn a tight verdict with zero deltas") {
  const ScenarioConfig cfg = desk_config();
  const Scenario scn = build_scenario(cfg);
  const FimOperator op = assemble_fim_operator(scn);
  std::mt19937_64 rng(5);
  const LiftedVariables vars = tight_vars(rng, cfg.N, cfg.M, cfg.K + 1);

  const DesignSolution sol = verify_tightness(vars, scn, op);
  CHECK(sol.tightness.tight);
  CHECK(sol.tightness.max_metric_delta_rel < 1e-9);
  CHECK(sol.tightness.sensing_max_eigenvalue <= 1e-15);
  REQUIRE(sol.tightness.spectra.size() == 5);  // W0 W1 W2 R0 R1
  CHECK(sol.tightness.spectra[0].name == "W0");
  CHECK(sol.tightness.spectra[3].name == "R0");
  for (const auto& s : sol.tightness.spectra)
    CHECK(s.rank1_ratio < 1e-12);
  CHECK(sol.beamformers.f.size() == 2);  // communication streams only
  REQUIRE(sol.achieved.sinr_ue.size() == 2);
  for (double v : sol.achieved.sinr_ue) CHECK(std::isfinite(v));
  REQUIRE(sol.achieved.crb_theta_deg.size() == 2);
  CHECK(sol.achieved.crb_theta_deg.allFinite());
  CHECK(!sol.tightness.metric_deltas.empty());
}

TEST_CASE("inflated sensing stream breaks the verdict") {
  const ScenarioConfig cfg = desk_config();
  const Scenario scn = build_scenario(cfg);
  const FimOperator op = assemble_fim_operator(scn);
  std::mt19937_64 rng(5);
  LiftedVariables vars = tight_vars(rng, cfg.N, cfg.M, cfg.K + 1);
  vars.W.back() = 1e-2 * MatrixXcd::Identity(16, 16);

  const DesignSolution sol = verify_tightness(vars, scn, op);
  CHECK(!sol.tightness.tight);
  CHECK(sol.tightness.sensing_max_eigenvalue ==
        doctest::Approx(1e-2).epsilon(1e-9));
}

TEST_CASE("steering-aligned noise covariance characterization") {
  ScenarioConfig cfg;
  cfg.ap_positions = {Eigen::Vector2d(10.0, 0.0), Eigen::Vector2d(80.0, 0.0)};
  cfg.eve_position = Eigen::Vector2d(45.0, 50.0);
  cfg.N = 30;
  cfg.M = 2;
  cfg.K = 0;
  cfg.P_m = {1.0, 1.0};
  cfg.delta2 = Eigen::MatrixXd::Constant(2, 2, 0.1);
  cfg.gamma = {};
  cfg.psi = 1.0;
  const Scenario scn = build_scenario(cfg);

  const VectorXcd a0 = scn.a_target(0);
  const MatrixXcd R0 = a0 * a0.adjoint();
  const AnCharacterization c = characterize_an(R0, scn, 0);

  CHECK(!c.degenerate);
  CHECK(std::abs(c.peak_angle_deg - scn.theta(0) * kDeg) <= 0.05 + 1e-9);
  CHECK(c.rank1_ratio <= 1e-12);
  // Raw pattern is ||a^H R||^2: for R = a0 a0^H the peak is N^2 * ||a0||^2.
  CHECK(c.peak_level_db == doctest::Approx(to_db(27000.0)).epsilon(1e-3));
  // Half-wavelength ULA: -3 dB width ~ 0.886*(2/N)/cos(theta) rad = 4.1 deg
  // at theta = 35 deg.
  CHECK(c.width_3db_deg > 1.0);
  CHECK(c.width_3db_deg < 6.0);
  CHECK(c.max_outside_mainlobe_db < -12.0);  // uniform-array sidelobe floor

  // At a mid-range target angle, +-10 degrees off the peak falls at least
  // two null spacings out in sin-space, so the pattern sits >= 15 dB down.
  const double peak = std::real(
      (a0.adjoint() * R0 * a0)(0, 0));
  for (double off : {-10.0, 10.0}) {
    const VectorXcd a = steering_vector(scn.theta(0) + off / kDeg, cfg.N);
    const double level = std::real((a.adjoint() * R0 * a)(0, 0));
    CHECK(to_db(peak) - to_db(level) >= 15.0);
  }
}

TEST_CASE("zero covariance is flagged degenerate") {
  ScenarioConfig cfg = desk_config();
  const Scenario scn = build_scenario(cfg);
  const AnCharacterization c =
      characterize_an(Eigen::MatrixXcd::Zero(8, 8), scn, 0);
  CHECK(c.degenerate);
}

TEST_CASE("dossier carries the headline sections") {
  const ScenarioConfig cfg = desk_config();
  const Scenario scn = build_scenario(cfg);
  const FimOperator op = assemble_fim_operator(scn);
  std::mt19937_64 rng(5);
  const LiftedVariables vars = tight_vars(rng, cfg.N, cfg.M, cfg.K + 1);
  const DesignSolution sol = verify_tightness(vars, scn, op);

  SolveReport rep;
  rep.status = SolveStatus::Optimal;
  rep.objective = 1.23;
  rep.activity = {{"sinr[0]", 0.1}, {"power[0]", 0.0}};

  std::ostringstream oss;
  write_dossier(sol, scn, rep, oss);
  const std::string text = oss.str();
  CHECK(text.find("status:") != std::string::npos);
  CHECK(text.find("tight:") != std::string::npos);
  CHECK(text.find("[metrics]") != std::string::npos);
  CHECK(text.find("[spectra]") != std::string::npos);
  CHECK(text.find("[beampattern]") != std::string::npos);
  CHECK(text.find("[activity]") != std::string::npos);
}
