// Post-solution analysis: rank diagnostics, beamformer recovery from the
// lifted optimum, relaxation-tightness verdict, and artificial-noise
// characterization.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfisac/fim.hpp"
#include "cfisac/lifted.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/sdp.hpp"

namespace cfisac {

/// Rank thresholds (configurable; defaults sit two orders above solver
/// tolerance and two below any plausible rank-2 signal).
struct RankThresholds {
  double comm_ratio = 1e-3;      ///< lambda_2 / lambda_1 of communication W_s
  double sensing_abs_frac = 1e-4;  ///< sensing-stream eigenvalues vs max P_m
  double an_ratio = 1e-3;        ///< lambda_2 / lambda_1 of each R[m]
  double metric_delta = 1e-3;    ///< relative metric deltas for the verdict
};

struct MatrixRankInfo {
  std::string name;
  Eigen::VectorXd eigenvalues;  ///< descending
  double rank1_ratio = 0.0;     ///< lambda_2 / lambda_1 (0 for zero matrix)
};

struct TightnessEvidence {
  bool tight = false;
  std::vector<MatrixRankInfo> spectra;
  double sensing_max_eigenvalue = 0.0;
  double max_metric_delta_rel = 0.0;
  std::vector<std::pair<std::string, double>> metric_deltas;  ///< name, rel delta
};

struct AchievedMetrics {
  std::vector<double> sinr_ue;   ///< linear
  double snr_eve = 0.0;          ///< linear
  std::vector<double> ap_power;  ///< watts
  Eigen::VectorXd crb_theta_deg;
};

/// Everything downstream consumers need about one solved design.
struct DesignSolution {
  LiftedVariables vars;
  BeamformerSet beamformers;  ///< communication streams only
  std::vector<MatrixRankInfo> rank_report;
  TightnessEvidence tightness;
  AchievedMetrics achieved;
};

/// Thrown when a lifted matrix fails the rank-1 test; carries the spectrum
/// so the failure is diagnosable (no silent randomized rounding).
struct NotRankOneError : std::runtime_error {
  NotRankOneError(std::string what, MatrixRankInfo info)
      : std::runtime_error(std::move(what)), info(std::move(info)) {}
  MatrixRankInfo info;
};

/**
 * @brief Recovers the communication beamformers f_s = sqrt(eps_s) * u from
 *        the dominant eigenpair of each communication W_s.
 *
 * Phase convention: the first nonzero entry of u is made real positive.
 * Throws NotRankOneError when any communication stream exceeds the ratio
 * threshold. Rebuilding f_s f_s^H reproduces W_s within Frobenius relative
 * error equal to the rank-1 ratio.
 */
BeamformerSet extract_beamformers(const LiftedVariables& vars, int n_antennas,
                                  int n_comm_streams,
                                  const RankThresholds& thresholds = {});

/**
 * @brief Full tightness audit: rank criteria on every matrix plus re-derived
 *        metrics from the extracted rank-1 beamformers (with the solved AN
 *        covariances) compared against the lifted-variable values.
 */
DesignSolution verify_tightness(const LiftedVariables& vars, const Scenario& scn,
                                const FimOperator& fim_op,
                                const RankThresholds& thresholds = {});

/// AN covariance characterization on a dense angle grid.
struct AnCharacterization {
  bool degenerate = false;   ///< zero covariance
  double peak_angle_deg = 0.0;
  double peak_level_db = 0.0;     ///< unnormalized 10*log10 at the peak
  double width_3db_deg = 0.0;
  double rank1_ratio = 0.0;
  double max_outside_mainlobe_db = 0.0;  ///< relative to peak
};

/// Grid step 0.05 degrees over [-90, 90] degrees unless overridden.
AnCharacterization characterize_an(const Eigen::MatrixXcd& R_m,
                                   const Scenario& scn, int m,
                                   double grid_step_deg = 0.05);

/// Solution dossier: structured text report plus CSV blocks (spectra,
/// beampatterns, metrics) for offline plotting.
void write_dossier(const DesignSolution& solution, const Scenario& scn,
                   const SolveReport& report, std::ostream& os);

}  // namespace cfisac
