// Sweep runner and validation suite: reproduces the design's trade-off
// studies (CRB vs SINR floor for several Eve-SNR ceilings, achieved Eve SNR,
// AN beampattern vs SINR floor, UE-Eve proximity) at configurable scale and
// aggregates the oracle-backed property checks into a machine-readable
// pass/fail report.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfisac/scenario.hpp"
#include "cfisac/sdp.hpp"

namespace cfisac {

enum class SweptParam { Gamma, Psi, Proximity, Antennas, Seed };

/**
 * @brief One sweep: a base scenario, the swept parameter, its values, and
 *        how many UE-placement redraws to average per point.
 *
 * gamma values are linear SINR floors, psi values are dB (converted
 * internally), proximity values are 0 (distant: all UEs drawn in the box)
 * or 1 (close: UEs 0 and 1 pinned 0.5 m left/right of the Eve), antenna
 * values are array sizes, seed values replace the base seed.
 */
struct SweepSpec {
  ScenarioConfig base;
  SweptParam param = SweptParam::Gamma;
  std::vector<double> values;
  int trials = 1;
  std::string output_dir;
  double tol = 0.0;  ///< 0 = default_tolerance for the scale
  int workers = 1;
  /// UE redraw box (meters): uniform in [x0, x1] x [y0, y1].
  double box_x0 = 25.0, box_x1 = 65.0, box_y0 = 10.0, box_y1 = 50.0;
};

/// One (point, trial) outcome; infeasible points are explicit rows.
struct SweepRow {
  int point_index = 0;
  int trial = 0;
  double gamma = 0.0;            ///< linear
  double psi_db = 0.0;
  std::uint64_t seed = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> crb_theta_deg;   ///< per AP
  std::vector<double> sinr_ue;         ///< linear, achieved
  double snr_eve_db = 0.0;             ///< achieved
  std::vector<double> ap_power;        ///< watts
  bool tight = false;
  std::vector<double> an_peak_db;      ///< unnormalized AN peak per AP
  std::vector<double> an_peak_angle_deg;
  double objective = 0.0;              ///< Tr(J^{-1})
  double wall_time_s = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;           ///< ordered by (point, trial)
  std::vector<SweepRow> summary;        ///< trial means per point (feasible rows)
};

/// Runs every (point, trial) cell — in parallel when spec.workers > 1, with
/// deterministic merge order — and writes rows.csv, summary.csv, and a
/// plot-description JSON into spec.output_dir (when non-empty).
SweepResult run_sweep(const SweepSpec& spec);

/// Draws the trial's UE placement: deterministic function of (seed, trial),
/// independent of the sweep point so sweeps are paired across points.
std::vector<Eigen::Vector2d> draw_ue_positions(const SweepSpec& spec,
                                               std::uint64_t seed, int trial);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double limit = 0.0;
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
};

/// Fast oracle-backed property suite (desk scale): information-matrix
/// finite-difference agreement, lifted-vs-beamformer metric equivalence,
/// epigraph exactness and rank structure on a solved instance, steering
/// derivative agreement. Intended as the CI entry point.
ValidationReport run_validation(std::uint64_t seed = 11, bool verbose = false);

/// Serializes the report as CSV rows (name, pass, measured, limit, note).
void write_validation_csv(const ValidationReport& report, std::ostream& os);

}  // namespace cfisac
