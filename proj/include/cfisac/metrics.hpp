// Closed-form performance metrics of a transmit design: UE SINR, Eve SNR,
// per-AP power, and the artificial-noise beampattern. Every metric exists in
// lifted (W, R) form and in direct beamformer form; for rank-1 lifts the two
// agree to floating-point accuracy.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfisac/lifted.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

/// SINR of UE k (linear): Tr(h_k h_k^H W_k) over multi-stream interference,
/// AN leakage Sum_m Tr(h_{m,k} h_{m,k}^H R[m]), and sigma2_c.
double sinr_ue(const Scenario& scn, const LiftedVariables& vars, int k);

/// Eve SNR (linear): monostatic gains only, per-AP diagonal blocks of W_s in
/// the numerator, AN blocks in the denominator, plus sigma2_s.
double snr_eve(const Scenario& scn, const LiftedVariables& vars);

/// Transmit power of AP m: Tr of its diagonal blocks over all streams plus
/// its AN covariance trace.
double ap_power(const LiftedVariables& vars, int m, int n_antennas);

/// Beamformer-form counterparts, evaluated directly from inner products
/// (independent code path; the AN covariances still enter the denominators).
double sinr_ue(const Scenario& scn, const BeamformerSet& bf,
               const std::vector<Eigen::MatrixXcd>& R, int k);
double snr_eve(const Scenario& scn, const BeamformerSet& bf,
               const std::vector<Eigen::MatrixXcd>& R);
double ap_power(const BeamformerSet& bf, const std::vector<Eigen::MatrixXcd>& R,
                int m);

/**
 * @brief AN beampattern of one covariance over a grid of angles.
 *
 * raw[i] is the squared Euclidean norm of the row vector a(theta_i)^H R (the
 * covariance beampattern; a rank-1 R peaks at its eigenvector's direction).
 * gain_db is 10*log10(raw) normalized so the grid maximum sits at 0 dB.
 * A zero covariance yields a flat pattern flagged `degenerate`.
 */
struct Beampattern {
  Eigen::VectorXd theta_grid;  ///< radians
  Eigen::VectorXd raw;         ///< linear, unnormalized
  Eigen::VectorXd gain_db;     ///< normalized to 0 dB peak
  bool degenerate = false;
};

Beampattern an_beampattern(const Eigen::MatrixXcd& R_m,
                           const Eigen::VectorXd& theta_grid);

/// Named alternative reading of the pattern: the quadratic form
/// a(theta)^H R a(theta) per grid point (linear, unnormalized).
Eigen::VectorXd an_beampattern_quadratic(const Eigen::MatrixXcd& R_m,
                                         const Eigen::VectorXd& theta_grid);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cfisac
