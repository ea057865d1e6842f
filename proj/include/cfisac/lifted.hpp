// Waveform design variables: lifted stream covariances and the rank-1
// beamformer sets they relax.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cfisac {

/**
 * @brief Relaxed design variables: S lifted stream covariances W_s (NM x NM,
 *        Hermitian PSD) and M artificial-noise covariances R[m] (N x N).
 *
 * Construction symmetrizes each matrix; validate() enforces Hermitian within
 * 1e-9 and smallest eigenvalue >= -1e-7 * trace (solver tolerance).
 */
struct LiftedVariables {
  std::vector<Eigen::MatrixXcd> W;  ///< S matrices, NM x NM
  std::vector<Eigen::MatrixXcd> R;  ///< M matrices, N x N

  static LiftedVariables zeros(int n_antennas, int n_aps, int n_streams);

  /// Symmetrize every matrix in place: X <- (X + X^H)/2.
  void symmetrize();
  /// Throws std::invalid_argument naming the offending matrix and measure.
  void validate() const;

  /// m-th diagonal N x N block of W[s].
  Eigen::MatrixXcd w_block(int s, int m, int n_antennas) const {
    return W.at(s).block(m * n_antennas, m * n_antennas, n_antennas, n_antennas);
  }
};

/**
 * @brief Per-stream precoding vectors in both shapes: f[s] is the stacked
 *        length-NM vector; block m of f[s] is AP m's beamformer f_{m,s}.
 *
 * Stacking and unstacking round-trip exactly (views into the same storage).
 */
struct BeamformerSet {
  std::vector<Eigen::VectorXcd> f;  ///< per stream, length N*M
  int n_antennas = 0;

  Eigen::VectorXcd f_block(int s, int m) const {
    return f.at(s).segment(m * n_antennas, n_antennas);
  }
  /// Rank-1 lift W_s = f_s f_s^H of every stream.
  std::vector<Eigen::MatrixXcd> lift() const;
};

}  // namespace cfisac
