// Fisher information of the stacked sensing observation about the channel
// parameters eta = [Re/Im of the M^2 reflection gains, theta_1..theta_M],
// expressed as an explicitly linear operator in the lifted design variables.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "cfisac/lifted.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

/**
 * @brief Index map for the parameter vector eta in R^(2M^2+M).
 *
 * Gain pairs are enumerated rx-major: pair p = rx*M + tx carries
 * Re{alpha_tx^rx} at slot 2p and Im{alpha_tx^rx} at slot 2p+1. The theta
 * block occupies the last M slots, so CRB_theta_m reads the inverse at
 * (2M^2 + m, 2M^2 + m).
 */
struct EtaLayout {
  int M = 0;
  explicit EtaLayout(int n_aps) : M(n_aps) {}
  int dim() const { return 2 * M * M + M; }
  int re_alpha(int rx, int tx) const { return 2 * (rx * M + tx); }
  int im_alpha(int rx, int tx) const { return 2 * (rx * M + tx) + 1; }
  int theta(int m) const { return 2 * M * M + m; }
};

/**
 * @brief The information matrix as a linear map of the design variables.
 *
 * Every entry is J_ij(vars) = scale * Sum_q Re Tr(V_q Z_q^{ij} V_q^H * T_q)
 * with T_q = Sum_s W_{q,s} + R[q], V_q = [a(theta_q), a_dot(theta_q)] the
 * per-AP coefficient basis, and Z_q^{ij} a 2x2 Hermitian core. The same core
 * serves every stream (symbols are i.i.d. across streams) and the AN term
 * (per-stream covariance R/S summed over S streams recovers R), which the
 * dense accessors below make explicit.
 */
class FimOperator {
 public:
  FimOperator(EtaLayout layout, double scale, int n_antennas, int n_streams,
              std::vector<Eigen::MatrixXcd> basis,
              std::vector<Eigen::MatrixXcd> cores);

  const EtaLayout& layout() const { return layout_; }
  int dim() const { return layout_.dim(); }
  double scale() const { return scale_; }  ///< 2 / sigma2_s
  int n_antennas() const { return n_antennas_; }
  int n_aps() const { return layout_.M; }
  int n_streams() const { return n_streams_; }

  /// Per-AP coefficient basis V_q = [a_q, a_dot_q], N x 2.
  const Eigen::MatrixXcd& basis(int q) const { return basis_.at(q); }
  /// Hermitian 2x2 core of entry (i, j) on AP q's block (i <= j stored;
  /// (j, i) returns the adjoint). Excludes the scale prefactor.
  Eigen::MatrixXcd core(int i, int j, int q) const;

  /// Dense NM x NM Hermitian coefficient of W_s in J_ij (same matrix for
  /// every stream s); includes the scale prefactor.
  Eigen::MatrixXcd coeff_W(int i, int j, int s) const;
  /// Dense N x N Hermitian coefficient of R[m] in J_ij; includes the scale.
  Eigen::MatrixXcd coeff_R(int i, int j, int m) const;
  /// Variable-independent part of J (zero for this observation model).
  const Eigen::MatrixXd& constant() const { return constant_; }

  /// Writes every coefficient matrix as CSV rows for offline inspection;
  /// format documented in README.md.
  void dump_coefficients(std::ostream& os) const;

 private:
  int core_index(int i, int j) const;  // upper-triangle storage
  EtaLayout layout_;
  double scale_ = 0.0;
  int n_antennas_ = 0;
  int n_streams_ = 0;
  std::vector<Eigen::MatrixXcd> basis_;  // M entries, N x 2
  // cores_[upper(i,j)] is 2M x 2 stacked: rows 2q..2q+1 hold Z_q^{ij}.
  std::vector<Eigen::MatrixXcd> cores_;
  Eigen::MatrixXd constant_;
};

/// Thrown when a CRB is requested at a singular information matrix.
struct SingularFimError : std::runtime_error {
  SingularFimError(std::string what, int rank, int dim)
      : std::runtime_error(std::move(what)), rank(rank), dim(dim) {}
  int rank = 0;
  int dim = 0;
};

/// Builds the operator from the scenario's nominal gains and angles.
FimOperator assemble_fim_operator(const Scenario& scn);

/// Evaluates J(vars): real symmetric dim x dim, PSD for PSD inputs.
Eigen::MatrixXd evaluate_fim(const FimOperator& op, const LiftedVariables& vars);

/// CRB on each theta_m in degrees: sqrt of the inverse's theta diagonal,
/// radians converted to degrees. Throws SingularFimError when J is not
/// invertible (reciprocal condition below 1e-14).
Eigen::VectorXd crb_theta(const FimOperator& op, const LiftedVariables& vars);
Eigen::VectorXd crb_theta_from_fim(const Eigen::MatrixXd& J, const EtaLayout& layout);

/// Tr(J^{-1}) by direct symmetric solve; same singularity contract.
double fim_trace_inverse(const Eigen::MatrixXd& J);

}  // namespace cfisac
