// Solver-agnostic conic program representation: named Hermitian-PSD /
// nonnegative variable blocks, affine constraints built from structured
// coefficient terms, and a linear objective. Coefficients exploit the
// problem family's structure (low-rank cores over shared per-block vector
// pools, diagonal ranges, small dense matrices) so backends can assemble
// their normal equations cheaply; a dense materialization exists for every
// term, keeping the representation backend-neutral.
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace cfisac {

enum class BlockKind {
  HermitianPsd,  ///< complex Hermitian PSD matrix of the given size
  Nonneg,        ///< elementwise-nonnegative vector of the given size
};

struct BlockSpec {
  std::string name;
  int size = 0;
  BlockKind kind = BlockKind::HermitianPsd;
};

/// Coefficient V[:, cols] * Z * V[:, cols]^H on a matrix block, where V is
/// that block's shared vector pool and Z is Hermitian.
struct LowRankTerm {
  int block = 0;
  std::vector<int> cols;
  Eigen::MatrixXcd Z;
};

/// Coefficient weight * identity restricted to rows/cols [start, start+len).
struct DiagTerm {
  int block = 0;
  int start = 0;
  int len = 0;
  double weight = 1.0;
};

/// Arbitrary Hermitian coefficient (intended for small blocks only).
struct DenseTerm {
  int block = 0;
  Eigen::MatrixXcd A;
};

/// weight * x[index] on a nonnegative block.
struct ScalarTerm {
  int block = 0;
  int index = 0;
  double weight = 1.0;
};

using Term = std::variant<LowRankTerm, DiagTerm, DenseTerm, ScalarTerm>;

/// One affine row: sum over terms of Re<coeff, X_block>, compared to rhs.
struct LinearConstraint {
  std::string name;
  std::vector<Term> terms;
  double rhs = 0.0;
};

/// A primal assignment: mat[b] for HermitianPsd blocks, vec[b] for Nonneg.
struct ConicPoint {
  std::vector<Eigen::MatrixXcd> mat;
  std::vector<Eigen::VectorXd> vec;
};

struct ConicProblem {
  std::vector<BlockSpec> blocks;
  /// Per-block shared vector pool referenced by LowRankTerm::cols; empty for
  /// blocks without low-rank coefficients.
  std::vector<Eigen::MatrixXcd> pools;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;  ///< each reads expr <= rhs
  std::vector<Term> objective;                 ///< minimized

  int block_index(const std::string& name) const;  // -1 when absent
  ConicPoint zero_point() const;
  /// Throws std::invalid_argument on any dangling reference or dimension
  /// mismatch between terms, pools, and block specs.
  void validate() const;
};

/// Dense materialization of one term's coefficient on its block.
Eigen::MatrixXcd term_matrix(const ConicProblem& problem, const Term& term);

/// Value of an affine expression at a point: sum of Re<coeff, X_block>.
double eval_terms(const ConicProblem& problem, const std::vector<Term>& terms,
                  const ConicPoint& point);

/// Residual summary of a point against every constraint and cone, computed
/// straight from the term representation (matrix-free self-check).
struct PointCheck {
  double max_equality_violation = 0.0;
  double max_inequality_violation = 0.0;  ///< positive = violated
  double min_matrix_eigenvalue_ratio = 0.0;  ///< min over blocks of lambda_min / max(1, trace)
  double min_nonneg_entry = 0.0;
  std::vector<std::pair<std::string, double>> worst_rows;  ///< name, |violation|
};
PointCheck check_point(const ConicProblem& problem, const ConicPoint& point);

/// Writes the problem in the documented sparse text format (README.md) for
/// cross-validation with external solvers.
void export_problem(const ConicProblem& problem, std::ostream& os);

}  // namespace cfisac
