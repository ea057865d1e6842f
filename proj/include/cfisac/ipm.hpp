// Primal-dual interior-point solver for the conic programs this project
// builds: products of complex Hermitian PSD blocks and a nonnegative cone,
// linear objective, affine equality/inequality rows. Nesterov-Todd scaling
// with a Mehrotra predictor-corrector; inequalities receive internal slack
// coordinates that never appear in the problem's own variable inventory.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "cfisac/conic.hpp"

namespace cfisac {

struct SolverOptions {
  double tol = 1e-8;        ///< target for relative gap and residuals
  int max_iters = 120;
  bool verbose = false;
  /// Re-verify the returned point against the term representation and fold
  /// the result into BackendResult::check.
  bool self_check = true;
};

enum class BackendStatus {
  Optimal,            ///< residuals and relative gap below tol
  PrimalInfeasible,   ///< Farkas-type certificate found
  DualInfeasible,     ///< unbounded-direction certificate found
  Stalled,            ///< no progress before reaching tolerances
  IterationLimit,
};

struct BackendResult {
  BackendStatus status = BackendStatus::Stalled;
  ConicPoint X;                 ///< primal point (best iterate)
  Eigen::VectorXd y;            ///< multipliers: equalities then inequalities
  ConicPoint S;                 ///< dual slack blocks
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double rel_gap = 0.0;
  double primal_residual = 0.0;  ///< relative
  double dual_residual = 0.0;    ///< relative
  int iterations = 0;
  double wall_time_s = 0.0;
  PointCheck check;             ///< filled when self_check is on
  std::string detail;           ///< human-readable termination note
};

/// Backend interface (problem representation in, solution out); lets the
/// design problem swap solvers without leaking backend types.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual BackendResult solve(const ConicProblem& problem,
                              const SolverOptions& options) = 0;
  virtual std::string name() const = 0;
};

/// The in-tree default backend described above.
std::unique_ptr<ConicBackend> make_ipm_backend();

}  // namespace cfisac
