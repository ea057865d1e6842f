// Builds and solves the relaxed waveform design: minimize the trace of the
// inverse information matrix (via unit-vector Schur epigraph blocks) subject
// to per-UE SINR floors, the Eve SNR ceiling, per-AP power budgets, and PSD
// membership of all lifted variables. No rank constraint (relaxation).
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "cfisac/conic.hpp"
#include "cfisac/fim.hpp"
#include "cfisac/ipm.hpp"
#include "cfisac/lifted.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct ConstraintActivity {
  std::string name;
  double slack = 0.0;  ///< rhs - lhs (nonnegative when satisfied)
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;        ///< Tr(J^{-1}) at the returned point
  double epigraph_total = 0.0;   ///< sum of epigraph values (descaled)
  double epigraph_gap_rel = 0.0; ///< |sum t - Tr(J^{-1})| / Tr(J^{-1})
  int iterations = 0;
  double max_primal_residual = 0.0;
  double rel_gap = 0.0;
  std::vector<ConstraintActivity> activity;  ///< SINR / SNR / power rows
  /// First constraint family a staged feasibility probe rejects
  /// ("power", "power+sinr", "power+sinr+snr"); empty unless infeasible.
  std::string infeasible_family;
  double wall_time_s = 0.0;
  std::string detail;
};

/**
 * @brief The design problem in conic form plus the bookkeeping needed to map
 *        solver blocks back to design variables.
 *
 * Variable inventory: S lifted stream blocks (NM x NM), M AN blocks (N x N),
 * dim Schur epigraph blocks ((dim+1) x (dim+1)), and dim epigraph scalars.
 * Constraint inventory: the Schur linking rows plus K SINR rows, one Eve SNR
 * row, and M power rows, all named.
 */
struct DesignProblem {
  ConicProblem conic;
  EtaLayout layout{0};
  int n_antennas = 0;
  int n_aps = 0;
  int n_streams = 0;
  double fim_scale = 1.0;  ///< uniform conditioning rescale applied to J
  // Block index ranges into conic.blocks.
  int first_w = 0, first_r = 0, first_schur = 0, epigraph_block = 0;
};

/// Assembles the conic form of the design problem for one scenario.
DesignProblem build_problem(const Scenario& scn, const FimOperator& fim_op);

struct DesignSolutionVars {
  LiftedVariables vars;
  Eigen::VectorXd epigraph;  ///< the dim epigraph values (descaled)
  SolveReport report;
};

/// Default solver tolerance for a given array size: tighter for desk-scale
/// arrays, relaxed for the full-scale ones (documented, overridable).
double default_tolerance(int n_antennas);

/**
 * @brief Solves the design problem with the given backend (in-tree IPM when
 *        null). Infeasible and numerical-failure outcomes are first-class:
 *        non-optimal statuses run the staged feasibility probe to name the
 *        failing constraint family. On optimal status the returned variables
 *        satisfy every constraint within tol and the epigraph total matches
 *        the directly inverted information matrix to 1e-4 relative.
 */
DesignSolutionVars solve(const DesignProblem& problem, double tol,
                         ConicBackend* backend = nullptr, bool verbose = false);

}  // namespace cfisac
