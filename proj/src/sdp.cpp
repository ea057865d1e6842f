// Conic assembly and solution of the relaxed waveform design. The epigraph
// of Tr(J^{-1}) is encoded with one (dim+1)-sized PSD block per parameter:
// U_i = [[kappa2*J, e_i], [e_i^T, t_i]] >= 0 certifies t_i >= [(kappa2*J)^{-1}]_ii,
// exact once J is positive definite. Only real parts of the linking rows are
// pinned; the free imaginary parts cannot weaken the bound (for real symmetric
// J the minimum of [e; v]^H (J + jK)^{-1} [e; v] over v and skew K is exactly
// e^T J^{-1} e), so the relaxation stays tight without doubling to a real
// embedding.

#include "cfisac/sdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace cfisac {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// a(theta_m) placed in AP m's rows of the stacked NM vector.
VectorXcd embed(const VectorXcd& v, int m, int N, int NM) {
  VectorXcd out = VectorXcd::Zero(NM);
  out.segment(m * N, N) = v;
  return out;
}

// Symmetric basis element: <E, U> = Re U(r, s).
MatrixXcd sym_basis(int size, int r, int s) {
  MatrixXcd E = MatrixXcd::Zero(size, size);
  if (r == s)
    E(r, r) = 1.0;
  else {
    E(r, s) = 0.5;
    E(s, r) = 0.5;
  }
  return E;
}

ConicProblem build_probe(const DesignProblem& dp, int stage) {
  ConicProblem p;
  const int nwr = dp.n_streams + dp.n_aps;
  p.blocks.assign(dp.conic.blocks.begin(), dp.conic.blocks.begin() + nwr);
  p.pools.assign(dp.conic.pools.begin(), dp.conic.pools.begin() + nwr);
  const int sb = nwr;
  p.blocks.push_back({"probe_slack", 1, BlockKind::Nonneg});
  p.pools.emplace_back();
  for (const auto& row : dp.conic.inequalities) {
    const bool is_power = row.name.rfind("power", 0) == 0;
    const bool is_sinr = row.name.rfind("sinr", 0) == 0;
    const bool is_snr = row.name.rfind("snr", 0) == 0;
    const bool keep =
        is_power || (is_sinr && stage >= 2) || (is_snr && stage >= 3);
    if (!keep) continue;
    LinearConstraint c = row;
    const bool slacked = (stage == 1 && is_power) || (stage == 2 && is_sinr) ||
                         (stage == 3 && is_snr);
    if (slacked) c.terms.push_back(ScalarTerm{sb, 0, -1.0});
    p.inequalities.push_back(std::move(c));
  }
  p.objective = {Term{ScalarTerm{sb, 0, 1.0}}};
  return p;
}

// Staged max-violation probes: minimize the uniform slack s >= 0 that makes
// the family satisfiable under the previously confirmed families. A strictly
// positive optimum names the first unsatisfiable accumulation.
std::string run_probes(const DesignProblem& dp, double tol,
                       ConicBackend* backend, bool verbose) {
  static const char* kFamily[] = {"power", "power+sinr", "power+sinr+snr"};
  SolverOptions opts;
  opts.tol = 1e-8;
  opts.max_iters = 200;
  opts.verbose = verbose;
  opts.self_check = false;
  for (int stage = 1; stage <= 3; ++stage) {
    double maxrhs = 0.0;
    int slacked_rows = 0;
    for (const auto& row : dp.conic.inequalities) {
      const bool hit = (stage == 1 && row.name.rfind("power", 0) == 0) ||
                       (stage == 2 && row.name.rfind("sinr", 0) == 0) ||
                       (stage == 3 && row.name.rfind("snr", 0) == 0);
      if (hit) {
        ++slacked_rows;
        maxrhs = std::max(maxrhs, std::abs(row.rhs));
      }
    }
    if (slacked_rows == 0) continue;  // e.g. no UEs, hence no SINR rows
    const ConicProblem probe = build_probe(dp, stage);
    const BackendResult pr = backend->solve(probe, opts);
    if (pr.status != BackendStatus::Optimal) continue;  // inconclusive stage
    const double threshold = std::max(100.0 * tol, 1e-6) * (1.0 + maxrhs);
    if (pr.primal_objective > threshold) return kFamily[stage - 1];
  }
  return {};
}

}  // namespace

double default_tolerance(int n_antennas) {
  return n_antennas <= 8 ? 1e-8 : 1e-6;
}

DesignProblem build_problem(const Scenario& scn, const FimOperator& fim_op) {
  const ScenarioConfig& cfg = scn.config;
  const int N = cfg.N, M = cfg.M, K = cfg.K, S = cfg.num_streams();
  const int NM = N * M;
  const EtaLayout layout = fim_op.layout();
  const int dim = layout.dim();

  DesignProblem dp;
  dp.layout = layout;
  dp.n_antennas = N;
  dp.n_aps = M;
  dp.n_streams = S;
  dp.first_w = 0;
  dp.first_r = S;
  dp.first_schur = S + M;
  dp.epigraph_block = S + M + dim;

  // Conditioning: rescale J so its spectrum at an isotropic full-power
  // reference design is centered on 1 (geometric mean of the extremes).
  LiftedVariables ref = LiftedVariables::zeros(N, M, S);
  for (int m = 0; m < M; ++m)
    ref.R[m] = (cfg.P_m[m] / N) * MatrixXcd::Identity(N, N);
  const MatrixXd Jref = evaluate_fim(fim_op, ref);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Jref);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  double kappa2 = 1.0;
  if (lmax > 0.0)
    kappa2 = lmin > 1e-12 * lmax ? 1.0 / std::sqrt(lmax * lmin) : 1.0 / lmax;
  dp.fim_scale = kappa2;

  ConicProblem& cp = dp.conic;
  const int nblocks = S + M + dim + 1;
  cp.blocks.reserve(nblocks);
  cp.pools.resize(nblocks);

  MatrixXcd wpool(NM, 2 * M + K);
  for (int q = 0; q < M; ++q) {
    wpool.col(2 * q) = embed(scn.a_target(q), q, N, NM);
    wpool.col(2 * q + 1) = embed(scn.a_target_dot(q), q, N, NM);
  }
  for (int k = 0; k < K; ++k) wpool.col(2 * M + k) = scn.h[k];
  for (int s = 0; s < S; ++s) {
    cp.blocks.push_back({"W" + std::to_string(s), NM, BlockKind::HermitianPsd});
    cp.pools[s] = wpool;
  }
  for (int m = 0; m < M; ++m) {
    cp.blocks.push_back({"R" + std::to_string(m), N, BlockKind::HermitianPsd});
    MatrixXcd rpool(N, 2 + K);
    rpool.col(0) = scn.a_target(m);
    rpool.col(1) = scn.a_target_dot(m);
    for (int k = 0; k < K; ++k) rpool.col(2 + k) = scn.h_block(k, m);
    cp.pools[S + m] = rpool;
  }
  for (int i = 0; i < dim; ++i)
    cp.blocks.push_back(
        {"U" + std::to_string(i), dim + 1, BlockKind::HermitianPsd});
  cp.blocks.push_back({"t", dim, BlockKind::Nonneg});

  std::vector<int> wcols(2 * M);
  for (int c = 0; c < 2 * M; ++c) wcols[c] = c;
  const std::vector<int> rcols = {0, 1};
  const double neg = -kappa2 * fim_op.scale();

  // Linking rows: Re U_i(r, c) = kappa2 * J_rc for every epigraph block i.
  // The J coefficient matrices are shared across the dim copies, so the
  // backend's deduplication collapses them to one inner product per pair.
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      MatrixXcd Zw = MatrixXcd::Zero(2 * M, 2 * M);
      for (int q = 0; q < M; ++q)
        Zw.block(2 * q, 2 * q, 2, 2) = neg * fim_op.core(r, c, q);
      std::vector<MatrixXcd> Zr(M);
      for (int m = 0; m < M; ++m) Zr[m] = neg * fim_op.core(r, c, m);
      const double rhs = kappa2 * fim_op.constant()(r, c);
      for (int i = 0; i < dim; ++i) {
        LinearConstraint row;
        row.name = "J[" + std::to_string(i) + "](" + std::to_string(r) + "," +
                   std::to_string(c) + ")";
        row.terms.reserve(1 + S + M);
        row.terms.push_back(DenseTerm{dp.first_schur + i, sym_basis(dim + 1, r, c)});
        for (int s = 0; s < S; ++s) row.terms.push_back(LowRankTerm{s, wcols, Zw});
        for (int m = 0; m < M; ++m)
          row.terms.push_back(LowRankTerm{dp.first_r + m, rcols, Zr[m]});
        row.rhs = rhs;
        cp.equalities.push_back(std::move(row));
      }
    }
  }
  for (int i = 0; i < dim; ++i) {
    for (int r = 0; r < dim; ++r) {
      LinearConstraint row;
      row.name = "ecol[" + std::to_string(i) + "](" + std::to_string(r) + ")";
      row.terms.push_back(DenseTerm{dp.first_schur + i, sym_basis(dim + 1, r, dim)});
      row.rhs = r == i ? 1.0 : 0.0;
      cp.equalities.push_back(std::move(row));
    }
  }
  for (int i = 0; i < dim; ++i) {
    LinearConstraint row;
    row.name = "corner[" + std::to_string(i) + "]";
    row.terms.push_back(DenseTerm{dp.first_schur + i, sym_basis(dim + 1, dim, dim)});
    row.terms.push_back(ScalarTerm{dp.epigraph_block, i, -1.0});
    row.rhs = 0.0;
    cp.equalities.push_back(std::move(row));
  }

  // SINR floors: gamma_k * (interference + AN leakage + sigma2_c) <= signal.
  // Rows are normalized by max(1, gamma_k) so extreme floors keep the
  // coefficients O(1); scaling an inequality preserves its feasible set.
  for (int k = 0; k < K; ++k) {
    LinearConstraint row;
    row.name = "sinr[" + std::to_string(k) + "]";
    const double g = cfg.gamma[k];
    const double inv = 1.0 / std::max(1.0, g);
    const std::vector<int> hcol = {2 * M + k};
    for (int s = 0; s < S; ++s) {
      MatrixXcd Z(1, 1);
      Z(0, 0) = (s == k ? -1.0 : g) * inv;
      row.terms.push_back(LowRankTerm{s, hcol, Z});
    }
    const std::vector<int> rcol = {2 + k};
    for (int m = 0; m < M; ++m) {
      MatrixXcd Z(1, 1);
      Z(0, 0) = g * inv;
      row.terms.push_back(LowRankTerm{dp.first_r + m, rcol, Z});
    }
    row.rhs = -g * inv * cfg.sigma2_c;
    cp.inequalities.push_back(std::move(row));
  }

  // Eve SNR ceiling: monostatic echo power <= psi * (AN echo + sigma2_s).
  // Normalized by max(1, psi) for the same conditioning reason as the
  // SINR rows.
  {
    LinearConstraint row;
    row.name = "snr";
    const double inv = 1.0 / std::max(1.0, cfg.psi);
    std::vector<int> acols(M);
    MatrixXcd Zs = MatrixXcd::Zero(M, M);
    for (int m = 0; m < M; ++m) {
      acols[m] = 2 * m;
      Zs(m, m) = cfg.delta2(m, m) * inv;
    }
    for (int s = 0; s < S; ++s) row.terms.push_back(LowRankTerm{s, acols, Zs});
    for (int m = 0; m < M; ++m) {
      MatrixXcd Z(1, 1);
      Z(0, 0) = -cfg.psi * inv * cfg.delta2(m, m);
      row.terms.push_back(LowRankTerm{dp.first_r + m, {0}, Z});
    }
    row.rhs = cfg.psi * inv * cfg.sigma2_s;
    cp.inequalities.push_back(std::move(row));
  }

  for (int m = 0; m < M; ++m) {
    LinearConstraint row;
    row.name = "power[" + std::to_string(m) + "]";
    for (int s = 0; s < S; ++s)
      row.terms.push_back(DiagTerm{s, m * N, N, 1.0});
    row.terms.push_back(DiagTerm{dp.first_r + m, 0, N, 1.0});
    row.rhs = cfg.P_m[m];
    cp.inequalities.push_back(std::move(row));
  }

  for (int i = 0; i < dim; ++i)
    cp.objective.push_back(ScalarTerm{dp.epigraph_block, i, 1.0});

  cp.validate();
  return dp;
}

DesignSolutionVars solve(const DesignProblem& problem, double tol,
                         ConicBackend* backend, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  std::unique_ptr<ConicBackend> own;
  ConicBackend* be = backend;
  if (!be) {
    own = make_ipm_backend();
    be = own.get();
  }
  SolverOptions opts;
  opts.tol = problem.n_antennas <= 8 ? 1e-9 : 1e-8;
  opts.max_iters = 200;
  opts.verbose = verbose;
  const BackendResult r = be->solve(problem.conic, opts);

  DesignSolutionVars out;
  out.vars = LiftedVariables::zeros(problem.n_antennas, problem.n_aps,
                                    problem.n_streams);
  for (int s = 0; s < problem.n_streams; ++s)
    out.vars.W[s] = r.X.mat[problem.first_w + s];
  for (int m = 0; m < problem.n_aps; ++m)
    out.vars.R[m] = r.X.mat[problem.first_r + m];
  out.vars.symmetrize();
  const int dim = problem.layout.dim();
  out.epigraph = problem.fim_scale * r.X.vec[problem.epigraph_block];

  SolveReport& rep = out.report;
  rep.iterations = r.iterations;
  rep.rel_gap = r.rel_gap;
  rep.detail = be->name() + ": " + r.detail;
  rep.max_primal_residual = std::max(r.check.max_equality_violation,
                                     r.check.max_inequality_violation);
  rep.epigraph_total = out.epigraph.sum();

  // Tr(J^{-1}) read back from any epigraph block's pinned top-left corner.
  MatrixXd Jrec =
      r.X.mat[problem.first_schur].topLeftCorner(dim, dim).real() /
      problem.fim_scale;
  Jrec = 0.5 * (Jrec + Jrec.transpose()).eval();
  double trinv = std::numeric_limits<double>::quiet_NaN();
  try {
    trinv = fim_trace_inverse(Jrec);
  } catch (const SingularFimError&) {
  }
  if (std::isfinite(trinv) && trinv > 0.0) {
    rep.objective = trinv;
    rep.epigraph_gap_rel = std::abs(rep.epigraph_total - trinv) / trinv;
  } else {
    rep.objective = rep.epigraph_total;
    rep.epigraph_gap_rel = std::numeric_limits<double>::infinity();
  }
  for (const auto& row : problem.conic.inequalities)
    rep.activity.push_back(
        {row.name, row.rhs - eval_terms(problem.conic, row.terms, r.X)});

  // Quality gate in the backend's scaled metric (the equality rows that
  // link the Schur blocks to the information matrix have row norms well
  // above 1, so their absolute violations scale accordingly); inequalities
  // are built with O(1) coefficients, so an absolute backstop stays fair.
  const bool point_ok =
      r.primal_residual <= tol &&
      r.check.max_inequality_violation <= 100.0 * tol &&
      r.check.min_matrix_eigenvalue_ratio >= -1e-7 &&
      r.check.min_nonneg_entry >= -tol;
  if (r.status == BackendStatus::Optimal && point_ok) {
    rep.status = SolveStatus::Optimal;
  } else {
    const std::string family = run_probes(problem, tol, be, verbose);
    if (!family.empty()) {
      rep.status = SolveStatus::Infeasible;
      rep.infeasible_family = family;
      rep.detail += "; probe rejected family '" + family + "'";
    } else if (r.status == BackendStatus::PrimalInfeasible) {
      rep.status = SolveStatus::NumericalFailure;
      rep.detail += "; infeasibility certificate not confirmed by probes";
    } else {
      rep.status = SolveStatus::NumericalFailure;
      if (r.status == BackendStatus::Optimal) {
        std::ostringstream oss;
        oss << "; returned point misses the feasibility tolerance (scaled="
            << std::scientific << std::setprecision(2) << r.primal_residual
            << ", ineq=" << r.check.max_inequality_violation
            << ", cone=" << r.check.min_matrix_eigenvalue_ratio
            << ", nonneg=" << r.check.min_nonneg_entry << ")";
        rep.detail += oss.str();
      }
    }
  }
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace cfisac
