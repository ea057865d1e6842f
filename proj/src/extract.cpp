// Rank diagnostics, beamformer recovery, tightness audit, and AN pattern
// characterization for solved designs.

#include "cfisac/extract.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace cfisac {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kRad2Deg = 180.0 / std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixRankInfo make_rank_info(std::string name, const VectorXd& descending) {
  MatrixRankInfo info;
  info.name = std::move(name);
  info.eigenvalues = descending;
  if (descending.size() >= 2 && descending[0] > 0.0)
    info.rank1_ratio = std::max(0.0, descending[1] / descending[0]);
  return info;
}

MatrixRankInfo rank_info(std::string name, const MatrixXcd& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (A + A.adjoint()),
                                              Eigen::EigenvaluesOnly);
  const VectorXd desc = es.eigenvalues().reverse();
  return make_rank_info(std::move(name), desc);
}

double rel_delta(double reference, double other) {
  if (!std::isfinite(reference) || !std::isfinite(other)) return kInf;
  return std::abs(reference - other) / std::max(1e-12, std::abs(reference));
}

}  // namespace

BeamformerSet extract_beamformers(const LiftedVariables& vars, int n_antennas,
                                  int n_comm_streams,
                                  const RankThresholds& thresholds) {
  BeamformerSet bf;
  bf.n_antennas = n_antennas;
  for (int s = 0; s < n_comm_streams; ++s) {
    const MatrixXcd& W = vars.W.at(s);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (W + W.adjoint()));
    const VectorXd desc = es.eigenvalues().reverse();
    MatrixRankInfo info = make_rank_info("W" + std::to_string(s), desc);
    if (info.rank1_ratio > thresholds.comm_ratio) {
      std::ostringstream os;
      os << info.name << " is not rank-1: lambda2/lambda1 = " << std::scientific
         << std::setprecision(3) << info.rank1_ratio;
      throw NotRankOneError(os.str(), std::move(info));
    }
    const Eigen::Index last = W.rows() - 1;
    const double l1 = es.eigenvalues()[last];
    VectorXcd f = VectorXcd::Zero(W.rows());
    if (l1 > 0.0) {
      f = std::sqrt(l1) * es.eigenvectors().col(last);
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double mag = std::abs(f[i]);
        if (mag > 1e-12 * std::sqrt(l1)) {
          f *= std::conj(f[i]) / mag;  // first nonzero entry real positive
          break;
        }
      }
    }
    bf.f.push_back(std::move(f));
  }
  return bf;
}

DesignSolution verify_tightness(const LiftedVariables& vars,
                                const Scenario& scn, const FimOperator& fim_op,
                                const RankThresholds& thresholds) {
  const int S = static_cast<int>(vars.W.size());
  const int K = S - 1;
  const int M = static_cast<int>(vars.R.size());
  const int N = scn.config.N;

  DesignSolution sol;
  sol.vars = vars;
  sol.beamformers.n_antennas = N;

  for (int s = 0; s < S; ++s)
    sol.rank_report.push_back(rank_info("W" + std::to_string(s), vars.W[s]));
  for (int m = 0; m < M; ++m)
    sol.rank_report.push_back(rank_info("R" + std::to_string(m), vars.R[m]));

  TightnessEvidence& ev = sol.tightness;
  ev.spectra = sol.rank_report;

  bool comm_ok = true;
  for (int s = 0; s < K; ++s)
    comm_ok = comm_ok && sol.rank_report[s].rank1_ratio <= thresholds.comm_ratio;
  const VectorXd& sens_ev = sol.rank_report[K].eigenvalues;
  ev.sensing_max_eigenvalue = sens_ev.size() > 0 ? sens_ev[0] : 0.0;
  double pmax = 0.0;
  for (double p : scn.config.P_m) pmax = std::max(pmax, p);
  const bool sens_ok =
      ev.sensing_max_eigenvalue <= thresholds.sensing_abs_frac * pmax;
  bool an_ok = true;
  for (int m = 0; m < M; ++m)
    an_ok = an_ok && sol.rank_report[S + m].rank1_ratio <= thresholds.an_ratio;

  // Metrics of the lifted optimum.
  AchievedMetrics lifted;
  for (int k = 0; k < K; ++k) lifted.sinr_ue.push_back(sinr_ue(scn, vars, k));
  lifted.snr_eve = snr_eve(scn, vars);
  for (int m = 0; m < M; ++m) lifted.ap_power.push_back(ap_power(vars, m, N));
  try {
    lifted.crb_theta_deg = crb_theta(fim_op, vars);
  } catch (const SingularFimError&) {
    lifted.crb_theta_deg = VectorXd::Constant(M, std::nan(""));
  }
  sol.achieved = lifted;

  if (comm_ok) {
    sol.beamformers = extract_beamformers(vars, N, K, thresholds);
    // Re-derive every metric from the rank-1 design plus the solved AN
    // covariances, through the independent beamformer-form code path.
    AchievedMetrics got;
    for (int k = 0; k < K; ++k)
      got.sinr_ue.push_back(sinr_ue(scn, sol.beamformers, vars.R, k));
    got.snr_eve = snr_eve(scn, sol.beamformers, vars.R);
    for (int m = 0; m < M; ++m)
      got.ap_power.push_back(ap_power(sol.beamformers, vars.R, m));
    LiftedVariables rebuilt = LiftedVariables::zeros(N, M, S);
    for (int s = 0; s < K; ++s)
      rebuilt.W[s] = sol.beamformers.f[s] * sol.beamformers.f[s].adjoint();
    rebuilt.R = vars.R;
    try {
      got.crb_theta_deg = crb_theta(fim_op, rebuilt);
    } catch (const SingularFimError&) {
      got.crb_theta_deg = VectorXd::Constant(M, std::nan(""));
    }

    for (int k = 0; k < K; ++k)
      ev.metric_deltas.emplace_back("sinr[" + std::to_string(k) + "]",
                                    rel_delta(lifted.sinr_ue[k], got.sinr_ue[k]));
    ev.metric_deltas.emplace_back("snr",
                                  rel_delta(lifted.snr_eve, got.snr_eve));
    for (int m = 0; m < M; ++m)
      ev.metric_deltas.emplace_back(
          "power[" + std::to_string(m) + "]",
          rel_delta(lifted.ap_power[m], got.ap_power[m]));
    for (int m = 0; m < M; ++m)
      ev.metric_deltas.emplace_back(
          "crb[" + std::to_string(m) + "]",
          rel_delta(lifted.crb_theta_deg[m], got.crb_theta_deg[m]));
    ev.max_metric_delta_rel = 0.0;
    for (const auto& [name, d] : ev.metric_deltas)
      ev.max_metric_delta_rel = std::max(ev.max_metric_delta_rel, d);
    sol.achieved = got;
  } else {
    ev.max_metric_delta_rel = kInf;
  }

  ev.tight = comm_ok && sens_ok && an_ok &&
             ev.max_metric_delta_rel <= thresholds.metric_delta;
  return sol;
}

AnCharacterization characterize_an(const MatrixXcd& R_m, const Scenario& scn,
                                   int m, double grid_step_deg) {
  if (R_m.rows() != scn.config.N || R_m.cols() != scn.config.N)
    throw std::invalid_argument("characterize_an: covariance size mismatch");
  if (m < 0 || m >= scn.config.M)
    throw std::invalid_argument("characterize_an: AP index out of range");

  const int n = static_cast<int>(std::lround(180.0 / grid_step_deg)) + 1;
  VectorXd grid_deg(n), grid_rad(n);
  for (int i = 0; i < n; ++i) {
    grid_deg[i] = -90.0 + i * grid_step_deg;
    grid_rad[i] = grid_deg[i] / kRad2Deg;
  }

  // Characterize the dominant eigenpair's pattern: identical to the full
  // covariance pattern for (near-)rank-1 AN, and still single-peaked when
  // the covariance is not tight.
  AnCharacterization out;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (R_m + R_m.adjoint()));
  const Eigen::Index last = R_m.rows() - 1;
  const double l1 = es.eigenvalues()[last];
  out.rank1_ratio = make_rank_info("R", es.eigenvalues().reverse()).rank1_ratio;
  if (!(l1 > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const VectorXcd u = es.eigenvectors().col(last);
  const MatrixXcd dom = l1 * (u * u.adjoint());
  const Beampattern bp = an_beampattern(dom, grid_rad);
  if (bp.degenerate) {
    out.degenerate = true;
    return out;
  }
  int ip = 0;
  bp.raw.maxCoeff(&ip);
  out.peak_angle_deg = grid_deg[ip];
  out.peak_level_db = to_db(bp.raw[ip]);

  // -3 dB width: first crossings on either side, linearly interpolated.
  const double cut = bp.gain_db[ip] - 3.0;
  double left = grid_deg[0];
  for (int i = ip; i-- > 0;) {
    if (bp.gain_db[i] < cut) {
      const double t = (cut - bp.gain_db[i]) / (bp.gain_db[i + 1] - bp.gain_db[i]);
      left = grid_deg[i] + t * grid_step_deg;
      break;
    }
  }
  double right = grid_deg[n - 1];
  for (int i = ip + 1; i < n; ++i) {
    if (bp.gain_db[i] < cut) {
      const double t = (cut - bp.gain_db[i]) / (bp.gain_db[i - 1] - bp.gain_db[i]);
      right = grid_deg[i] - t * grid_step_deg;
      break;
    }
  }
  out.width_3db_deg = right - left;

  // Main lobe bounded by the first local minima around the peak; everything
  // beyond counts as sidelobe level.
  int iL = ip;
  while (iL > 0 && bp.raw[iL - 1] < bp.raw[iL]) --iL;
  int iR = ip;
  while (iR < n - 1 && bp.raw[iR + 1] < bp.raw[iR]) ++iR;
  double worst = -kInf;
  for (int i = 0; i < iL; ++i) worst = std::max(worst, bp.gain_db[i]);
  for (int i = iR + 1; i < n; ++i) worst = std::max(worst, bp.gain_db[i]);
  out.max_outside_mainlobe_db = worst - bp.gain_db[ip];
  return out;
}

void write_dossier(const DesignSolution& solution, const Scenario& scn,
                   const SolveReport& report, std::ostream& os) {
  const int K = static_cast<int>(solution.achieved.sinr_ue.size());
  const int M = scn.config.M;
  os << std::setprecision(10);
  os << "# waveform design dossier\n";
  const char* status = report.status == SolveStatus::Optimal ? "optimal"
                       : report.status == SolveStatus::Infeasible
                           ? "infeasible"
                           : "numerical-failure";
  os << "status: " << status << "\n";
  if (!report.infeasible_family.empty())
    os << "infeasible_family: " << report.infeasible_family << "\n";
  os << "objective_tr_jinv: " << report.objective << "\n";
  os << "epigraph_total: " << report.epigraph_total << "\n";
  os << "epigraph_gap_rel: " << report.epigraph_gap_rel << "\n";
  os << "iterations: " << report.iterations << "\n";
  os << "max_primal_residual: " << report.max_primal_residual << "\n";
  os << "rel_gap: " << report.rel_gap << "\n";
  os << "wall_time_s: " << report.wall_time_s << "\n";
  os << "tight: " << (solution.tightness.tight ? "yes" : "no") << "\n";
  os << "sensing_max_eigenvalue: " << solution.tightness.sensing_max_eigenvalue
     << "\n";
  os << "max_metric_delta_rel: " << solution.tightness.max_metric_delta_rel
     << "\n";
  os << "detail: " << report.detail << "\n";

  os << "\n[metrics]\nname,value\n";
  for (int k = 0; k < K; ++k) {
    os << "sinr[" << k << "]," << solution.achieved.sinr_ue[k] << "\n";
    os << "sinr_db[" << k << "]," << to_db(solution.achieved.sinr_ue[k])
       << "\n";
  }
  os << "snr," << solution.achieved.snr_eve << "\n";
  os << "snr_db," << to_db(solution.achieved.snr_eve) << "\n";
  for (int m = 0; m < M; ++m)
    os << "power[" << m << "]," << solution.achieved.ap_power[m] << "\n";
  for (int m = 0; m < static_cast<int>(solution.achieved.crb_theta_deg.size());
       ++m)
    os << "crb_theta_deg[" << m << "],"
       << solution.achieved.crb_theta_deg[m] << "\n";

  os << "\n[activity]\nname,slack\n";
  for (const auto& a : report.activity) os << a.name << "," << a.slack << "\n";

  os << "\n[metric_deltas]\nname,rel_delta\n";
  for (const auto& [name, d] : solution.tightness.metric_deltas)
    os << name << "," << d << "\n";

  os << "\n[spectra]\nmatrix,index,eigenvalue\n";
  for (const auto& info : solution.rank_report)
    for (int i = 0; i < static_cast<int>(info.eigenvalues.size()); ++i)
      os << info.name << "," << i << "," << info.eigenvalues[i] << "\n";

  os << "\n[an_summary]\n"
     << "ap,peak_angle_deg,peak_level_db,width_3db_deg,rank1_ratio,"
        "max_outside_mainlobe_db,degenerate\n";
  for (int m = 0; m < M; ++m) {
    const AnCharacterization ch = characterize_an(solution.vars.R[m], scn, m);
    os << m << "," << ch.peak_angle_deg << "," << ch.peak_level_db << ","
       << ch.width_3db_deg << "," << ch.rank1_ratio << ","
       << ch.max_outside_mainlobe_db << "," << (ch.degenerate ? 1 : 0) << "\n";
  }

  os << "\n[beampattern]\nap,theta_deg,gain_db\n";
  const double step = 0.25;
  const int n = static_cast<int>(std::lround(180.0 / step)) + 1;
  VectorXd grid_rad(n);
  for (int i = 0; i < n; ++i) grid_rad[i] = (-90.0 + i * step) / kRad2Deg;
  for (int m = 0; m < M; ++m) {
    const Beampattern bp = an_beampattern(solution.vars.R[m], grid_rad);
    for (int i = 0; i < n; ++i)
      os << m << "," << (-90.0 + i * step) << "," << bp.gain_db[i] << "\n";
  }
}

}  // namespace cfisac
