#include "cfisac/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace cfisac {

namespace {

// Re(h^H X h) = Tr(h h^H X) for Hermitian X (quadratic-form evaluation; no
// outer product is formed).
double quad(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& X) {
  return std::real(h.dot(X * h));  // Eigen's dot conjugates the left operand
}

void check_dims(const Scenario& scn, const LiftedVariables& vars) {
  const int nm = scn.config.N * scn.config.M;
  if (static_cast<int>(vars.W.size()) != scn.config.num_streams()) {
    throw std::invalid_argument("metrics: W count must equal S = K + 1");
  }
  for (const auto& w : vars.W) {
    if (w.rows() != nm || w.cols() != nm) throw std::invalid_argument("metrics: W_s must be NM x NM");
  }
  if (static_cast<int>(vars.R.size()) != scn.config.M) {
    throw std::invalid_argument("metrics: R count must equal M");
  }
  for (const auto& r : vars.R) {
    if (r.rows() != scn.config.N || r.cols() != scn.config.N) {
      throw std::invalid_argument("metrics: R_m must be N x N");
    }
  }
}

}  // namespace

double sinr_ue(const Scenario& scn, const LiftedVariables& vars, int k) {
  check_dims(scn, vars);
  if (k < 0 || k >= scn.config.K) throw std::invalid_argument("sinr_ue: UE index out of range");
  const auto& hk = scn.h[k];
  const int S = scn.config.num_streams();
  double num = 0.0, interference = 0.0;
  for (int s = 0; s < S; ++s) {
    const double v = quad(hk, vars.W[s]);
    if (s == k) {
      num = v;
    } else {
      interference += v;
    }
  }
  double an = 0.0;
  for (int m = 0; m < scn.config.M; ++m) {
    an += quad(hk.segment(m * scn.config.N, scn.config.N), vars.R[m]);
  }
  return num / (interference + an + scn.config.sigma2_c);
}

double snr_eve(const Scenario& scn, const LiftedVariables& vars) {
  check_dims(scn, vars);
  const int N = scn.config.N;
  double num = 0.0, an = 0.0;
  for (int m = 0; m < scn.config.M; ++m) {
    const double d2 = scn.config.delta2(m, m);  // monostatic gain only
    const auto& am = scn.a_target(m);
    for (int s = 0; s < scn.config.num_streams(); ++s) {
      num += d2 * std::real(am.dot(vars.W[s].block(m * N, m * N, N, N) * am));
    }
    an += d2 * quad(am, vars.R[m]);
  }
  return num / (an + scn.config.sigma2_s);
}

double ap_power(const LiftedVariables& vars, int m, int n_antennas) {
  if (m < 0 || m >= static_cast<int>(vars.R.size())) {
    throw std::invalid_argument("ap_power: AP index out of range");
  }
  double p = 0.0;
  for (const auto& w : vars.W) {
    p += w.block(m * n_antennas, m * n_antennas, n_antennas, n_antennas).real().trace();
  }
  return p + vars.R[m].real().trace();
}

double sinr_ue(const Scenario& scn, const BeamformerSet& bf,
               const std::vector<Eigen::MatrixXcd>& R, int k) {
  if (k < 0 || k >= scn.config.K) throw std::invalid_argument("sinr_ue: UE index out of range");
  const auto& hk = scn.h[k];
  double num = 0.0, interference = 0.0;
  for (size_t s = 0; s < bf.f.size(); ++s) {
    const double v = std::norm(hk.dot(bf.f[s]));
    if (static_cast<int>(s) == k) {
      num = v;
    } else {
      interference += v;
    }
  }
  double an = 0.0;
  for (int m = 0; m < scn.config.M; ++m) {
    an += quad(hk.segment(m * scn.config.N, scn.config.N), R[m]);
  }
  return num / (interference + an + scn.config.sigma2_c);
}

double snr_eve(const Scenario& scn, const BeamformerSet& bf,
               const std::vector<Eigen::MatrixXcd>& R) {
  const int N = scn.config.N;
  double num = 0.0, an = 0.0;
  for (int m = 0; m < scn.config.M; ++m) {
    const double d2 = scn.config.delta2(m, m);
    const auto& am = scn.a_target(m);
    for (const auto& fs : bf.f) {
      num += d2 * std::norm(am.dot(fs.segment(m * N, N)));
    }
    an += d2 * quad(am, R[m]);
  }
  return num / (an + scn.config.sigma2_s);
}

double ap_power(const BeamformerSet& bf, const std::vector<Eigen::MatrixXcd>& R,
                int m) {
  double p = 0.0;
  for (const auto& fs : bf.f) p += fs.segment(m * bf.n_antennas, bf.n_antennas).squaredNorm();
  return p + R[m].real().trace();
}

Beampattern an_beampattern(const Eigen::MatrixXcd& R_m,
                           const Eigen::VectorXd& theta_grid) {
  if (theta_grid.size() == 0) throw std::invalid_argument("an_beampattern: empty grid");
  Beampattern bp;
  bp.theta_grid = theta_grid;
  bp.raw.resize(theta_grid.size());
  const int n = static_cast<int>(R_m.rows());
  for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
    const Eigen::VectorXcd a = steering_vector(theta_grid(i), n);
    bp.raw(i) = (a.adjoint() * R_m).squaredNorm();
  }
  const double peak = bp.raw.maxCoeff();
  bp.degenerate = !(peak > 0.0);
  bp.gain_db.resize(theta_grid.size());
  if (bp.degenerate) {
    bp.gain_db.setZero();  // flat pattern, flagged rather than an error
    return bp;
  }
  for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
    bp.gain_db(i) = to_db(std::max(bp.raw(i), 1e-300) / peak);
  }
  return bp;
}

Eigen::VectorXd an_beampattern_quadratic(const Eigen::MatrixXcd& R_m,
                                         const Eigen::VectorXd& theta_grid) {
  Eigen::VectorXd out(theta_grid.size());
  const int n = static_cast<int>(R_m.rows());
  for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
    const Eigen::VectorXcd a = steering_vector(theta_grid(i), n);
    out(i) = std::real(a.dot(R_m * a));
  }
  return out;
}

}  // namespace cfisac
