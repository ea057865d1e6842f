#include "cfisac/fim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace cfisac {

namespace {

// Column roles inside each per-AP coefficient basis V_q = [a_q, a_dot_q].
constexpr int kA = 0;
constexpr int kAdot = 1;

}  // namespace

FimOperator::FimOperator(EtaLayout layout, double scale, int n_antennas,
                         int n_streams, std::vector<Eigen::MatrixXcd> basis,
                         std::vector<Eigen::MatrixXcd> cores)
    : layout_(layout),
      scale_(scale),
      n_antennas_(n_antennas),
      n_streams_(n_streams),
      basis_(std::move(basis)),
      cores_(std::move(cores)),
      constant_(Eigen::MatrixXd::Zero(layout.dim(), layout.dim())) {}

int FimOperator::core_index(int i, int j) const {
  const int d = layout_.dim();
  return i * d - i * (i + 1) / 2 + j;
}

Eigen::MatrixXcd FimOperator::core(int i, int j, int q) const {
  if (i <= j) return cores_.at(core_index(i, j)).block(2 * q, 0, 2, 2);
  return cores_.at(core_index(j, i)).block(2 * q, 0, 2, 2).adjoint();
}

Eigen::MatrixXcd FimOperator::coeff_W(int i, int j, int /*s*/) const {
  // Symbols are i.i.d. across streams, so the coefficient is stream-independent.
  const int nm = n_antennas_ * layout_.M;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(nm, nm);
  for (int q = 0; q < layout_.M; ++q) {
    C.block(q * n_antennas_, q * n_antennas_, n_antennas_, n_antennas_) =
        basis_[q] * core(i, j, q) * basis_[q].adjoint();
  }
  return scale_ * C;
}

Eigen::MatrixXcd FimOperator::coeff_R(int i, int j, int m) const {
  // The per-stream AN covariance R/S summed over the S streams recovers R,
  // so the R coefficient equals the per-block W coefficient.
  return scale_ * (basis_[m] * core(i, j, m) * basis_[m].adjoint());
}

void FimOperator::dump_coefficients(std::ostream& os) const {
  os << "# kind,i,j,q,z00_re,z00_im,z01_re,z01_im,z10_re,z10_im,z11_re,z11_im\n";
  const int d = layout_.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (int q = 0; q < layout_.M; ++q) {
        const Eigen::MatrixXcd z = core(i, j, q);
        if (z.cwiseAbs().maxCoeff() == 0.0) continue;
        os << "core," << i << ',' << j << ',' << q;
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            os << ',' << z(r, c).real() << ',' << z(r, c).imag();
        os << '\n';
      }
    }
  }
  os << "# kind,q,n,a_re,a_im,adot_re,adot_im\n";
  for (int q = 0; q < layout_.M; ++q) {
    for (int n = 0; n < n_antennas_; ++n) {
      os << "basis," << q << ',' << n << ',' << basis_[q](n, kA).real() << ','
         << basis_[q](n, kA).imag() << ',' << basis_[q](n, kAdot).real() << ','
         << basis_[q](n, kAdot).imag() << '\n';
    }
  }
}

FimOperator assemble_fim_operator(const Scenario& scn) {
  const int M = scn.config.M;
  const int N = scn.config.N;
  const EtaLayout layout(M);
  const int d = layout.dim();

  std::vector<Eigen::MatrixXcd> basis(M);
  Eigen::VectorXcd a_dot_a(M);  // c_q = a_q^H a_dot_q
  Eigen::VectorXd dot_norm2(M);
  for (int q = 0; q < M; ++q) {
    basis[q].resize(N, 2);
    basis[q].col(kA) = scn.a_target(q);
    basis[q].col(kAdot) = scn.a_target_dot(q);
    a_dot_a(q) = scn.a_target(q).dot(scn.a_target_dot(q));
    dot_norm2(q) = scn.a_target_dot(q).squaredNorm();
  }
  const auto& alpha = scn.alpha;  // alpha(rx, tx)

  std::vector<Eigen::MatrixXcd> cores(d * (d + 1) / 2,
                                      Eigen::MatrixXcd::Zero(2 * M, 2));
  auto core_at = [&](int i, int j, int q) {
    const int idx = i * d - i * (i + 1) / 2 + j;
    return cores[idx].block(2 * q, 0, 2, 2);
  };

  // Gain-gain block: a pair only meets itself (distinct receive blocks are
  // orthogonal supports; distinct transmit APs decorrelate), contributing
  // N * a_tx a_tx^H on the transmit AP. Re/Re and Im/Im entries are equal;
  // Re/Im vanishes.
  for (int rx = 0; rx < M; ++rx) {
    for (int tx = 0; tx < M; ++tx) {
      core_at(layout.re_alpha(rx, tx), layout.re_alpha(rx, tx), tx)(kA, kA) +=
          static_cast<double>(N);
      core_at(layout.im_alpha(rx, tx), layout.im_alpha(rx, tx), tx)(kA, kA) +=
          static_cast<double>(N);
    }
  }

  // Gain-angle block. The derivative in theta_p touches the receive steering
  // vector on AP p's observation and the transmit steering vector of AP p in
  // every observation, leaving two surviving pairings:
  //   rx == p: alpha_tx^p * (a_p^H a_dot_p) * a_tx a_tx^H on the transmit AP;
  //   tx == p: N * alpha_p^rx * a_p a_dot_p^H on AP p.
  // The Im-gain rows carry the same coefficient times -j.
  for (int rx = 0; rx < M; ++rx) {
    for (int tx = 0; tx < M; ++tx) {
      const int i_re = layout.re_alpha(rx, tx);
      const int i_im = layout.im_alpha(rx, tx);
      for (int p = 0; p < M; ++p) {
        const int j_th = layout.theta(p);
        if (rx == p) {  // receive-side pairing, lands on the transmit AP
          Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
          z(kA, kA) = alpha(p, tx) * a_dot_a(p);
          core_at(i_re, j_th, tx) += z;
          core_at(i_im, j_th, tx) += cplx(0.0, -1.0) * z;
        }
        if (tx == p) {  // transmit-side pairing, lands on AP p itself
          Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
          z(kA, kAdot) = static_cast<double>(N) * alpha(rx, p);
          core_at(i_re, j_th, p) += z;
          core_at(i_im, j_th, p) += cplx(0.0, -1.0) * z;
        }
      }
    }
  }

  // Angle-angle diagonal. Three families on theta_p:
  //   monostatic: |alpha_p^p|^2 (a_dot a^H + a a_dot^H)^H (a_dot a^H + a a_dot^H)
  //     on AP p, expanded in the [a, a_dot] basis;
  //   transmit-side leakage into other receivers: N * sum_{rx != p}
  //     |alpha_p^rx|^2 * a_dot_p a_dot_p^H on AP p (outer product);
  //   receive-side echoes of other transmitters: |a_dot_p|^2 * |alpha_tx^p|^2
  //     * a_tx a_tx^H on each AP tx != p.
  for (int p = 0; p < M; ++p) {
    const int j = layout.theta(p);
    {
      Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
      const double g = std::norm(alpha(p, p));
      z(kA, kA) = g * dot_norm2(p);
      z(kA, kAdot) = g * std::conj(a_dot_a(p));
      z(kAdot, kA) = g * a_dot_a(p);
      z(kAdot, kAdot) = g * static_cast<double>(N);
      double leak = 0.0;
      for (int rx = 0; rx < M; ++rx) {
        if (rx != p) leak += std::norm(alpha(rx, p));
      }
      z(kAdot, kAdot) += static_cast<double>(N) * leak;
      core_at(j, j, p) += z;
    }
    for (int tx = 0; tx < M; ++tx) {
      if (tx == p) continue;
      Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
      z(kA, kA) = dot_norm2(p) * std::norm(alpha(p, tx));
      core_at(j, j, tx) += z;
    }
  }

  // Angle-angle off-diagonal (p < p'): the receive-side derivative of AP p's
  // observation meets the transmit-side derivative of AP p' (and vice versa).
  for (int p = 0; p < M; ++p) {
    for (int pp = p + 1; pp < M; ++pp) {
      const int i = layout.theta(p);
      const int j = layout.theta(pp);
      {
        Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
        z(kA, kAdot) = std::norm(alpha(p, pp)) * std::conj(a_dot_a(p));
        core_at(i, j, pp) += z;
      }
      {
        Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
        z(kAdot, kA) = std::norm(alpha(pp, p)) * a_dot_a(pp);
        core_at(i, j, p) += z;
      }
    }
  }

  // Hermitian-symmetrize every core: Re Tr(C T) = Tr(Herm(C) T) for the
  // Hermitian inputs the operator is evaluated at.
  for (auto& stack : cores) {
    for (int q = 0; q < M; ++q) {
      Eigen::Matrix2cd z = stack.block(2 * q, 0, 2, 2);
      stack.block(2 * q, 0, 2, 2) = (z + z.adjoint()) / 2.0;
    }
  }

  return FimOperator(layout, 2.0 / scn.config.sigma2_s, N,
                     scn.config.num_streams(), std::move(basis),
                     std::move(cores));
}

Eigen::MatrixXd evaluate_fim(const FimOperator& op, const LiftedVariables& vars) {
  const int M = op.n_aps();
  const int N = op.n_antennas();
  const int d = op.dim();
  // Per-AP compressed second moment: M_q = V_q^H (sum_s W_{q,s} + R_q) V_q.
  std::vector<Eigen::Matrix2cd> comp(M);
  for (int q = 0; q < M; ++q) {
    Eigen::MatrixXcd T = vars.R.at(q);
    for (const auto& w : vars.W) T += w.block(q * N, q * N, N, N);
    comp[q] = op.basis(q).adjoint() * T * op.basis(q);
  }
  Eigen::MatrixXd J(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double v = 0.0;
      for (int q = 0; q < M; ++q) {
        v += std::real((op.core(i, j, q) * comp[q]).trace());
      }
      v *= op.scale();
      J(i, j) = v;
      J(j, i) = v;
    }
  }
  return J + op.constant();
}

namespace {

Eigen::MatrixXd fim_inverse(const Eigen::MatrixXd& J) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lam_max = lam.maxCoeff();
  const double cutoff = std::max(lam_max, 0.0) * 1e-14;
  int rank = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cutoff) ++rank;
  }
  if (rank < lam.size() || !(lam_max > 0.0)) {
    std::ostringstream oss;
    oss << "information matrix is singular: rank " << rank << " of " << lam.size()
        << " (min eigenvalue " << lam.minCoeff() << ", max " << lam_max << ")";
    throw SingularFimError(oss.str(), rank, static_cast<int>(lam.size()));
  }
  return es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd crb_theta_from_fim(const Eigen::MatrixXd& J, const EtaLayout& layout) {
  const Eigen::MatrixXd Jinv = fim_inverse(J);
  Eigen::VectorXd crb(layout.M);
  for (int m = 0; m < layout.M; ++m) {
    crb(m) = std::sqrt(Jinv(layout.theta(m), layout.theta(m))) * 180.0 /
             std::numbers::pi;
  }
  return crb;
}

Eigen::VectorXd crb_theta(const FimOperator& op, const LiftedVariables& vars) {
  return crb_theta_from_fim(evaluate_fim(op, vars), op.layout());
}

double fim_trace_inverse(const Eigen::MatrixXd& J) {
  return fim_inverse(J).trace();
}

}  // namespace cfisac
