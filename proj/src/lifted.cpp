#include "cfisac/lifted.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>
#include <stdexcept>

namespace cfisac {

LiftedVariables LiftedVariables::zeros(int n_antennas, int n_aps, int n_streams) {
  LiftedVariables v;
  const int nm = n_antennas * n_aps;
  v.W.assign(n_streams, Eigen::MatrixXcd::Zero(nm, nm));
  v.R.assign(n_aps, Eigen::MatrixXcd::Zero(n_antennas, n_antennas));
  return v;
}

void LiftedVariables::symmetrize() {
  for (auto& w : W) w = ((w + w.adjoint()) / 2.0).eval();
  for (auto& r : R) r = ((r + r.adjoint()) / 2.0).eval();
}

namespace {

void check_matrix(const Eigen::MatrixXcd& X, const std::string& name) {
  const double herm_err = (X - X.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > 1e-9) {
    std::ostringstream oss;
    oss << name << " is not Hermitian: max asymmetry " << herm_err;
    throw std::invalid_argument(oss.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(X, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  const double tr = X.real().trace();
  if (min_eig < -1e-7 * std::max(1.0, tr)) {
    std::ostringstream oss;
    oss << name << " is not PSD within tolerance: min eigenvalue " << min_eig
        << " vs trace " << tr;
    throw std::invalid_argument(oss.str());
  }
}

}  // namespace

void LiftedVariables::validate() const {
  for (size_t s = 0; s < W.size(); ++s) check_matrix(W[s], "W[" + std::to_string(s) + "]");
  for (size_t m = 0; m < R.size(); ++m) check_matrix(R[m], "R[" + std::to_string(m) + "]");
}

std::vector<Eigen::MatrixXcd> BeamformerSet::lift() const {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(f.size());
  for (const auto& fs : f) out.push_back(fs * fs.adjoint());
  return out;
}

}  // namespace cfisac
