#include "cfisac/conic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cfisac {

int ConicProblem::block_index(const std::string& name) const {
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].name == name) return static_cast<int>(b);
  }
  return -1;
}

ConicPoint ConicProblem::zero_point() const {
  ConicPoint p;
  p.mat.resize(blocks.size());
  p.vec.resize(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].kind == BlockKind::HermitianPsd) {
      p.mat[b] = Eigen::MatrixXcd::Zero(blocks[b].size, blocks[b].size);
    } else {
      p.vec[b] = Eigen::VectorXd::Zero(blocks[b].size);
    }
  }
  return p;
}

namespace {

void validate_term(const ConicProblem& pb, const Term& term, const std::string& where) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("ConicProblem: " + where + ": " + what);
  };
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if (t.block < 0 || t.block >= static_cast<int>(pb.blocks.size()))
          fail("term references undeclared block");
        const BlockSpec& spec = pb.blocks[t.block];
        if constexpr (std::is_same_v<T, LowRankTerm>) {
          if (spec.kind != BlockKind::HermitianPsd) fail("low-rank term on non-matrix block");
          const auto& pool = pb.pools.at(t.block);
          if (pool.rows() != spec.size) fail("pool row count mismatch");
          const int r = static_cast<int>(t.cols.size());
          if (t.Z.rows() != r || t.Z.cols() != r) fail("core size must match column count");
          for (int c : t.cols)
            if (c < 0 || c >= pool.cols()) fail("pool column out of range");
          if ((t.Z - t.Z.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + t.Z.cwiseAbs().maxCoeff()))
            fail("low-rank core must be Hermitian");
        } else if constexpr (std::is_same_v<T, DiagTerm>) {
          if (spec.kind != BlockKind::HermitianPsd) fail("diagonal term on non-matrix block");
          if (t.start < 0 || t.len <= 0 || t.start + t.len > spec.size)
            fail("diagonal range out of bounds");
        } else if constexpr (std::is_same_v<T, DenseTerm>) {
          if (spec.kind != BlockKind::HermitianPsd) fail("dense term on non-matrix block");
          if (t.A.rows() != spec.size || t.A.cols() != spec.size) fail("dense coefficient size mismatch");
          if ((t.A - t.A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + t.A.cwiseAbs().maxCoeff()))
            fail("dense coefficient must be Hermitian");
        } else if constexpr (std::is_same_v<T, ScalarTerm>) {
          if (spec.kind != BlockKind::Nonneg) fail("scalar term on non-vector block");
          if (t.index < 0 || t.index >= spec.size) fail("scalar index out of range");
        }
      },
      term);
}

}  // namespace

void ConicProblem::validate() const {
  if (pools.size() != blocks.size()) {
    throw std::invalid_argument("ConicProblem: pools must align with blocks (use empty pools)");
  }
  for (const auto& c : equalities)
    for (const auto& t : c.terms) validate_term(*this, t, "equality '" + c.name + "'");
  for (const auto& c : inequalities)
    for (const auto& t : c.terms) validate_term(*this, t, "inequality '" + c.name + "'");
  for (const auto& t : objective) validate_term(*this, t, "objective");
}

Eigen::MatrixXcd term_matrix(const ConicProblem& problem, const Term& term) {
  return std::visit(
      [&](const auto& t) -> Eigen::MatrixXcd {
        using T = std::decay_t<decltype(t)>;
        const int n = problem.blocks[t.block].size;
        if constexpr (std::is_same_v<T, LowRankTerm>) {
          Eigen::MatrixXcd V(n, t.cols.size());
          for (size_t c = 0; c < t.cols.size(); ++c) V.col(c) = problem.pools[t.block].col(t.cols[c]);
          return V * t.Z * V.adjoint();
        } else if constexpr (std::is_same_v<T, DiagTerm>) {
          Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
          for (int i = 0; i < t.len; ++i) A(t.start + i, t.start + i) = t.weight;
          return A;
        } else if constexpr (std::is_same_v<T, DenseTerm>) {
          return t.A;
        } else {
          // Scalar terms have no matrix form; represent on a 1x1 for callers
          // that materialize indiscriminately.
          return Eigen::MatrixXcd::Constant(1, 1, t.weight);
        }
      },
      term);
}

double eval_terms(const ConicProblem& problem, const std::vector<Term>& terms,
                  const ConicPoint& point) {
  double v = 0.0;
  for (const auto& term : terms) {
    v += std::visit(
        [&](const auto& t) -> double {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, LowRankTerm>) {
            const auto& X = point.mat[t.block];
            const auto& pool = problem.pools[t.block];
            const int r = static_cast<int>(t.cols.size());
            Eigen::MatrixXcd V(X.rows(), r);
            for (int c = 0; c < r; ++c) V.col(c) = pool.col(t.cols[c]);
            return std::real((t.Z * (V.adjoint() * X * V)).trace());
          } else if constexpr (std::is_same_v<T, DiagTerm>) {
            return t.weight *
                   point.mat[t.block].diagonal().segment(t.start, t.len).real().sum();
          } else if constexpr (std::is_same_v<T, DenseTerm>) {
            return std::real((t.A * point.mat[t.block]).trace());
          } else {
            return t.weight * point.vec[t.block](t.index);
          }
        },
        term);
  }
  return v;
}

PointCheck check_point(const ConicProblem& problem, const ConicPoint& point) {
  PointCheck out;
  out.min_matrix_eigenvalue_ratio = 0.0;
  out.min_nonneg_entry = 0.0;
  auto note_row = [&](const std::string& name, double viol) {
    if (out.worst_rows.size() < 8) {
      out.worst_rows.emplace_back(name, viol);
      std::sort(out.worst_rows.begin(), out.worst_rows.end(),
                [](const auto& a, const auto& b) { return a.second > b.second; });
    } else if (viol > out.worst_rows.back().second) {
      out.worst_rows.back() = {name, viol};
      std::sort(out.worst_rows.begin(), out.worst_rows.end(),
                [](const auto& a, const auto& b) { return a.second > b.second; });
    }
  };
  for (const auto& c : problem.equalities) {
    const double viol = std::abs(eval_terms(problem, c.terms, point) - c.rhs);
    out.max_equality_violation = std::max(out.max_equality_violation, viol);
    note_row(c.name, viol);
  }
  for (const auto& c : problem.inequalities) {
    const double viol = eval_terms(problem, c.terms, point) - c.rhs;
    out.max_inequality_violation = std::max(out.max_inequality_violation, viol);
    if (viol > 0) note_row(c.name, viol);
  }
  bool first = true;
  for (size_t b = 0; b < problem.blocks.size(); ++b) {
    if (problem.blocks[b].kind == BlockKind::HermitianPsd) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(point.mat[b], Eigen::EigenvaluesOnly);
      const double ratio =
          es.eigenvalues().minCoeff() / std::max(1.0, point.mat[b].real().trace());
      out.min_matrix_eigenvalue_ratio = first ? ratio : std::min(out.min_matrix_eigenvalue_ratio, ratio);
      first = false;
    } else if (point.vec[b].size() > 0) {
      out.min_nonneg_entry = std::min(out.min_nonneg_entry, point.vec[b].minCoeff());
    }
  }
  return out;
}

void export_problem(const ConicProblem& problem, std::ostream& os) {
  os << "conic-problem v1\n";
  os << "blocks " << problem.blocks.size() << "\n";
  for (const auto& b : problem.blocks) {
    os << (b.kind == BlockKind::HermitianPsd ? "hpsd " : "nonneg ") << b.size
       << ' ' << b.name << "\n";
  }
  auto write_terms = [&](const std::vector<Term>& terms) {
    os << terms.size() << "\n";
    for (const auto& term : terms) {
      std::visit(
          [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, LowRankTerm>) {
              os << "lowrank " << t.block << ' ' << t.cols.size();
              for (int c : t.cols) os << ' ' << c;
              for (int r = 0; r < t.Z.rows(); ++r)
                for (int c = 0; c < t.Z.cols(); ++c)
                  os << ' ' << t.Z(r, c).real() << ' ' << t.Z(r, c).imag();
              os << "\n";
            } else if constexpr (std::is_same_v<T, DiagTerm>) {
              os << "diag " << t.block << ' ' << t.start << ' ' << t.len << ' '
                 << t.weight << "\n";
            } else if constexpr (std::is_same_v<T, DenseTerm>) {
              os << "dense " << t.block;
              for (int r = 0; r < t.A.rows(); ++r)
                for (int c = 0; c < t.A.cols(); ++c)
                  os << ' ' << t.A(r, c).real() << ' ' << t.A(r, c).imag();
              os << "\n";
            } else {
              os << "scalar " << t.block << ' ' << t.index << ' ' << t.weight << "\n";
            }
          },
          term);
    }
  };
  os << "pools\n";
  for (size_t b = 0; b < problem.pools.size(); ++b) {
    const auto& pool = problem.pools[b];
    os << b << ' ' << pool.rows() << ' ' << pool.cols();
    for (int c = 0; c < pool.cols(); ++c)
      for (int r = 0; r < pool.rows(); ++r)
        os << ' ' << pool(r, c).real() << ' ' << pool(r, c).imag();
    os << "\n";
  }
  os << "objective\n";
  write_terms(problem.objective);
  os << "equalities " << problem.equalities.size() << "\n";
  for (const auto& c : problem.equalities) {
    os << c.name << ' ' << c.rhs << "\n";
    write_terms(c.terms);
  }
  os << "inequalities " << problem.inequalities.size() << "\n";
  for (const auto& c : problem.inequalities) {
    os << c.name << ' ' << c.rhs << "\n";
    write_terms(c.terms);
  }
}

}  // namespace cfisac
