// Primal-dual interior-point backend: Nesterov-Todd scaling with a Mehrotra
// predictor-corrector over products of Hermitian PSD blocks and nonnegative
// coordinates. The normal-equations matrix is assembled per block from
// pairwise inner products of the block's distinct (deduplicated) coefficient
// matrices, combined through a sparse row-incidence map, so per-iteration
// cost scales with the number of distinct coefficients rather than with the
// constraint count. Inequality rows receive internal slack coordinates in a
// trailing nonnegative block that never surfaces in the returned point.

#include "cfisac/ipm.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace cfisac {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepFraction = 0.99;
constexpr double kMinSigma = 1e-8;
constexpr double kTinyStep = 1e-5;
constexpr double kCertTol = 1e-7;

// ---------------------------------------------------------------------------
// Deduplicated per-block coefficient.

struct MatCoeff {
  enum class Kind { LowRank, Diag, Dense };
  Kind kind = Kind::LowRank;
  std::vector<int> cols;  // LowRank pool columns
  MatrixXcd Z;            // LowRank Hermitian core
  int start = 0;          // Diag range
  int len = 0;
  double weight = 1.0;    // Diag weight
  MatrixXcd A;            // Dense coefficient
};

uint64_t fnv_bytes(const void* p, size_t n, uint64_t h) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t matrix_hash(const MatrixXcd& M, uint64_t h) {
  const Eigen::Index r = M.rows();
  h = fnv_bytes(&r, sizeof r, h);
  return fnv_bytes(M.data(), sizeof(cplx) * M.size(), h);
}

uint64_t coeff_hash(const MatCoeff& c) {
  uint64_t h = 1469598103934665603ull;
  const int tag = static_cast<int>(c.kind);
  h = fnv_bytes(&tag, sizeof tag, h);
  switch (c.kind) {
    case MatCoeff::Kind::LowRank:
      h = fnv_bytes(c.cols.data(), sizeof(int) * c.cols.size(), h);
      h = matrix_hash(c.Z, h);
      break;
    case MatCoeff::Kind::Diag:
      h = fnv_bytes(&c.start, sizeof c.start, h);
      h = fnv_bytes(&c.len, sizeof c.len, h);
      h = fnv_bytes(&c.weight, sizeof c.weight, h);
      break;
    case MatCoeff::Kind::Dense:
      h = matrix_hash(c.A, h);
      break;
  }
  return h;
}

bool matrix_equal(const MatrixXcd& a, const MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(cplx) * a.size()) == 0;
}

bool coeff_equal(const MatCoeff& a, const MatCoeff& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case MatCoeff::Kind::LowRank:
      return a.cols == b.cols && matrix_equal(a.Z, b.Z);
    case MatCoeff::Kind::Diag:
      return a.start == b.start && a.len == b.len && a.weight == b.weight;
    case MatCoeff::Kind::Dense:
      return matrix_equal(a.A, b.A);
  }
  return false;
}

MatrixXcd gather(const MatrixXcd& M, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  MatrixXcd out(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = M(rows[i], cols[j]);
  return out;
}

MatrixXcd gather_cols(const MatrixXcd& M, const std::vector<int>& cols) {
  MatrixXcd out(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) out.col(j) = M.col(cols[j]);
  return out;
}

// Re<A, B> for Hermitian A, B stored densely.
double herm_inner(const MatrixXcd& A, const MatrixXcd& B) {
  return A.conjugate().cwiseProduct(B).sum().real();
}

// ---------------------------------------------------------------------------
// Internal block bookkeeping (user blocks plus an optional slack block).

struct Block {
  bool is_mat = false;
  int n = 0;
  MatrixXcd pool;                    // mat blocks: shared vectors (n x p)
  std::vector<MatCoeff> coeffs;      // mat blocks: distinct coefficients
  std::unordered_map<uint64_t, std::vector<int>> lookup;
  Eigen::SparseMatrix<double> omega; // m x L row-incidence (values d_j * mult)
  // vec blocks: per coordinate, the (row, d_j * weight) pairs touching it.
  std::vector<std::vector<std::pair<int, double>>> touch;
  MatrixXcd Cmat;  // objective coefficient
  VectorXd cvec;
  bool has_lowrank = false, has_diag = false, has_dense = false;
};

struct Point {
  std::vector<MatrixXcd> mat;
  std::vector<VectorXd> vec;
};

struct Scaling {
  // mat blocks
  MatrixXcd Lx, Ls;   // Cholesky factors of X and S
  MatrixXcd G, Ginv;  // NT scaling, X_hat = Ginv X Ginv^H = S_hat = diag(lam)
  MatrixXcd Wg;       // G G^H
  VectorXd lam;       // NT spectrum (mat) or sqrt(x s) (vec)
  VectorXd w;         // vec blocks: sqrt(x / s)
};

int term_block(const Term& t) {
  return std::visit([](const auto& v) { return v.block; }, t);
}

// ---------------------------------------------------------------------------

class Workspace {
 public:
  const ConicProblem& prob;
  int m_eq = 0, m_in = 0, m = 0;
  int nblocks = 0, slack = -1;
  std::vector<Block> blocks;
  std::vector<const LinearConstraint*> rows;
  VectorXd rowscale;  // d_j
  VectorXd bt;        // d_j * rhs_j
  double nu = 0.0;    // total cone dimension
  double normb = 0.0, normC = 0.0;

  explicit Workspace(const ConicProblem& p) : prob(p) {
    m_eq = static_cast<int>(p.equalities.size());
    m_in = static_cast<int>(p.inequalities.size());
    m = m_eq + m_in;
    const int nuser = static_cast<int>(p.blocks.size());
    slack = m_in > 0 ? nuser : -1;
    nblocks = nuser + (m_in > 0 ? 1 : 0);
    blocks.resize(nblocks);
    for (int b = 0; b < nuser; ++b) {
      Block& blk = blocks[b];
      blk.is_mat = p.blocks[b].kind == BlockKind::HermitianPsd;
      blk.n = p.blocks[b].size;
      if (blk.is_mat) {
        blk.pool = b < static_cast<int>(p.pools.size()) && p.pools[b].size() > 0
                       ? p.pools[b]
                       : MatrixXcd::Zero(blk.n, 0);
      } else {
        blk.touch.resize(blk.n);
      }
    }
    if (slack >= 0) {
      blocks[slack].is_mat = false;
      blocks[slack].n = m_in;
      blocks[slack].touch.resize(m_in);
    }

    rows.reserve(m);
    for (const auto& c : p.equalities) rows.push_back(&c);
    for (const auto& c : p.inequalities) rows.push_back(&c);

    // Exact row norms (materialized once) drive the row equilibration.
    rowscale.resize(m);
    bt.resize(m);
    for (int j = 0; j < m; ++j) {
      double n2 = j >= m_eq ? 1.0 : 0.0;  // slack coefficient
      std::map<int, MatrixXcd> acc;
      std::map<int, std::map<int, double>> vacc;
      for (const Term& t : rows[j]->terms) {
        if (const auto* s = std::get_if<ScalarTerm>(&t)) {
          vacc[s->block][s->index] += s->weight;
        } else {
          const int b = term_block(t);
          auto it = acc.find(b);
          if (it == acc.end())
            acc.emplace(b, term_matrix(prob, t));
          else
            it->second += term_matrix(prob, t);
        }
      }
      for (const auto& [b, M] : acc) n2 += M.squaredNorm();
      for (const auto& [b, mp] : vacc)
        for (const auto& [i, w] : mp) n2 += w * w;
      rowscale[j] = 1.0 / std::max(1e-8, std::sqrt(n2));
      bt[j] = rowscale[j] * rows[j]->rhs;
    }

    // Intern coefficients and build the per-block incidence maps.
    std::vector<std::vector<Eigen::Triplet<double>>> tri(nblocks);
    for (int j = 0; j < m; ++j) {
      for (const Term& t : rows[j]->terms) {
        if (const auto* s = std::get_if<ScalarTerm>(&t)) {
          blocks[s->block].touch[s->index].emplace_back(j,
                                                        rowscale[j] * s->weight);
          continue;
        }
        const int b = term_block(t);
        MatCoeff c;
        if (const auto* lr = std::get_if<LowRankTerm>(&t)) {
          c.kind = MatCoeff::Kind::LowRank;
          c.cols = lr->cols;
          c.Z = lr->Z;
        } else if (const auto* d = std::get_if<DiagTerm>(&t)) {
          c.kind = MatCoeff::Kind::Diag;
          c.start = d->start;
          c.len = d->len;
          c.weight = d->weight;
        } else {
          c.kind = MatCoeff::Kind::Dense;
          c.A = std::get<DenseTerm>(t).A;
        }
        const int id = intern(b, std::move(c));
        tri[b].emplace_back(j, id, rowscale[j]);
      }
    }
    if (slack >= 0)
      for (int i = 0; i < m_in; ++i)
        blocks[slack].touch[i].emplace_back(m_eq + i, rowscale[m_eq + i]);
    for (int b = 0; b < nblocks; ++b) {
      Block& blk = blocks[b];
      if (!blk.is_mat) continue;
      blk.omega.resize(m, static_cast<int>(blk.coeffs.size()));
      blk.omega.setFromTriplets(tri[b].begin(), tri[b].end());
    }

    // Objective.
    double c2 = 0.0;
    for (int b = 0; b < nblocks; ++b) {
      Block& blk = blocks[b];
      if (blk.is_mat)
        blk.Cmat = MatrixXcd::Zero(blk.n, blk.n);
      else
        blk.cvec = VectorXd::Zero(blk.n);
    }
    for (const Term& t : prob.objective) {
      if (const auto* s = std::get_if<ScalarTerm>(&t))
        blocks[s->block].cvec[s->index] += s->weight;
      else
        blocks[term_block(t)].Cmat += term_matrix(prob, t);
    }
    for (const Block& blk : blocks) {
      c2 += blk.is_mat ? blk.Cmat.squaredNorm() : blk.cvec.squaredNorm();
      nu += blk.n;
    }
    normC = std::sqrt(c2);
    normb = bt.norm();
  }

  int intern(int b, MatCoeff&& c) {
    Block& blk = blocks[b];
    const uint64_t h = coeff_hash(c);
    auto& bucket = blk.lookup[h];
    for (int id : bucket)
      if (coeff_equal(blk.coeffs[id], c)) return id;
    switch (c.kind) {
      case MatCoeff::Kind::LowRank: blk.has_lowrank = true; break;
      case MatCoeff::Kind::Diag: blk.has_diag = true; break;
      case MatCoeff::Kind::Dense: blk.has_dense = true; break;
    }
    blk.coeffs.push_back(std::move(c));
    const int id = static_cast<int>(blk.coeffs.size()) - 1;
    bucket.push_back(id);
    return id;
  }

  Point zero() const {
    Point p;
    p.mat.resize(nblocks);
    p.vec.resize(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      if (blocks[b].is_mat)
        p.mat[b] = MatrixXcd::Zero(blocks[b].n, blocks[b].n);
      else
        p.vec[b] = VectorXd::Zero(blocks[b].n);
    }
    return p;
  }

  Point identity(double tau) const {
    Point p = zero();
    for (int b = 0; b < nblocks; ++b) {
      if (blocks[b].is_mat)
        p.mat[b] = tau * MatrixXcd::Identity(blocks[b].n, blocks[b].n);
      else
        p.vec[b].setConstant(tau);
    }
    return p;
  }

  double dot(const Point& a, const Point& b) const {
    double v = 0.0;
    for (int i = 0; i < nblocks; ++i)
      v += blocks[i].is_mat ? herm_inner(a.mat[i], b.mat[i])
                            : a.vec[i].dot(b.vec[i]);
    return v;
  }

  double norm(const Point& a) const { return std::sqrt(std::max(0.0, dot(a, a))); }

  double eval_objective(const Point& x) const {
    double v = 0.0;
    for (int b = 0; b < nblocks; ++b)
      v += blocks[b].is_mat ? herm_inner(blocks[b].Cmat, x.mat[b])
                            : blocks[b].cvec.dot(x.vec[b]);
    return v;
  }

  // A(X) with equilibrated rows.
  VectorXd apply_A(const Point& x) const {
    VectorXd v = VectorXd::Zero(m);
    for (int b = 0; b < nblocks; ++b) {
      const Block& blk = blocks[b];
      if (blk.is_mat) {
        const int L = static_cast<int>(blk.coeffs.size());
        if (L == 0) continue;
        MatrixXcd T;
        if (blk.has_lowrank) T = blk.pool.adjoint() * x.mat[b] * blk.pool;
        VectorXd vals(L);
        for (int c = 0; c < L; ++c) {
          const MatCoeff& mc = blk.coeffs[c];
          switch (mc.kind) {
            case MatCoeff::Kind::LowRank:
              vals[c] = mc.Z.conjugate()
                            .cwiseProduct(gather(T, mc.cols, mc.cols))
                            .sum()
                            .real();
              break;
            case MatCoeff::Kind::Diag:
              vals[c] = mc.weight *
                        x.mat[b].diagonal().segment(mc.start, mc.len).sum().real();
              break;
            case MatCoeff::Kind::Dense:
              vals[c] = herm_inner(mc.A, x.mat[b]);
              break;
          }
        }
        for (int c = 0; c < L; ++c)
          for (Eigen::SparseMatrix<double>::InnerIterator it(blk.omega, c); it;
               ++it)
            v[it.row()] += it.value() * vals[c];
      } else {
        for (int i = 0; i < blk.n; ++i)
          for (const auto& [row, val] : blk.touch[i])
            v[row] += val * x.vec[b][i];
      }
    }
    return v;
  }

  // A^*(y) materialized blockwise (equilibrated rows).
  Point apply_At(const VectorXd& y) const {
    Point out = zero();
    for (int b = 0; b < nblocks; ++b) {
      const Block& blk = blocks[b];
      if (blk.is_mat) {
        const int L = static_cast<int>(blk.coeffs.size());
        if (L == 0) continue;
        VectorXd alpha = VectorXd::Zero(L);
        for (int c = 0; c < L; ++c)
          for (Eigen::SparseMatrix<double>::InnerIterator it(blk.omega, c); it;
               ++it)
            alpha[c] += it.value() * y[it.row()];
        MatrixXcd& M = out.mat[b];
        MatrixXcd Zfull;
        bool anyz = false;
        for (int c = 0; c < L; ++c) {
          if (alpha[c] == 0.0) continue;
          const MatCoeff& mc = blk.coeffs[c];
          switch (mc.kind) {
            case MatCoeff::Kind::LowRank: {
              if (!anyz) {
                Zfull = MatrixXcd::Zero(blk.pool.cols(), blk.pool.cols());
                anyz = true;
              }
              const int k = static_cast<int>(mc.cols.size());
              for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                  Zfull(mc.cols[i], mc.cols[j]) += alpha[c] * mc.Z(i, j);
              break;
            }
            case MatCoeff::Kind::Diag:
              for (int i = 0; i < mc.len; ++i)
                M(mc.start + i, mc.start + i) += alpha[c] * mc.weight;
              break;
            case MatCoeff::Kind::Dense:
              M += alpha[c] * mc.A;
              break;
          }
        }
        if (anyz) M += blk.pool * Zfull * blk.pool.adjoint();
        M = 0.5 * (M + M.adjoint()).eval();
      } else {
        for (int i = 0; i < blk.n; ++i)
          for (const auto& [row, val] : blk.touch[i])
            out.vec[b][i] += val * y[row];
      }
    }
    return out;
  }

  bool compute_scaling(const Point& X, const Point& S,
                       std::vector<Scaling>& sc) const {
    sc.resize(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      const Block& blk = blocks[b];
      Scaling& s = sc[b];
      if (blk.is_mat) {
        Eigen::LLT<MatrixXcd> cx(X.mat[b]);
        Eigen::LLT<MatrixXcd> cs(S.mat[b]);
        if (cx.info() != Eigen::Success || cs.info() != Eigen::Success)
          return false;
        s.Lx = cx.matrixL();
        s.Ls = cs.matrixL();
        Eigen::JacobiSVD<MatrixXcd> svd(s.Ls.adjoint() * s.Lx,
                                        Eigen::ComputeFullU |
                                            Eigen::ComputeFullV);
        s.lam = svd.singularValues();
        if (s.lam.minCoeff() <= 0.0) return false;
        const VectorXd isq = s.lam.cwiseSqrt().cwiseInverse();
        s.G = s.Lx * svd.matrixV() * isq.asDiagonal();
        s.Ginv = isq.asDiagonal() * svd.matrixU().adjoint() * s.Ls.adjoint();
        s.Wg = s.G * s.G.adjoint();
      } else {
        if ((X.vec[b].array() <= 0.0).any() || (S.vec[b].array() <= 0.0).any())
          return false;
        s.w = (X.vec[b].array() / S.vec[b].array()).sqrt();
        s.lam = (X.vec[b].array() * S.vec[b].array()).sqrt();
      }
    }
    return true;
  }

  // Pairwise inner product of two scaled coefficients on one block.
  // P = pool^H Wg pool, GY = Wg pool; both precomputed per iteration.
  double pair_value(const Block& blk, const Scaling& sc, const MatrixXcd& P,
                    const MatrixXcd& GY, const std::vector<MatrixXcd>& Dhat,
                    const std::vector<int>& dense_pos, int a, int b) const {
    const MatCoeff* ca = &blk.coeffs[a];
    const MatCoeff* cb = &blk.coeffs[b];
    int ia = a, ib = b;
    if (static_cast<int>(ca->kind) > static_cast<int>(cb->kind)) {
      std::swap(ca, cb);
      std::swap(ia, ib);
    }
    using K = MatCoeff::Kind;
    if (ca->kind == K::LowRank && cb->kind == K::LowRank) {
      const MatrixXcd Pab = gather(P, ca->cols, cb->cols);
      const MatrixXcd Pba = gather(P, cb->cols, ca->cols);
      return (ca->Z * Pab * cb->Z).cwiseProduct(Pba.transpose()).sum().real();
    }
    if (ca->kind == K::LowRank && cb->kind == K::Diag) {
      const MatrixXcd B =
          gather_cols(GY.middleRows(cb->start, cb->len), ca->cols);
      const MatrixXcd Gm = B.adjoint() * B;
      return cb->weight * ca->Z.cwiseProduct(Gm.transpose()).sum().real();
    }
    if (ca->kind == K::LowRank && cb->kind == K::Dense) {
      const MatrixXcd GYa = gather_cols(GY, ca->cols);
      const MatrixXcd Q = GYa.adjoint() * cb->A * GYa;
      return ca->Z.cwiseProduct(Q.transpose()).sum().real();
    }
    if (ca->kind == K::Diag && cb->kind == K::Diag) {
      return ca->weight * cb->weight *
             sc.Wg.block(ca->start, cb->start, ca->len, cb->len).squaredNorm();
    }
    if (ca->kind == K::Diag && cb->kind == K::Dense) {
      const MatrixXcd T1 = sc.Wg.middleRows(ca->start, ca->len) * cb->A;
      return ca->weight *
             T1.cwiseProduct(sc.Wg.middleCols(ca->start, ca->len).transpose())
                 .sum()
                 .real();
    }
    // Dense x Dense through the scaled transforms.
    return Dhat[dense_pos[ia]]
        .cwiseProduct(Dhat[dense_pos[ib]].conjugate())
        .sum()
        .real();
  }

  void assemble_schur(const std::vector<Scaling>& sc, MatrixXd& H) const {
    H.setZero(m, m);
    for (int b = 0; b < nblocks; ++b) {
      const Block& blk = blocks[b];
      if (blk.is_mat) {
        const int L = static_cast<int>(blk.coeffs.size());
        if (L == 0) continue;
        const Scaling& s = sc[b];
        MatrixXcd P, GY;
        if (blk.has_lowrank) {
          GY = s.Wg * blk.pool;
          P = blk.pool.adjoint() * GY;
        }
        std::vector<MatrixXcd> Dhat;
        std::vector<int> dense_pos(L, -1);
        if (blk.has_dense) {
          for (int c = 0; c < L; ++c)
            if (blk.coeffs[c].kind == MatCoeff::Kind::Dense) {
              dense_pos[c] = static_cast<int>(Dhat.size());
              Dhat.push_back(s.G.adjoint() * blk.coeffs[c].A * s.G);
            }
        }
        MatrixXd Mb(L, L);
        for (int i = 0; i < L; ++i)
          for (int j = i; j < L; ++j) {
            const double v = pair_value(blk, s, P, GY, Dhat, dense_pos, i, j);
            Mb(i, j) = v;
            Mb(j, i) = v;
          }
        const MatrixXd OM = blk.omega * Mb;
        for (int c = 0; c < L; ++c)
          for (Eigen::SparseMatrix<double>::InnerIterator it(blk.omega, c); it;
               ++it)
            H.col(it.row()).noalias() += it.value() * OM.col(c);
      } else {
        const Scaling& s = sc[b];
        for (int i = 0; i < blk.n; ++i) {
          const double w2 = s.w[i] * s.w[i];
          const auto& lst = blk.touch[i];
          for (size_t p = 0; p < lst.size(); ++p)
            for (size_t q = p; q < lst.size(); ++q) {
              const double v = lst[p].second * lst[q].second * w2;
              H(lst[p].first, lst[q].first) += v;
              if (lst[p].first != lst[q].first)
                H(lst[q].first, lst[p].first) += v;
            }
        }
      }
    }
  }

  // unscale: X = G Xhat G^H (mat), x = w .* xhat (vec).
  Point unscale(const std::vector<Scaling>& sc,
                const std::vector<MatrixXcd>& mhat,
                const std::vector<VectorXd>& vhat) const {
    Point p = zero();
    for (int b = 0; b < nblocks; ++b) {
      if (blocks[b].is_mat)
        p.mat[b] = sc[b].G * mhat[b] * sc[b].G.adjoint();
      else
        p.vec[b] = sc[b].w.asDiagonal() * vhat[b];
    }
    return p;
  }

  // Largest step alpha with Z + alpha * dZ staying in the cone, per the
  // Cholesky factor L of Z.
  double step_to_boundary(const Point& Z, const Point& dZ,
                          const std::vector<Scaling>& sc, bool primal) const {
    double alpha = kInf;
    for (int b = 0; b < nblocks; ++b) {
      if (blocks[b].is_mat) {
        const MatrixXcd& L = primal ? sc[b].Lx : sc[b].Ls;
        const MatrixXcd A1 = L.triangularView<Eigen::Lower>().solve(dZ.mat[b]);
        const MatrixXcd T =
            L.triangularView<Eigen::Lower>().solve(A1.adjoint()).adjoint();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es;
        es.compute(0.5 * (T + T.adjoint()), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()[0];
        if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
      } else {
        for (int i = 0; i < blocks[b].n; ++i)
          if (dZ.vec[b][i] < 0.0)
            alpha = std::min(alpha, -Z.vec[b][i] / dZ.vec[b][i]);
      }
    }
    return alpha;
  }
};

struct Directions {
  Point dX, dS;
  VectorXd dy;
  std::vector<MatrixXcd> dXh, dSh;  // scaled copies (mat blocks)
  std::vector<VectorXd> dxh, dsh;   // scaled copies (vec blocks)
};

// Solve the Newton system for the given complementarity target Rcp (scaled
// space, per block) using the factorized Schur complement.
Directions solve_newton(const Workspace& ws, const std::vector<Scaling>& sc,
                        const Eigen::LLT<MatrixXd>& llt, const MatrixXd& H,
                        const VectorXd& rp, const Point& Rd,
                        const std::vector<MatrixXcd>& RcpM,
                        const std::vector<VectorXd>& RcpV) {
  Directions d;
  // rhs = rp - A(unscale(Rcp)) + A(Wg Rd Wg).
  const Point Uc = ws.unscale(sc, RcpM, RcpV);
  Point WRW = ws.zero();
  for (int b = 0; b < ws.nblocks; ++b) {
    if (ws.blocks[b].is_mat)
      WRW.mat[b] = sc[b].Wg * Rd.mat[b] * sc[b].Wg;
    else
      WRW.vec[b] =
          (sc[b].w.array() * sc[b].w.array() * Rd.vec[b].array()).matrix();
  }
  VectorXd rhs = rp - ws.apply_A(Uc) + ws.apply_A(WRW);
  d.dy = llt.solve(rhs);
  d.dy += llt.solve(rhs - H * d.dy);  // one step of iterative refinement

  const Point Adj = ws.apply_At(d.dy);
  d.dX = ws.zero();
  d.dS = ws.zero();
  d.dXh.resize(ws.nblocks);
  d.dSh.resize(ws.nblocks);
  d.dxh.resize(ws.nblocks);
  d.dsh.resize(ws.nblocks);
  for (int b = 0; b < ws.nblocks; ++b) {
    if (ws.blocks[b].is_mat) {
      d.dS.mat[b] = Rd.mat[b] - Adj.mat[b];
      d.dSh[b] = sc[b].G.adjoint() * d.dS.mat[b] * sc[b].G;
      d.dXh[b] = RcpM[b] - d.dSh[b];
      d.dX.mat[b] = sc[b].G * d.dXh[b] * sc[b].G.adjoint();
    } else {
      d.dS.vec[b] = Rd.vec[b] - Adj.vec[b];
      d.dsh[b] = sc[b].w.asDiagonal() * d.dS.vec[b];
      d.dxh[b] = RcpV[b] - d.dsh[b];
      d.dX.vec[b] = sc[b].w.asDiagonal() * d.dxh[b];
    }
  }
  return d;
}

class IpmBackend final : public ConicBackend {
 public:
  BackendResult solve(const ConicProblem& problem,
                      const SolverOptions& options) override;
  std::string name() const override { return "nt-ipm"; }
};

BackendResult IpmBackend::solve(const ConicProblem& problem,
                                const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  Workspace ws(problem);
  BackendResult res;
  res.X = problem.zero_point();
  res.S = problem.zero_point();
  res.y = VectorXd::Zero(ws.m);

  auto finish = [&](BackendStatus st, const Point& X, const Point& S,
                    const VectorXd& y, int iters, const std::string& detail) {
    res.status = st;
    res.iterations = iters;
    res.detail = detail;
    const int nuser = static_cast<int>(problem.blocks.size());
    for (int b = 0; b < nuser; ++b) {
      if (ws.blocks[b].is_mat)
        res.X.mat[b] = 0.5 * (X.mat[b] + X.mat[b].adjoint());
      else
        res.X.vec[b] = X.vec[b];
      if (ws.blocks[b].is_mat)
        res.S.mat[b] = 0.5 * (S.mat[b] + S.mat[b].adjoint());
      else
        res.S.vec[b] = S.vec[b];
    }
    for (int j = 0; j < ws.m; ++j) res.y[j] = ws.rowscale[j] * y[j];
    res.primal_objective = ws.eval_objective(X);
    res.dual_objective = ws.bt.dot(y);
    res.rel_gap = std::abs(res.primal_objective - res.dual_objective) /
                  (1.0 + std::abs(res.primal_objective) +
                   std::abs(res.dual_objective));
    // Residuals of the point actually returned (it may be an earlier best
    // iterate), in the same scaled metric the stopping tests use.
    res.primal_residual =
        (ws.bt - ws.apply_A(X)).norm() / (1.0 + ws.normb);
    {
      const Point Aty = ws.apply_At(y);
      double rd2 = 0.0;
      for (int b = 0; b < ws.nblocks; ++b) {
        if (ws.blocks[b].is_mat)
          rd2 += (ws.blocks[b].Cmat - Aty.mat[b] - S.mat[b]).squaredNorm();
        else
          rd2 += (ws.blocks[b].cvec - Aty.vec[b] - S.vec[b]).squaredNorm();
      }
      res.dual_residual = std::sqrt(rd2) / (1.0 + ws.normC);
    }
    if (options.self_check) res.check = check_point(problem, res.X);
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
  };

  if (ws.m == 0) {
    // Degenerate: no constraints; X = 0 is optimal iff C is PSD.
    Point X = ws.zero();
    Point S = ws.zero();
    bool psd = true;
    for (int b = 0; b < ws.nblocks; ++b) {
      if (ws.blocks[b].is_mat) {
        S.mat[b] = ws.blocks[b].Cmat;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(S.mat[b]);
        if (es.eigenvalues().minCoeff() < -1e-12) psd = false;
      } else {
        S.vec[b] = ws.blocks[b].cvec;
        if ((S.vec[b].array() < -1e-12).any()) psd = false;
      }
    }
    return finish(psd ? BackendStatus::Optimal : BackendStatus::DualInfeasible,
                  X, S, VectorXd::Zero(0), 0,
                  psd ? "unconstrained; zero point optimal"
                      : "unconstrained with indefinite objective");
  }

  const double tau_p = 1.0 + ws.bt.cwiseAbs().maxCoeff();
  double cmax = 0.0;
  for (const Block& blk : ws.blocks)
    cmax = std::max(cmax, blk.is_mat
                              ? (blk.Cmat.size() > 0
                                     ? blk.Cmat.cwiseAbs().maxCoeff()
                                     : 0.0)
                              : (blk.cvec.size() > 0
                                     ? blk.cvec.cwiseAbs().maxCoeff()
                                     : 0.0));
  const double tau_d = 1.0 + cmax;

  Point X = ws.identity(tau_p);
  Point S = ws.identity(tau_d);
  VectorXd y = VectorXd::Zero(ws.m);

  Point bestX = X, bestS = S;
  VectorXd besty = y;
  double best_score = kInf;
  int best_iter = 0;

  std::vector<Scaling> sc;
  MatrixXd H;
  std::vector<double> mu_hist;
  int tiny_steps = 0;

  for (int iter = 0; iter <= options.max_iters; ++iter) {
    // Residuals and objective gap at the current point.
    const VectorXd rp = ws.bt - ws.apply_A(X);
    const Point Aty = ws.apply_At(y);
    Point Rd = ws.zero();
    double rd2 = 0.0, rayres2 = 0.0;
    for (int b = 0; b < ws.nblocks; ++b) {
      if (ws.blocks[b].is_mat) {
        Rd.mat[b] = ws.blocks[b].Cmat - Aty.mat[b] - S.mat[b];
        rd2 += Rd.mat[b].squaredNorm();
        rayres2 += (Aty.mat[b] + S.mat[b]).squaredNorm();
      } else {
        Rd.vec[b] = ws.blocks[b].cvec - Aty.vec[b] - S.vec[b];
        rd2 += Rd.vec[b].squaredNorm();
        rayres2 += (Aty.vec[b] + S.vec[b]).squaredNorm();
      }
    }
    const double pobj = ws.eval_objective(X);
    const double dobj = ws.bt.dot(y);
    const double pres = rp.norm() / (1.0 + ws.normb);
    const double dres = std::sqrt(rd2) / (1.0 + ws.normC);
    const double gap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = std::max(0.0, ws.dot(X, S)) / ws.nu;
    mu_hist.push_back(mu);

    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(mu))
      return finish(BackendStatus::Stalled, bestX, bestS, besty, iter,
                    "non-finite iterate");

    const double score = std::max({pres, dres, gap});
    if (score < best_score) {
      best_score = score;
      bestX = X;
      bestS = S;
      besty = y;
      best_iter = iter;
    }

    if (options.verbose) {
      std::ostringstream os;
      os << "ipm it=" << std::setw(3) << iter << std::scientific
         << std::setprecision(2) << " mu=" << mu << " pres=" << pres
         << " dres=" << dres << " gap=" << gap << "\n";
      std::cerr << os.str();
    }

    if (pres < options.tol && dres < options.tol && gap < options.tol) {
      std::ostringstream os;
      os << "optimal: pres=" << std::scientific << std::setprecision(2) << pres
         << " dres=" << dres << " gap=" << gap << " iters=" << iter;
      return finish(BackendStatus::Optimal, X, S, y, iter, os.str());
    }

    // Farkas-type certificates. Primal infeasibility: y with A^*(y) + S ~ 0,
    // S >= 0, b^T y > 0. Dual infeasibility: X >= 0 with A(X) ~ 0, <C,X> < 0.
    const double by = ws.bt.dot(y);
    const double ynorm = y.norm();
    if (by > 1e-12) {
      const double rayres = std::sqrt(rayres2) / by;
      if (rayres <= kCertTol * (1.0 + ynorm / by)) {
        std::ostringstream os;
        os << "primal infeasibility certificate: |A*(y)+S|/(b^T y)="
           << std::scientific << std::setprecision(2) << rayres;
        return finish(BackendStatus::PrimalInfeasible, X, S, y, iter, os.str());
      }
    }
    const double xnorm = ws.norm(X);
    if (pobj < -1e-12) {
      const double ax = (ws.bt - rp).norm() / (-pobj);
      if (ax <= kCertTol * (1.0 + xnorm / (-pobj)) && xnorm > 1e4 * tau_p) {
        return finish(BackendStatus::DualInfeasible, X, S, y, iter,
                      "unbounded ray certificate");
      }
    }

    auto stalled = [&](const std::string& why) {
      if (best_score <= 100.0 * options.tol) {
        std::ostringstream os;
        os << "converged to reduced precision (" << why
           << "): max residual=" << std::scientific << std::setprecision(2)
           << best_score << " at iter " << best_iter;
        return finish(BackendStatus::Optimal, bestX, bestS, besty, iter,
                      os.str());
      }
      return finish(BackendStatus::Stalled, bestX, bestS, besty, iter, why);
    };

    if (iter == options.max_iters) {
      if (best_score <= 100.0 * options.tol)
        return stalled("iteration limit");
      return finish(BackendStatus::IterationLimit, bestX, bestS, besty, iter,
                    "iteration limit reached");
    }
    if (mu_hist.size() >= 9 && !(mu < 0.95 * mu_hist[mu_hist.size() - 9]) &&
        score > options.tol)
      return stalled("no centrality progress over 8 iterations");

    if (!ws.compute_scaling(X, S, sc)) return stalled("iterate left the cone");

    ws.assemble_schur(sc, H);
    Eigen::LLT<MatrixXd> llt;
    double ridge = 0.0;
    const double hmax = H.diagonal().cwiseAbs().maxCoeff();
    llt.compute(H);
    if (llt.info() != Eigen::Success) {
      ridge = 1e-14 * std::max(1.0, hmax);
      while (ridge <= 1e-6 * std::max(1.0, hmax)) {
        MatrixXd Hr = H;
        Hr.diagonal().array() += ridge;
        llt.compute(Hr);
        if (llt.info() == Eigen::Success) break;
        ridge *= 100.0;
      }
      if (llt.info() != Eigen::Success)
        return stalled("normal equations factorization failed");
    }

    // Predictor: pure affine-scaling target.
    std::vector<MatrixXcd> RcpM(ws.nblocks);
    std::vector<VectorXd> RcpV(ws.nblocks);
    for (int b = 0; b < ws.nblocks; ++b) {
      if (ws.blocks[b].is_mat) {
        RcpM[b] = MatrixXcd::Zero(ws.blocks[b].n, ws.blocks[b].n);
        RcpM[b].diagonal() = -sc[b].lam.cast<cplx>();
      } else {
        RcpV[b] = -sc[b].lam;
      }
    }
    const Directions aff = solve_newton(ws, sc, llt, H, rp, Rd, RcpM, RcpV);
    const double ap_aff =
        std::min(1.0, ws.step_to_boundary(X, aff.dX, sc, true));
    const double ad_aff =
        std::min(1.0, ws.step_to_boundary(S, aff.dS, sc, false));
    const double mu_aff =
        std::max(0.0, ws.dot(X, S) + ad_aff * ws.dot(X, aff.dS) +
                          ap_aff * ws.dot(aff.dX, S) +
                          ap_aff * ad_aff * ws.dot(aff.dX, aff.dS)) /
        ws.nu;
    const double sigma =
        std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), kMinSigma, 1.0);

    // Corrector: recentered target with the second-order term.
    for (int b = 0; b < ws.nblocks; ++b) {
      if (ws.blocks[b].is_mat) {
        const int n = ws.blocks[b].n;
        const MatrixXcd HOT =
            0.5 * (aff.dXh[b] * aff.dSh[b] + aff.dSh[b] * aff.dXh[b]);
        MatrixXcd R(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            cplx v = -HOT(i, j);
            if (i == j)
              v += cplx(sigma * mu - sc[b].lam[i] * sc[b].lam[i], 0.0);
            R(i, j) = 2.0 * v / (sc[b].lam[i] + sc[b].lam[j]);
          }
        RcpM[b] = 0.5 * (R + R.adjoint());
      } else {
        RcpV[b] = (sigma * mu - sc[b].lam.array().square() -
                   aff.dxh[b].array() * aff.dsh[b].array())
                      .matrix()
                      .cwiseQuotient(sc[b].lam);
      }
    }
    const Directions dir = solve_newton(ws, sc, llt, H, rp, Rd, RcpM, RcpV);
    const double ap =
        std::min(1.0, kStepFraction * ws.step_to_boundary(X, dir.dX, sc, true));
    const double ad = std::min(
        1.0, kStepFraction * ws.step_to_boundary(S, dir.dS, sc, false));

    if (options.verbose) {
      std::ostringstream os;
      os << "    sigma=" << std::scientific << std::setprecision(2) << sigma
         << " ap=" << ap << " ad=" << ad;
      if (ridge > 0.0) os << " ridge=" << ridge;
      os << "\n";
      std::cerr << os.str();
    }

    if (ap < kTinyStep && ad < kTinyStep) {
      if (++tiny_steps >= 2) return stalled("step lengths collapsed");
    } else {
      tiny_steps = 0;
    }

    for (int b = 0; b < ws.nblocks; ++b) {
      if (ws.blocks[b].is_mat) {
        X.mat[b] += ap * dir.dX.mat[b];
        X.mat[b] = 0.5 * (X.mat[b] + X.mat[b].adjoint()).eval();
        S.mat[b] += ad * dir.dS.mat[b];
        S.mat[b] = 0.5 * (S.mat[b] + S.mat[b].adjoint()).eval();
      } else {
        X.vec[b] += ap * dir.dX.vec[b];
        S.vec[b] += ad * dir.dS.vec[b];
      }
    }
    y += ad * dir.dy;
  }

  return finish(BackendStatus::IterationLimit, bestX, bestS, besty,
                options.max_iters, "iteration limit reached");
}

}  // namespace

std::unique_ptr<ConicBackend> make_ipm_backend() {
  return std::make_unique<IpmBackend>();
}

}  // namespace cfisac
