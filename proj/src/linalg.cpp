#include "lrsdp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "lrsdp/rng.hpp"

namespace lrsdp {

LinOpA::LinOpA(std::vector<SymMat> mats_in, Vector b_in) : mats(std::move(mats_in)), b(std::move(b_in)) {
  if (mats.empty()) throw DimensionError("LinOpA: need at least one constraint");
  const Eigen::Index dim = mats.front().n();
  for (const auto& m : mats) {
    if (m.n() != dim) throw DimensionError("LinOpA: constraint matrices must share dimension");
  }
  if (b.size() != k()) throw DimensionError("LinOpA: b length must equal constraint count");
  if (!b.allFinite()) throw std::invalid_argument("LinOpA: b must be finite");
}

SymMat sym_from_factor(const Factor& R) {
  if (!R.allFinite()) throw std::invalid_argument("sym_from_factor: factor must be finite");
  return SymMat(R * R.transpose());
}

Vector apply_lin_op(const LinOpA& A, const SymMat& X) {
  if (X.n() != A.n()) throw DimensionError("apply_lin_op: dimension mismatch");
  Vector out(A.k());
  for (Eigen::Index i = 0; i < A.k(); ++i)
    out(i) = A.mats[static_cast<std::size_t>(i)].mat().cwiseProduct(X.mat()).sum();
  return out;
}

SymMat adjoint_lin_op(const LinOpA& A, const Vector& y) {
  if (y.size() != A.k()) throw DimensionError("adjoint_lin_op: length mismatch");
  Matrix acc = Matrix::Zero(A.n(), A.n());
  for (Eigen::Index i = 0; i < A.k(); ++i)
    acc += y(i) * A.mats[static_cast<std::size_t>(i)].mat();
  return SymMat(acc);
}

Vector lin_op_factored(const LinOpA& A, const Factor& R, const Factor& D) {
  if (R.rows() != D.rows() || R.cols() != D.cols())
    throw DimensionError("lin_op_factored: shape mismatch");
  if (R.rows() != A.n()) throw DimensionError("lin_op_factored: dimension mismatch");
  Vector out(A.k());
  for (Eigen::Index i = 0; i < A.k(); ++i)
    out(i) = 2.0 * (A.mats[static_cast<std::size_t>(i)].mat() * R).cwiseProduct(D).sum();
  return out;
}

double lin_op_norm(const LinOpA& A, double tol, int max_iter) {
  if (tol <= 0) throw std::invalid_argument("lin_op_norm: tol must be positive");
  const Eigen::Index n = A.n();
  // Power iteration on T(X) = A^*(A(X)), a PSD operator on S^n whose top
  // eigenvalue is sigma_max^2. Seeded start keeps results reproducible.
  Rng rng(0x5eed11a6u);
  SymMat X(rng.normalMatrix(n, n));
  double norm0 = X.mat().norm();
  if (norm0 == 0) return 0.0;
  X = SymMat(X.mat() / norm0);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const SymMat TX = adjoint_lin_op(A, apply_lin_op(A, X));
    const double tnorm = TX.mat().norm();
    if (tnorm == 0) return 0.0;  // X in the kernel and nothing escapes: zero operator seed
    const double lambda_new = TX.mat().cwiseProduct(X.mat()).sum();
    const SymMat Xn(TX.mat() / tnorm);
    const double resid = (TX.mat() - lambda_new * X.mat()).norm();
    if (resid <= tol * std::max(1.0, std::abs(lambda_new)) &&
        std::abs(lambda_new - lambda) <= tol * std::max(1.0, std::abs(lambda_new))) {
      return std::sqrt(std::max(0.0, lambda_new));
    }
    lambda = lambda_new;
    X = Xn;
  }
  throw OpNormError("lin_op_norm: power iteration did not converge", std::sqrt(std::max(0.0, lambda)));
}

ProcrustesResult procrustes(const Factor& R, const Factor& Q) {
  if (R.rows() != Q.rows() || R.cols() != Q.cols())
    throw DimensionError("procrustes: shape mismatch");
  if (R.rows() < R.cols()) throw DimensionError("procrustes: need n >= r");
  Eigen::JacobiSVD<Matrix> svd(R.transpose() * Q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix U = svd.matrixU();
  Matrix V = svd.matrixV();
  // Deterministic gauge: flip (u_i, v_i) pairs together so the
  // largest-magnitude entry of u_i is positive.
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    Eigen::Index arg = 0;
    U.col(j).cwiseAbs().maxCoeff(&arg);
    if (U(arg, j) < 0) {
      U.col(j) = -U.col(j);
      V.col(j) = -V.col(j);
    }
  }
  ProcrustesResult out;
  out.omega = V * U.transpose();
  out.dist = (R - Q * out.omega).norm();
  return out;
}

double procrustes_distance_padded(const Factor& R, const Factor& Q) {
  if (R.rows() != Q.rows()) throw DimensionError("procrustes_distance_padded: row mismatch");
  const Eigen::Index r = std::max(R.cols(), Q.cols());
  Factor Rp = Factor::Zero(R.rows(), r);
  Factor Qp = Factor::Zero(Q.rows(), r);
  Rp.leftCols(R.cols()) = R;
  Qp.leftCols(Q.cols()) = Q;
  return procrustes(Rp, Qp).dist;
}

EigPair min_eigpair(const SymMat& S, double tol, int max_iter) {
  if (!S.mat().allFinite()) throw std::invalid_argument("min_eigpair: matrix must be finite");
  const Eigen::Index n = S.n();
  const double snorm = S.mat().norm();
  const double shift = snorm + 1.0;
  // Power iteration on (shift*I - S); its top eigenvector is the minimum
  // eigenvector of S and all shifted eigenvalues are >= 1 > 0.
  Rng rng(0x31f0e19u);
  Vector v = rng.normalVector(n);
  v.normalize();
  EigPair best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Vector w = shift * v - S.mat() * v;
    const double wn = w.norm();
    if (wn == 0) {
      // v is an exact eigenvector with eigenvalue equal to the shift center
      break;
    }
    w /= wn;
    const double value = w.dot(S.mat() * w);
    const double resid = (S.mat() * w - value * w).norm();
    if (resid < best.residual) {
      best.value = value;
      best.vector = w;
      best.residual = resid;
    }
    if (resid <= tol * (1.0 + snorm)) {
      Eigen::Index arg = 0;
      w.cwiseAbs().maxCoeff(&arg);
      if (w(arg) < 0) w = -w;
      return EigPair{value, w, resid};
    }
    v = w;
  }
  if (best.vector.size() == 0) {
    // Degenerate start (e.g., S proportional to identity); v itself is exact.
    const double value = v.dot(S.mat() * v);
    const double resid = (S.mat() * v - value * v).norm();
    if (resid <= tol * (1.0 + snorm)) {
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      return EigPair{value, v, resid};
    }
    best = EigPair{value, v, resid};
  }
  Eigen::Index arg = 0;
  best.vector.cwiseAbs().maxCoeff(&arg);
  if (best.vector(arg) < 0) best.vector = -best.vector;
  throw EigSolveError("min_eigpair: power iteration did not converge (residual " +
                          std::to_string(best.residual) + ")",
                      best);
}

PinvSolve pinv_solve(const Matrix& A, const Vector& rhs, double rel_threshold) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  PinvSolve out;
  out.sigma_max = sv.size() ? sv(0) : 0.0;
  out.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
  const double cutoff = rel_threshold * out.sigma_max;
  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0) {
      inv_sv(i) = 1.0 / sv(i);
    } else {
      out.rank_deficient = true;
    }
  }
  out.x = svd.matrixV() * inv_sv.asDiagonal() * (svd.matrixU().transpose() * rhs);
  return out;
}

MinNormElement min_norm_in_span_ball(const Matrix& M, const Vector& g, double radius,
                                     double tol) {
  MinNormElement out;
  PinvSolve ls = pinv_solve(M, g);
  out.rank_deficient = ls.rank_deficient;
  if (ls.x.norm() <= radius) {
    out.coefficient = -ls.x;
    out.element = g - M * ls.x;
    return out;
  }
  // Projected gradient on min_{||w|| <= radius} ||g + M w||^2 with the exact
  // Lipschitz stepsize; a small dense QP in the coefficient space.
  const Eigen::Index k = M.cols();
  const Matrix gram = M.transpose() * M;
  const Vector lin = M.transpose() * g;
  const double lip = std::max(gram.operatorNorm(), 1e-30);
  Vector w = Vector::Zero(k);
  for (int it = 0; it < 100000; ++it) {
    Vector w_next = w - (gram * w + lin) / lip;
    const double wn = w_next.norm();
    if (wn > radius) w_next *= radius / wn;
    const double step = (w_next - w).norm();
    w = w_next;
    if (step <= tol * (1.0 + radius)) break;
  }
  out.coefficient = w;
  out.element = g + M * w;
  return out;
}

void fix_column_signs(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0) m.col(j) = -m.col(j);
  }
}

Matrix orthogonal_complement(const Factor& R) {
  const Eigen::Index n = R.rows();
  const Eigen::Index r = R.cols();
  Eigen::HouseholderQR<Matrix> qr(R);
  const Matrix q = qr.householderQ();
  return q.rightCols(n - r);
}

double dual_nondegeneracy_gamma(const LinOpA& A, const Matrix& Q1) {
  const Eigen::Index r = Q1.cols();
  const Eigen::Index k = A.k();
  const Eigen::Index dim = r * (r + 1) / 2;
  // Row i holds the coordinates of Q1^T A_i Q1 in the orthonormal basis
  // {E_jj, (E_jl + E_lj)/sqrt(2)} of S^r.
  Matrix T(k, dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Matrix B = Q1.transpose() * A.mats[static_cast<std::size_t>(i)].mat() * Q1;
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < r; ++j) {
      T(i, col++) = B(j, j);
      for (Eigen::Index l = j + 1; l < r; ++l) T(i, col++) = std::sqrt(2.0) * B(j, l);
    }
  }
  Eigen::JacobiSVD<Matrix> svd(T);
  const Vector& sv = svd.singularValues();
  double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (k < dim) smin = 0.0;
  return smin * smin;
}

}  // namespace lrsdp
