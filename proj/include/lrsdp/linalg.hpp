#pragma once

#include <utility>
#include <vector>

#include "lrsdp/types.hpp"

namespace lrsdp {

// Linear constraint operator A: S^n -> R^k with [A(X)]_i = <A_i, X>,
// together with the right-hand side b.
struct LinOpA {
  std::vector<SymMat> mats;
  Vector b;

  LinOpA() = default;
  LinOpA(std::vector<SymMat> mats_in, Vector b_in);

  Eigen::Index k() const { return static_cast<Eigen::Index>(mats.size()); }
  Eigen::Index n() const { return mats.empty() ? 0 : mats.front().n(); }
};

// Materializes c(R) = R R^T, exactly symmetric by construction.
SymMat sym_from_factor(const Factor& R);

// [A(X)]_i = <A_i, X>.
Vector apply_lin_op(const LinOpA& A, const SymMat& X);

// A^*(y) = sum_i y_i A_i.
SymMat adjoint_lin_op(const LinOpA& A, const Vector& y);

// Component i equals 2 <A_i R, D>, the linearized constraint increment;
// agrees with apply_lin_op(A, R D^T + D R^T).
Vector lin_op_factored(const LinOpA& A, const Factor& R, const Factor& D);

// Largest singular value of X -> A(X) between the Frobenius and Euclidean
// norms, by power iteration on X -> A^*(A(X)). Throws OpNormError with the
// last estimate after max_iter non-converged sweeps.
double lin_op_norm(const LinOpA& A, double tol, int max_iter = 10000);

// Orthogonal Procrustes alignment: the rotation Omega minimizing
// ||R - Q Omega||_F over orthogonal Omega, via the SVD of R^T Q.
struct ProcrustesResult {
  Matrix omega;  // r x r orthogonal
  double dist;   // ||R - Q*omega||_F
};
ProcrustesResult procrustes(const Factor& R, const Factor& Q);

// Procrustes distance with zero-column padding so factors of unequal width
// can be compared (pads the narrower factor to the wider one).
double procrustes_distance_padded(const Factor& R, const Factor& Q);

// Minimum eigenpair of a symmetric matrix by shifted power iteration on
// (c I - S) with c = ||S||_F + 1. The returned pair satisfies
// residual <= tol * (1 + ||S||_F); otherwise EigSolveError carries the best
// pair found.
EigPair min_eigpair(const SymMat& S, double tol, int max_iter = 20000);

// Thresholded pseudoinverse solve: least-squares solution of min_x ||A x - b||
// discarding singular values below rel_threshold * sigma_max. Also used for
// projections onto the column span. Reports rank deficiency via the flag.
struct PinvSolve {
  Vector x;
  bool rank_deficient = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
PinvSolve pinv_solve(const Matrix& A, const Vector& rhs, double rel_threshold = 1e-10);

// Minimum-norm element of the affine ball image {g + M w : ||w||_2 <= radius}.
// Uses the thresholded pseudoinverse when the unconstrained coefficient fits
// inside the ball (the element is then the projection of g onto the
// orthogonal complement of span(M)), and a projected-gradient solve on the
// ball otherwise.
struct MinNormElement {
  Vector element;
  Vector coefficient;  // the minimizing w
  bool rank_deficient = false;
};
MinNormElement min_norm_in_span_ball(const Matrix& M, const Vector& g, double radius,
                                     double tol = 1e-10);

// Fixes the sign of each column so its largest-magnitude entry is positive.
void fix_column_signs(Matrix& m);

// Orthonormal basis of range(R)^perp (n x (n - r)), from a full QR.
Matrix orthogonal_complement(const Factor& R);

// Dual non-degeneracy constant: the smallest eigenvalue of the Gram map
// W -> sum_i <Q1^T A_i Q1, W>^2 over S^r, computed as sigma_min^2 of the
// k x r(r+1)/2 coefficient matrix in an orthonormal basis of S^r.
double dual_nondegeneracy_gamma(const LinOpA& A, const Matrix& Q1);

}  // namespace lrsdp
