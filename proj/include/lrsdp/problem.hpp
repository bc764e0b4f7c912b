#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrsdp/linalg.hpp"
#include "lrsdp/types.hpp"

namespace lrsdp {

// Smooth convex objective over S^n. Three concrete kinds:
//   Linear:        f(X) = <C, X>
//   QuadDistance:  f(X) = 0.5 * ||X - Y||_F^2
//   MatrixSensing: f(X) = (1/2N) * sum_i (<c_i c_i^T, X> - d_i)^2
struct Objective {
  enum class Kind { Linear, QuadDistance, MatrixSensing };

  Kind kind = Kind::Linear;
  SymMat C;                      // Linear
  SymMat Y;                      // QuadDistance
  std::vector<Vector> sensing;   // MatrixSensing: the vectors c_i
  Vector d;                      // MatrixSensing: observations

  static Objective linear(SymMat C);
  static Objective quadDistance(SymMat Y);
  static Objective matrixSensing(std::vector<Vector> c, Vector d);

  Eigen::Index sampleCount() const { return d.size(); }
};

// Planted primal/dual optimum used for ground-truth diagnostics.
struct Certificate {
  Factor R_star;   // n x r_star
  Vector y_star;   // length k
  SymMat Z_star;   // n x n
  int r_star = 0;
};

struct Instance {
  Eigen::Index n = 0;
  Objective objective;
  LinOpA constraints;
  std::optional<Certificate> certificate;
  std::optional<Vector> planted_signs;  // Z2 synchronization ground truth
  std::string name;
};

struct PenaltyParams {
  double lambda = 1.0;
  double feas_tol = 1e-9;  // feasible-branch test is feas <= feas_tol * (1 + ||b||)
};

double objective_value(const Objective& obj, const SymMat& X);
SymMat objective_grad(const Objective& obj, const SymMat& X);

// Penalized composite value phi(R) = f(RR^T) + lambda * ||A(RR^T) - b||_2.
struct PhiValue {
  double phi = 0.0;
  double f_val = 0.0;
  double feas = 0.0;  // ||A(RR^T) - b||_2
};
PhiValue phi_value(const Instance& inst, const Factor& R, const PenaltyParams& p);

// Gradient of the smooth part phi_f(R) = f(RR^T): 2 * grad f(RR^T) * R.
Factor phi_f_grad(const Instance& inst, const Factor& R);

// Constraint coefficient matrix M_R in R^{nr x k}, column i = vec(A_i R),
// with its smallest singular value.
struct JacobianMR {
  Matrix M;  // nr x k
  double sigma_min = 0.0;
};
JacobianMR constraint_jacobian_MR(const Instance& inst, const Factor& R);

// Minimum-norm subgradient of phi at R. On (numerically) feasible points the
// norm term contributes the set {M_R w : ||w|| <= 2 lambda}, so the minimum
// norm element is the projection of grad phi_f onto the orthogonal complement
// of span(M_R) whenever the unconstrained multiplier fits inside the ball,
// and a ball-constrained least-squares solution otherwise. On infeasible
// points phi is differentiable and the gradient is returned.
struct SubgradResult {
  Factor G;
  bool feasible_branch = false;
  bool rank_deficient = false;  // M_R pseudoinverse hit the rank threshold
  Vector multiplier;            // y with grad phi_f + 2 M_R y ~ 0 (feasible branch)
};
SubgradResult min_norm_subgrad(const Instance& inst, const Factor& R, const PenaltyParams& p);

// Prox-linear gradient mapping G_t = (R_next - R) / t.
Factor gradient_mapping(const Factor& R, const Factor& R_next, double t);

// Checks the Certificate invariants against the instance:
// primal feasibility to 1e-10, stationarity to 1e-8, Z_star >= -1e-10 I,
// complementarity <Z_star, X_star> <= 1e-8.
struct CertificateCheck {
  bool ok = false;
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  double min_eig_Z = 0.0;
  double complementarity = 0.0;
};
CertificateCheck validate_certificate(const Instance& inst, const Certificate& cert);

}  // namespace lrsdp
