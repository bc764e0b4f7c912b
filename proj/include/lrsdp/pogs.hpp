#pragma once

#include <memory>

#include "lrsdp/problem.hpp"

namespace lrsdp {

// One prox-linear subproblem at base point R with stepsize t and penalty
// lambda: minimize over Delta
//
//   f(RR^T + R Delta^T + Delta R^T)
//     + lambda * || A(RR^T) + 2 A(R Delta^T) - b ||_2
//     + (1/2t) * ||Delta||_F^2.
//
// Immutable after construction; caches the quantities every evaluation needs.
class Subproblem {
 public:
  Subproblem(const Instance& inst, Factor R, double t, double lambda);

  const Instance& instance() const { return *inst_; }
  const Factor& base() const { return R_; }
  double t() const { return t_; }
  double lambda() const { return lambda_; }
  Eigen::Index n() const { return R_.rows(); }
  Eigen::Index r() const { return R_.cols(); }
  Eigen::Index k() const { return inst_->constraints.k(); }

  const SymMat& baseX() const { return X0_; }
  const Vector& residual0() const { return r0_; }       // A(RR^T) - b
  const Factor& smoothGrad0() const { return g0_; }     // gradient of the f-model at 0
  const Matrix& gram() const { return gram_; }          // R^T R

  // z(Delta) = 2 A(R Delta^T), the graph map of the linearized constraint.
  Vector graphMap(const Factor& delta) const;
  // Adjoint of the graph map, as an n x r matrix: 2 A^*(z) R.
  Factor graphAdjoint(const Vector& z) const;
  // Dense k x nr matrix of the graph map (2 M_R^T). Built on demand.
  Matrix graphMatrix() const;

  // Model value at Delta.
  double modelValue(const Factor& delta) const;
  // Gradient of the smooth block h(Delta) = f-model + ||Delta||^2/(2t).
  Factor smoothBlockGrad(const Factor& delta) const;
  // Hessian map of the f-model (zero for linear objectives).
  Factor smoothHessian(const Factor& delta) const;

  // Distance from 0 to the subdifferential of the model at Delta, with the
  // same feasible/infeasible branch logic as min_norm_subgrad.
  double modelOptimalityResidual(const Factor& delta) const;

 private:
  const Instance* inst_;
  Factor R_;
  double t_;
  double lambda_;
  SymMat X0_;
  Vector r0_;
  Factor g0_;
  Matrix gram_;
  double f0_ = 0.0;
  // MatrixSensing caches: base residuals and u_i = R^T c_i.
  Vector sense_res_;
  Matrix sense_u_;  // r x N
};

struct PogsParams {
  double rho = 0.0;  // <= 0 means "use lambda"
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_iter = 5000;
  enum class Projection { Auto, Direct, Cg };
  Projection projection_mode = Projection::Auto;
  double cg_tol = 1e-12;
  int cg_max_iter = 2000;
};

struct PogsResult {
  Factor delta;
  int iterations = 0;
  double primal_res = 0.0;
  double dual_res = 0.0;
  bool converged = false;
  double model_value = 0.0;
  double opt_residual = 0.0;   // model subdifferential distance at delta
  bool tail_monotone = true;   // diagnostic: combined residual non-increasing
                               // (10% slack) over the last 20% of iterations
};

// Proximal map of g(z) = w * ||z + a||_2: argmin_z g(z) + 0.5 ||z - v||^2.
Vector prox_norm_offset(const Vector& v, const Vector& a, double w);

// Proximal map of the smooth block for linear objectives, in closed form:
// Delta = (rho v - 2 C R) / (1/t + rho).
Factor prox_h_linear(const Subproblem& sub, const Factor& v, double rho);

// Proximal map of the smooth block for QuadDistance / MatrixSensing
// objectives by conjugate gradient on the stationarity system
// grad h(Delta) + rho (Delta - v) = 0, matrix-free. The returned Delta
// satisfies ||grad h(Delta) + rho (Delta - v)|| <= cg_tol * (1 + ||rho v||).
// Throws CgError carrying the best iterate on non-convergence.
Factor prox_h_quadratic(const Subproblem& sub, const Factor& v, double rho, double cg_tol,
                        int cg_max_iter);

// Projection onto the graph set {(z, Delta) : z = 2 A(R Delta^T)}.
std::pair<Vector, Factor> project_graph(const Vector& z, const Factor& d, const Subproblem& sub,
                                        PogsParams::Projection mode, double cg_tol,
                                        int cg_max_iter);

// Solves the subproblem by Proximal Operator Graph Splitting (scaled-form
// ADMM alternating the two proximal maps with the graph projection).
PogsResult pogs_solve(const Subproblem& sub, const PogsParams& params);

}  // namespace lrsdp
