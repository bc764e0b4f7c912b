#include "lrsdp/pogs.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace lrsdp {

Subproblem::Subproblem(const Instance& inst, Factor R, double t, double lambda)
    : inst_(&inst), R_(std::move(R)), t_(t), lambda_(lambda) {
  if (t_ <= 0) throw std::invalid_argument("Subproblem: t must be positive");
  if (lambda_ <= 0) throw std::invalid_argument("Subproblem: lambda must be positive");
  if (R_.rows() != inst.n) throw DimensionError("Subproblem: factor rows must match instance n");
  X0_ = sym_from_factor(R_);
  r0_ = apply_lin_op(inst.constraints, X0_) - inst.constraints.b;
  g0_ = 2.0 * (objective_grad(inst.objective, X0_).mat() * R_);
  gram_ = R_.transpose() * R_;
  f0_ = objective_value(inst.objective, X0_);
  if (inst.objective.kind == Objective::Kind::MatrixSensing) {
    const Eigen::Index N = inst.objective.sampleCount();
    sense_res_.resize(N);
    sense_u_.resize(R_.cols(), N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vector& c = inst.objective.sensing[static_cast<std::size_t>(i)];
      sense_u_.col(i) = R_.transpose() * c;
      sense_res_(i) = c.dot(X0_.mat() * c) - inst.objective.d(i);
    }
  }
}

Vector Subproblem::graphMap(const Factor& delta) const {
  return lin_op_factored(inst_->constraints, R_, delta);
}

Factor Subproblem::graphAdjoint(const Vector& z) const {
  return 2.0 * (adjoint_lin_op(inst_->constraints, z).mat() * R_);
}

Matrix Subproblem::graphMatrix() const {
  const Eigen::Index kdim = k();
  Matrix M(kdim, n() * r());
  for (Eigen::Index i = 0; i < kdim; ++i) {
    const Matrix AiR = inst_->constraints.mats[static_cast<std::size_t>(i)].mat() * R_;
    M.row(i) = 2.0 * AiR.reshaped().transpose();
  }
  return M;
}

double Subproblem::modelValue(const Factor& delta) const {
  double fmodel = 0.0;
  switch (inst_->objective.kind) {
    case Objective::Kind::Linear:
      fmodel = f0_ + g0_.cwiseProduct(delta).sum();
      break;
    case Objective::Kind::QuadDistance: {
      Matrix E = X0_.mat() - inst_->objective.Y.mat();
      E.noalias() += R_ * delta.transpose();
      E.noalias() += delta * R_.transpose();
      fmodel = 0.5 * E.squaredNorm();
      break;
    }
    case Objective::Kind::MatrixSensing: {
      const Eigen::Index N = inst_->objective.sampleCount();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const Vector& c = inst_->objective.sensing[static_cast<std::size_t>(i)];
        const double lin = 2.0 * sense_u_.col(i).dot(delta.transpose() * c);
        const double v = sense_res_(i) + lin;
        acc += v * v;
      }
      fmodel = acc / (2.0 * static_cast<double>(N));
      break;
    }
  }
  const double pen = lambda_ * (graphMap(delta) + r0_).norm();
  return fmodel + pen + delta.squaredNorm() / (2.0 * t_);
}

Factor Subproblem::smoothHessian(const Factor& delta) const {
  switch (inst_->objective.kind) {
    case Objective::Kind::Linear:
      return Factor::Zero(n(), r());
    case Objective::Kind::QuadDistance:
      return 2.0 * (R_ * (delta.transpose() * R_) + delta * gram_);
    case Objective::Kind::MatrixSensing: {
      const Eigen::Index N = inst_->objective.sampleCount();
      Factor H = Factor::Zero(n(), r());
      for (Eigen::Index i = 0; i < N; ++i) {
        const Vector& c = inst_->objective.sensing[static_cast<std::size_t>(i)];
        const double s = sense_u_.col(i).dot(delta.transpose() * c);
        H.noalias() += s * (c * sense_u_.col(i).transpose());
      }
      return (4.0 / static_cast<double>(N)) * H;
    }
  }
  throw std::logic_error("smoothHessian: unknown kind");
}

Factor Subproblem::smoothBlockGrad(const Factor& delta) const {
  return g0_ + smoothHessian(delta) + delta / t_;
}

double Subproblem::modelOptimalityResidual(const Factor& delta) const {
  const Factor gh = smoothBlockGrad(delta);
  const Vector zres = graphMap(delta) + r0_;
  const double zn = zres.norm();
  if (zn > 1e-9 * (1.0 + r0_.norm())) {
    return (gh + lambda_ * graphAdjoint(zres / zn)).norm();
  }
  const Matrix MR = 0.5 * graphMatrix().transpose();  // nr x k, columns vec(A_i R)
  const MinNormElement mn =
      min_norm_in_span_ball(MR, gh.reshaped(), 2.0 * lambda_);
  return mn.element.norm();
}

Vector prox_norm_offset(const Vector& v, const Vector& a, double w) {
  if (w < 0) throw std::invalid_argument("prox_norm_offset: weight must be non-negative");
  if (v.size() != a.size()) throw DimensionError("prox_norm_offset: length mismatch");
  const Vector u = v + a;
  const double un = u.norm();
  if (un == 0.0) return -a;
  const double scale = std::max(1.0 - w / un, 0.0);
  return -a + scale * u;
}

Factor prox_h_linear(const Subproblem& sub, const Factor& v, double rho) {
  if (sub.instance().objective.kind != Objective::Kind::Linear)
    throw std::invalid_argument("prox_h_linear: objective is not linear");
  if (rho <= 0) throw std::invalid_argument("prox_h_linear: rho must be positive");
  return (rho * v - sub.smoothGrad0()) / (1.0 / sub.t() + rho);
}

Factor prox_h_quadratic(const Subproblem& sub, const Factor& v, double rho, double cg_tol,
                        int cg_max_iter) {
  const auto kind = sub.instance().objective.kind;
  if (kind == Objective::Kind::Linear)
    throw std::invalid_argument("prox_h_quadratic: objective has a closed-form prox");
  const double diag = 1.0 / sub.t() + rho;
  const Factor rhs = rho * v - sub.smoothGrad0();
  const double target = cg_tol * (1.0 + rho * v.norm());

  // CG on (Hess + diag I) Delta = rhs with Frobenius inner products.
  Factor x = Factor::Zero(v.rows(), v.cols());
  Factor res = rhs;  // rhs - A x at x = 0
  Factor p = res;
  double rs = res.squaredNorm();
  if (std::sqrt(rs) <= target) return x;
  Factor best = x;
  double best_res = std::sqrt(rs);
  for (int it = 0; it < cg_max_iter; ++it) {
    const Factor Ap = sub.smoothHessian(p) + diag * p;
    const double alpha = rs / p.cwiseProduct(Ap).sum();
    x += alpha * p;
    res -= alpha * Ap;
    const double rs_new = res.squaredNorm();
    const double rn = std::sqrt(rs_new);
    if (rn < best_res) {
      best = x;
      best_res = rn;
    }
    if (rn <= target) return x;
    p = res + (rs_new / rs) * p;
    rs = rs_new;
  }
  throw CgError("prox_h_quadratic: conjugate gradient did not converge", best, best_res);
}

namespace {

// Linear-map products for the projection system.
struct GraphOps {
  const Subproblem& sub;
  explicit GraphOps(const Subproblem& s) : sub(s) {}
  // (I + M^T M) x in factor space.
  Factor normalOp(const Factor& x) const { return x + sub.graphAdjoint(sub.graphMap(x)); }
};

PogsParams::Projection resolve_mode(const Subproblem& sub, PogsParams::Projection mode) {
  if (mode != PogsParams::Projection::Auto) return mode;
  const double size = static_cast<double>(sub.n()) * static_cast<double>(sub.r()) *
                      static_cast<double>(sub.k());
  return size <= 4e6 ? PogsParams::Projection::Direct : PogsParams::Projection::Cg;
}

// Direct graph projector: factors the small side of the normal equations
// once. For k < nr the dual form (I + M M^T)^{-1} is used via the Woodbury
// identity.
class GraphProjector {
 public:
  GraphProjector(const Subproblem& sub, PogsParams::Projection mode, double cg_tol,
                 int cg_max_iter)
      : sub_(sub), mode_(resolve_mode(sub, mode)), cg_tol_(cg_tol), cg_max_iter_(cg_max_iter) {
    if (mode_ == PogsParams::Projection::Direct) {
      M_ = sub.graphMatrix();
      const Eigen::Index k = M_.rows();
      const Eigen::Index nr = M_.cols();
      dual_form_ = k < nr;
      if (dual_form_) {
        llt_.compute(Matrix::Identity(k, k) + M_ * M_.transpose());
      } else {
        llt_.compute(Matrix::Identity(nr, nr) + M_.transpose() * M_);
      }
      if (llt_.info() != Eigen::Success)
        throw std::runtime_error("project_graph: factorization failed");
    }
  }

  std::pair<Vector, Factor> apply(const Vector& z, const Factor& d) const {
    const Eigen::Index n = sub_.n();
    const Eigen::Index r = sub_.r();
    if (mode_ == PogsParams::Projection::Direct) {
      const Vector t = d.reshaped() + M_.transpose() * z;
      Vector x;
      if (dual_form_) {
        x = t - M_.transpose() * llt_.solve(M_ * t);
      } else {
        x = llt_.solve(t);
      }
      Vector zp = M_ * x;
      return {std::move(zp), x.reshaped(n, r)};
    }
    // CG on (I + M^T M) x = d + M^T z, matrix-free.
    GraphOps ops(sub_);
    const Factor rhs = d + sub_.graphAdjoint(z);
    Factor x = Factor::Zero(n, r);
    Factor res = rhs;
    Factor p = res;
    double rs = res.squaredNorm();
    const double target = cg_tol_ * (1.0 + rhs.norm());
    if (std::sqrt(rs) > target) {
      Factor best = x;
      double best_res = std::sqrt(rs);
      bool done = false;
      for (int it = 0; it < cg_max_iter_; ++it) {
        const Factor Ap = ops.normalOp(p);
        const double alpha = rs / p.cwiseProduct(Ap).sum();
        x += alpha * p;
        res -= alpha * Ap;
        const double rs_new = res.squaredNorm();
        const double rn = std::sqrt(rs_new);
        if (rn < best_res) {
          best = x;
          best_res = rn;
        }
        if (rn <= target) {
          done = true;
          break;
        }
        p = res + (rs_new / rs) * p;
        rs = rs_new;
      }
      if (!done) throw CgError("project_graph: conjugate gradient did not converge", best, std::sqrt(rs));
    }
    return {sub_.graphMap(x), x};
  }

  // Operator norm of M, for the rho rescaling heuristic.
  double graphNorm() const {
    if (mode_ == PogsParams::Projection::Direct) {
      Eigen::JacobiSVD<Matrix> svd(M_);
      return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    // A few power-iteration sweeps on M^T M suffice for a scale estimate.
    Factor x = Factor::Ones(sub_.n(), sub_.r());
    x /= x.norm();
    double lambda = 0.0;
    for (int it = 0; it < 30; ++it) {
      Factor y = sub_.graphAdjoint(sub_.graphMap(x));
      const double yn = y.norm();
      if (yn == 0) return 0.0;
      lambda = yn;
      x = y / yn;
    }
    return std::sqrt(lambda);
  }

 private:
  const Subproblem& sub_;
  PogsParams::Projection mode_;
  double cg_tol_;
  int cg_max_iter_;
  Matrix M_;
  bool dual_form_ = false;
  Eigen::LLT<Matrix> llt_;
};

// Proximal map of the smooth block at fixed rho. Closed form for linear
// objectives; a cached Cholesky of the dense model Hessian at desk scale,
// falling back to matrix-free CG when the vectorized system is large.
class SmoothProx {
 public:
  SmoothProx(const Subproblem& sub, double rho, double cg_tol, int cg_max_iter)
      : sub_(sub), rho_(rho), cg_tol_(cg_tol), cg_max_iter_(cg_max_iter) {
    const auto kind = sub.instance().objective.kind;
    if (kind == Objective::Kind::Linear) return;
    const Eigen::Index nr = sub.n() * sub.r();
    direct_ = nr <= 600;
    if (!direct_) return;
    Matrix H(nr, nr);
    Factor basis = Factor::Zero(sub.n(), sub.r());
    for (Eigen::Index j = 0; j < nr; ++j) {
      basis.reshaped()(j) = 1.0;
      H.col(j) = sub.smoothHessian(basis).reshaped();
      basis.reshaped()(j) = 0.0;
    }
    H.diagonal().array() += 1.0 / sub.t() + rho;
    llt_.compute(H);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("SmoothProx: factorization failed");
  }

  Factor apply(const Factor& v) const {
    if (sub_.instance().objective.kind == Objective::Kind::Linear)
      return prox_h_linear(sub_, v, rho_);
    if (direct_) {
      const Factor rhs = rho_ * v - sub_.smoothGrad0();
      return llt_.solve(rhs.reshaped()).reshaped(sub_.n(), sub_.r());
    }
    return prox_h_quadratic(sub_, v, rho_, cg_tol_, cg_max_iter_);
  }

 private:
  const Subproblem& sub_;
  double rho_;
  double cg_tol_;
  int cg_max_iter_;
  bool direct_ = false;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace

std::pair<Vector, Factor> project_graph(const Vector& z, const Factor& d, const Subproblem& sub,
                                        PogsParams::Projection mode, double cg_tol,
                                        int cg_max_iter) {
  GraphProjector proj(sub, mode, cg_tol, cg_max_iter);
  return proj.apply(z, d);
}

PogsResult pogs_solve(const Subproblem& sub, const PogsParams& params) {
  if (params.max_iter <= 0 || params.abs_tol <= 0 || params.rel_tol <= 0 || params.rel_tol >= 1)
    throw std::invalid_argument("pogs_solve: invalid parameters");
  double rho = params.rho > 0 ? params.rho : sub.lambda();
  const Eigen::Index k = sub.k();
  const Eigen::Index n = sub.n();
  const Eigen::Index r = sub.r();

  GraphProjector projector(sub, params.projection_mode, params.cg_tol, params.cg_max_iter);
  auto hprox = std::make_unique<SmoothProx>(sub, rho, params.cg_tol, params.cg_max_iter);

  Vector z = Vector::Zero(k);
  Factor d = Factor::Zero(n, r);
  Vector lz = Vector::Zero(k);
  Factor ld = Factor::Zero(n, r);

  PogsResult out;
  std::vector<double> residual_history;
  residual_history.reserve(static_cast<std::size_t>(params.max_iter));
  bool rescaled = false;
  int last_opt_check = -100;

  for (int it = 1; it <= params.max_iter; ++it) {
    const Vector z_half = prox_norm_offset(z - lz, sub.residual0(), sub.lambda() / rho);
    const Factor d_half = hprox->apply(d - ld);
    auto [z_new, d_new] = projector.apply(z_half + lz, d_half + ld);
    lz += z_half - z_new;
    ld += d_half - d_new;

    const double primal =
        std::sqrt((z_half - z_new).squaredNorm() + (d_half - d_new).squaredNorm());
    const double dual =
        rho * std::sqrt((z_new - z).squaredNorm() + (d_new - d).squaredNorm());
    z = std::move(z_new);
    d = std::move(d_new);
    residual_history.push_back(primal + dual);
    out.iterations = it;
    out.primal_res = primal;
    out.dual_res = dual;

    const double prim_scale =
        std::max(std::sqrt(z_half.squaredNorm() + d_half.squaredNorm()),
                 std::sqrt(z.squaredNorm() + d.squaredNorm()));
    const double dual_scale = rho * std::sqrt(lz.squaredNorm() + ld.squaredNorm());
    const double eps_pri = params.abs_tol + params.rel_tol * prim_scale;
    const double eps_dual = params.abs_tol + params.rel_tol * dual_scale;

    if (primal <= eps_pri && dual <= eps_dual && it - last_opt_check >= 25) {
      last_opt_check = it;
      out.opt_residual = sub.modelOptimalityResidual(d);
      if (out.opt_residual <= 10.0 * (params.abs_tol + params.rel_tol * d.norm())) {
        out.converged = true;
        break;
      }
    }

    if (!rescaled && it == 100) {
      const bool prim_heavy = primal > 10.0 * dual;
      const bool dual_heavy = dual > 10.0 * primal;
      if (prim_heavy || dual_heavy) {
        const double factor = std::max(std::sqrt(projector.graphNorm()), 1.2);
        const double rho_new = prim_heavy ? rho * factor : rho / factor;
        lz *= rho / rho_new;
        ld *= rho / rho_new;
        rho = rho_new;
        hprox = std::make_unique<SmoothProx>(sub, rho, params.cg_tol, params.cg_max_iter);
        rescaled = true;
      }
    }
  }

  out.delta = d;
  out.model_value = sub.modelValue(d);
  const double model0 = sub.modelValue(Factor::Zero(n, r));
  if (out.model_value > model0) {
    // Never return a step worse than the null step.
    out.delta = Factor::Zero(n, r);
    out.model_value = model0;
    out.opt_residual = sub.modelOptimalityResidual(out.delta);
    out.converged = out.opt_residual <=
                    10.0 * (params.abs_tol + params.rel_tol * out.delta.norm());
  }

  // Diagnostic: combined residual over the last 20% of iterations should not
  // grow by more than 10% step to step.
  const std::size_t tail_start = residual_history.size() -
                                 std::min(residual_history.size(),
                                          std::max<std::size_t>(residual_history.size() / 5, 2));
  for (std::size_t i = tail_start + 1; i < residual_history.size(); ++i) {
    if (residual_history[i] > 1.1 * residual_history[i - 1]) {
      out.tail_monotone = false;
      break;
    }
  }
  return out;
}

}  // namespace lrsdp
