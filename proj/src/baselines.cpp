#include "lrsdp/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lrsdp {

namespace {

bool is_unit_diag_constraints(const Instance& inst) {
  if (inst.constraints.k() != inst.n) return false;
  if (!inst.constraints.b.isApprox(Vector::Ones(inst.n))) return false;
  for (Eigen::Index i = 0; i < inst.n; ++i) {
    Matrix e = Matrix::Zero(inst.n, inst.n);
    e(i, i) = 1.0;
    if ((inst.constraints.mats[static_cast<std::size_t>(i)].mat() - e).norm() > 0) return false;
  }
  return true;
}

}  // namespace

PgdResult pgd_maxcut(const Instance& inst, const Factor& R0, double t, int iters) {
  if (inst.objective.kind != Objective::Kind::Linear)
    throw std::invalid_argument("pgd_maxcut: objective must be linear");
  if (!is_unit_diag_constraints(inst))
    throw std::invalid_argument("pgd_maxcut: constraints must be diag(X) = 1");
  if (t <= 0 || iters < 0) throw std::invalid_argument("pgd_maxcut: invalid parameters");

  PgdResult out;
  out.R = R0;
  for (Eigen::Index i = 0; i < out.R.rows(); ++i) {
    const double norm = out.R.row(i).norm();
    if (norm == 0) throw std::invalid_argument("pgd_maxcut: R0 has a zero row");
    out.R.row(i) /= norm;
  }
  const Matrix& C = inst.objective.C.mat();

  auto log_record = [&](int iter, const Factor& prev, double step_t) {
    TraceRecord rec;
    rec.iter = iter;
    rec.f_val = C.cwiseProduct((out.R * out.R.transpose())).sum();
    rec.phi = rec.f_val;
    rec.feas = 0.0;
    rec.grad_map_norm = iter == 0 ? 0.0 : (out.R - prev).norm() / step_t;
    if (inst.certificate)
      rec.dist_to_solution = procrustes_distance_padded(out.R, inst.certificate->R_star);
    out.trace.push_back(rec);
  };
  log_record(0, out.R, t);

  for (int k = 1; k <= iters; ++k) {
    const Factor prev = out.R;
    Factor W = prev - 2.0 * t * (C * prev);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      const double norm = W.row(i).norm();
      if (norm < 1e-300) {
        W.row(i) = prev.row(i);
        ++out.zero_row_events;
      } else {
        W.row(i) /= norm;
      }
    }
    out.R = std::move(W);
    log_record(k, prev, t);
  }
  return out;
}

FwResult fw_init(const Instance& inst, const FwConfig& cfg) {
  if (inst.objective.kind == Objective::Kind::MatrixSensing)
    throw std::invalid_argument("fw_init: supported objectives are Linear and QuadDistance");
  if (cfg.alpha_trace <= 0 || cfg.rho <= 0 || cfg.outer_rounds < 1 || cfg.inner_fw_iters < 1)
    throw std::invalid_argument("fw_init: invalid config");

  const Eigen::Index n = inst.n;
  Matrix X = Matrix::Zero(n, n);
  Vector y = Vector::Zero(inst.constraints.k());

  FwResult out;
  out.rounds.reserve(static_cast<std::size_t>(cfg.outer_rounds));
  for (int round = 0; round < cfg.outer_rounds; ++round) {
    for (int j = 1; j <= cfg.inner_fw_iters; ++j) {
      const SymMat Xs(X);
      const Vector shifted = y + cfg.rho * (apply_lin_op(inst.constraints, Xs) - inst.constraints.b);
      const SymMat grad(objective_grad(inst.objective, Xs).mat() +
                        adjoint_lin_op(inst.constraints, shifted).mat());
      const EigPair eig = min_eigpair(grad, cfg.eig_tol);
      const double tau = 2.0 / (static_cast<double>(j) + 2.0);
      X *= (1.0 - tau);
      if (eig.value < 0)
        X.noalias() += (tau * cfg.alpha_trace) * (eig.vector * eig.vector.transpose());
    }
    const SymMat Xs(X);
    const Vector residual = apply_lin_op(inst.constraints, Xs) - inst.constraints.b;
    y += cfg.rho * residual;
    out.rounds.push_back(FwRound{objective_value(inst.objective, Xs), residual.norm()});
  }
  out.X = SymMat(X);
  return out;
}

Factor rank_r_truncate(const SymMat& X, int r) {
  const Eigen::Index n = X.n();
  if (r < 1 || r > n) throw std::invalid_argument("rank_r_truncate: need 1 <= r <= n");
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.mat());
  if (es.info() != Eigen::Success) throw std::runtime_error("rank_r_truncate: eigensolver failed");
  // Eigen sorts ascending; take the top r, clip negatives.
  Factor R(n, r);
  for (int j = 0; j < r; ++j) {
    const Eigen::Index idx = n - 1 - j;
    const double lam = std::max(es.eigenvalues()(idx), 0.0);
    R.col(j) = std::sqrt(lam) * es.eigenvectors().col(idx);
  }
  fix_column_signs(R);
  return R;
}

}  // namespace lrsdp
