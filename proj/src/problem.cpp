#include "lrsdp/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lrsdp {

Objective Objective::linear(SymMat C) {
  Objective o;
  o.kind = Kind::Linear;
  o.C = std::move(C);
  return o;
}

Objective Objective::quadDistance(SymMat Y) {
  Objective o;
  o.kind = Kind::QuadDistance;
  o.Y = std::move(Y);
  return o;
}

Objective Objective::matrixSensing(std::vector<Vector> c, Vector d) {
  if (static_cast<Eigen::Index>(c.size()) != d.size())
    throw DimensionError("Objective::matrixSensing: vector count must equal length(d)");
  if (c.empty()) throw DimensionError("Objective::matrixSensing: need at least one sample");
  Objective o;
  o.kind = Kind::MatrixSensing;
  o.sensing = std::move(c);
  o.d = std::move(d);
  return o;
}

double objective_value(const Objective& obj, const SymMat& X) {
  switch (obj.kind) {
    case Objective::Kind::Linear:
      return obj.C.mat().cwiseProduct(X.mat()).sum();
    case Objective::Kind::QuadDistance:
      return 0.5 * (X.mat() - obj.Y.mat()).squaredNorm();
    case Objective::Kind::MatrixSensing: {
      const Eigen::Index N = obj.sampleCount();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const Vector& c = obj.sensing[static_cast<std::size_t>(i)];
        const double r = c.dot(X.mat() * c) - obj.d(i);
        acc += r * r;
      }
      return acc / (2.0 * static_cast<double>(N));
    }
  }
  throw std::logic_error("objective_value: unknown kind");
}

SymMat objective_grad(const Objective& obj, const SymMat& X) {
  switch (obj.kind) {
    case Objective::Kind::Linear:
      return obj.C;
    case Objective::Kind::QuadDistance:
      return SymMat(X.mat() - obj.Y.mat());
    case Objective::Kind::MatrixSensing: {
      const Eigen::Index N = obj.sampleCount();
      Matrix g = Matrix::Zero(X.n(), X.n());
      for (Eigen::Index i = 0; i < N; ++i) {
        const Vector& c = obj.sensing[static_cast<std::size_t>(i)];
        const double r = c.dot(X.mat() * c) - obj.d(i);
        g.noalias() += r * (c * c.transpose());
      }
      return SymMat(g / static_cast<double>(N));
    }
  }
  throw std::logic_error("objective_grad: unknown kind");
}

PhiValue phi_value(const Instance& inst, const Factor& R, const PenaltyParams& p) {
  const SymMat X = sym_from_factor(R);
  PhiValue out;
  out.f_val = objective_value(inst.objective, X);
  out.feas = (apply_lin_op(inst.constraints, X) - inst.constraints.b).norm();
  out.phi = out.f_val + p.lambda * out.feas;
  return out;
}

Factor phi_f_grad(const Instance& inst, const Factor& R) {
  const SymMat X = sym_from_factor(R);
  return 2.0 * (objective_grad(inst.objective, X).mat() * R);
}

JacobianMR constraint_jacobian_MR(const Instance& inst, const Factor& R) {
  const Eigen::Index n = R.rows();
  const Eigen::Index r = R.cols();
  const Eigen::Index k = inst.constraints.k();
  JacobianMR out;
  out.M.resize(n * r, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Matrix AiR = inst.constraints.mats[static_cast<std::size_t>(i)].mat() * R;
    out.M.col(i) = AiR.reshaped();
  }
  Eigen::JacobiSVD<Matrix> svd(out.M);
  const Vector& sv = svd.singularValues();
  out.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (out.M.rows() < out.M.cols()) out.sigma_min = 0.0;  // necessarily rank deficient
  return out;
}

SubgradResult min_norm_subgrad(const Instance& inst, const Factor& R, const PenaltyParams& p) {
  const Eigen::Index n = R.rows();
  const Eigen::Index r = R.cols();
  const SymMat X = sym_from_factor(R);
  const Vector residual = apply_lin_op(inst.constraints, X) - inst.constraints.b;
  const double feas = residual.norm();
  const Factor gf = phi_f_grad(inst, R);

  SubgradResult out;
  if (feas <= p.feas_tol * (1.0 + inst.constraints.b.norm())) {
    out.feasible_branch = true;
    const JacobianMR jac = constraint_jacobian_MR(inst, R);
    const Vector g = gf.reshaped();
    // The norm term contributes {M_R w : ||w|| <= 2 lambda}; the stationarity
    // multiplier is y = w/2, matching grad phi_f + 2 M_R y = 0.
    MinNormElement mn = min_norm_in_span_ball(jac.M, g, 2.0 * p.lambda);
    out.rank_deficient = mn.rank_deficient;
    out.G = mn.element.reshaped(n, r);
    out.multiplier = 0.5 * mn.coefficient;
  } else {
    // phi is differentiable here: grad phi_f + lambda * (2/feas) * sum_i res_i A_i R.
    Matrix pen = Matrix::Zero(n, r);
    for (Eigen::Index i = 0; i < inst.constraints.k(); ++i)
      pen.noalias() += residual(i) * (inst.constraints.mats[static_cast<std::size_t>(i)].mat() * R);
    out.G = gf + p.lambda * (2.0 / feas) * pen;
  }
  return out;
}

Factor gradient_mapping(const Factor& R, const Factor& R_next, double t) {
  if (t <= 0) throw std::invalid_argument("gradient_mapping: t must be positive");
  if (R.rows() != R_next.rows() || R.cols() != R_next.cols())
    throw DimensionError("gradient_mapping: shape mismatch");
  return (R_next - R) / t;
}

CertificateCheck validate_certificate(const Instance& inst, const Certificate& cert) {
  CertificateCheck c;
  const SymMat X = sym_from_factor(cert.R_star);
  c.primal_residual = (apply_lin_op(inst.constraints, X) - inst.constraints.b).norm();
  const SymMat gradf = objective_grad(inst.objective, X);
  c.stationarity_residual =
      (gradf.mat() + adjoint_lin_op(inst.constraints, cert.y_star).mat() - cert.Z_star.mat())
          .norm();
  Eigen::SelfAdjointEigenSolver<Matrix> es(cert.Z_star.mat(), Eigen::EigenvaluesOnly);
  c.min_eig_Z = es.eigenvalues().minCoeff();
  c.complementarity = std::abs(cert.Z_star.mat().cwiseProduct(X.mat()).sum());
  c.ok = c.primal_residual <= 1e-10 && c.stationarity_residual <= 1e-8 &&
         c.min_eig_Z >= -1e-10 && c.complementarity <= 1e-8;
  return c;
}

}  // namespace lrsdp
