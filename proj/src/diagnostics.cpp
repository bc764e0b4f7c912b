#include "lrsdp/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

#include "lrsdp/rng.hpp"

namespace lrsdp {

namespace {

constexpr double kGrowthSlack = 1e-10;

// Aligns Q to R (returns Q * Omega) so that R^T (Q Omega) >= 0.
Factor align_to(const Factor& R, const Factor& Q) {
  const ProcrustesResult pr = procrustes(R, Q);
  return Q * pr.omega;
}

Factor padded(const Factor& R, int r) {
  if (R.cols() > r) throw DimensionError("padded: factor wider than target rank");
  Factor out = Factor::Zero(R.rows(), r);
  out.leftCols(R.cols()) = R;
  return out;
}

// Canonical representative of the orbit {R Omega}: eigenvector factor of
// R R^T with signs fixed. Depends on the certificate only through X_star,
// which makes the sampling below invariant under rotations of R_star.
Factor canonical_factor(const Factor& R) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(R * R.transpose());
  const Eigen::Index n = R.rows();
  const Eigen::Index r = R.cols();
  Factor out(n, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const Eigen::Index idx = n - 1 - j;
    out.col(j) = std::sqrt(std::max(es.eigenvalues()(idx), 0.0)) * es.eigenvectors().col(idx);
  }
  fix_column_signs(out);
  return out;
}

// Damped Gauss-Newton retraction onto {A(UU^T) = b}. Returns false when the
// residual target is not reached.
bool retract_feasible(const Instance& inst, Factor& U, double target = 1e-11, int max_steps = 50) {
  for (int step = 0; step < max_steps; ++step) {
    const Vector res = apply_lin_op(inst.constraints, sym_from_factor(U)) - inst.constraints.b;
    if (res.norm() <= target) return true;
    const JacobianMR jac = constraint_jacobian_MR(inst, U);
    // Linearized constraint increment is 2 M_U^T vec(D); take the min-norm
    // least-squares step and damp on residual increase.
    const PinvSolve sol = pinv_solve(2.0 * jac.M.transpose(), -res);
    Factor D = sol.x.reshaped(U.rows(), U.cols());
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      Factor U_try = U + scale * D;
      const double try_norm =
          (apply_lin_op(inst.constraints, sym_from_factor(U_try)) - inst.constraints.b).norm();
      if (try_norm < res.norm()) {
        U = std::move(U_try);
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) return false;
  }
  return (apply_lin_op(inst.constraints, sym_from_factor(U)) - inst.constraints.b).norm() <=
         target;
}

}  // namespace

BoundCheck check_factor_bound(const Factor& R, const Factor& Rstar) {
  if (R.rows() != Rstar.rows() || R.cols() != Rstar.cols())
    throw DimensionError("check_factor_bound: shape mismatch");
  const Factor Rs = align_to(R, Rstar);
  Eigen::JacobiSVD<Matrix> svd(Rs);
  const double sigma_r = svd.singularValues()(svd.singularValues().size() - 1);
  BoundCheck out;
  out.lhs = (R * R.transpose() - Rs * Rs.transpose()).squaredNorm();
  out.rhs = 2.0 * (std::sqrt(2.0) - 1.0) * sigma_r * sigma_r * (R - Rs).squaredNorm();
  out.holds = out.lhs >= out.rhs - kGrowthSlack;
  return out;
}

BoundCheck check_overspec_bound(const Factor& U, const Factor& Ustar) {
  if (U.rows() != Ustar.rows() || U.cols() != Ustar.cols())
    throw DimensionError("check_overspec_bound: shape mismatch");
  const Factor Us = align_to(U, Ustar);
  const double r = static_cast<double>(U.cols());
  BoundCheck out;
  out.lhs = (U * U.transpose() - Us * Us.transpose()).squaredNorm();
  const double delta2 = (U - Us).squaredNorm();
  out.rhs = 2.0 * (std::sqrt(2.0) - 1.0) / (9.0 * r) * delta2 * delta2;
  out.holds = out.lhs >= out.rhs - kGrowthSlack;
  return out;
}

GrowthReport estimate_growth(const Instance& inst, const Certificate& cert, int r, int samples,
                             std::pair<double, double> radii, std::uint64_t seed,
                             GrowthDirection direction) {
  if (samples < 10) throw std::invalid_argument("estimate_growth: need at least 10 samples");
  if (radii.first <= 0 || radii.second <= radii.first)
    throw std::invalid_argument("estimate_growth: radii must be positive and ordered");
  if (r < cert.r_star) throw std::invalid_argument("estimate_growth: r must be >= r_star");
  if (direction == GrowthDirection::NewColumn && r <= cert.r_star)
    throw std::invalid_argument("estimate_growth: NewColumn needs r > r_star");

  Rng rng(seed);
  const Factor R_can = canonical_factor(cert.R_star);
  const Factor Ustar = padded(R_can, r);
  const double scale = 1.0 + R_can.norm();
  const double f_star = objective_value(inst.objective, sym_from_factor(R_can));
  Matrix Q1(inst.n, cert.r_star);
  for (int j = 0; j < cert.r_star; ++j) {
    const double nj = R_can.col(j).norm();
    if (nj < 1e-14) throw std::invalid_argument("estimate_growth: rank-deficient certificate");
    Q1.col(j) = R_can.col(j) / nj;
  }

  std::vector<double> log_dist;
  std::vector<double> log_gap;
  int dropped = 0;
  for (int s = 0; s < samples; ++s) {
    const double frac = samples == 1 ? 0.0 : static_cast<double>(s) / (samples - 1);
    const double radius =
        scale * radii.first * std::pow(radii.second / radii.first, frac);

    Factor D;
    if (direction == GrowthDirection::NewColumn) {
      Vector y = rng.normalVector(inst.n);
      y -= Q1 * (Q1.transpose() * y);
      if (y.norm() < 1e-12) {
        ++dropped;
        continue;
      }
      D = Factor::Zero(inst.n, r);
      D.col(r - 1) = y / y.norm();
    } else {
      const Factor G = rng.normalMatrix(inst.n, r);
      const JacobianMR jac = constraint_jacobian_MR(inst, Ustar);
      const PinvSolve sol = pinv_solve(jac.M, G.reshaped());
      Vector tangent = G.reshaped() - jac.M * sol.x;
      if (tangent.norm() < 1e-12) {
        ++dropped;
        continue;
      }
      tangent /= tangent.norm();
      D = tangent.reshaped(inst.n, r);
    }

    Factor U = Ustar + radius * D;
    if (!retract_feasible(inst, U)) {
      ++dropped;
      continue;
    }
    const double gap = objective_value(inst.objective, sym_from_factor(U)) - f_star;
    const double dist = procrustes_distance_padded(U, cert.R_star);
    if (gap <= 0 || dist <= 0) {
      ++dropped;
      continue;
    }
    log_dist.push_back(std::log(dist));
    log_gap.push_back(std::log(gap));
  }

  const int kept = static_cast<int>(log_dist.size());
  if (kept < samples / 2)
    throw std::runtime_error("estimate_growth: more than half of the samples failed retraction");

  // Least-squares line log_gap = order * log_dist + intercept.
  double mx = 0, my = 0;
  for (int i = 0; i < kept; ++i) {
    mx += log_dist[static_cast<std::size_t>(i)];
    my += log_gap[static_cast<std::size_t>(i)];
  }
  mx /= kept;
  my /= kept;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < kept; ++i) {
    const double dx = log_dist[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (log_gap[static_cast<std::size_t>(i)] - my);
  }
  GrowthReport rep;
  rep.fitted_order = sxy / sxx;
  rep.fitted_constant = std::exp(my - rep.fitted_order * mx);
  rep.sample_count = kept;
  rep.radius_range = {radii.first * scale, radii.second * scale};
  rep.dropped = dropped;
  return rep;
}

RegularityReport regularity_ratios(const Instance& inst, const Certificate& cert, double lambda,
                                   int samples, std::pair<double, double> radii,
                                   std::uint64_t seed, int r) {
  if (r == 0) r = cert.r_star;
  if (samples < 2) throw std::invalid_argument("regularity_ratios: need at least 2 samples");
  Rng rng(seed);
  const Factor Ustar = padded(cert.R_star, r);
  const double scale = 1.0 + cert.R_star.norm();
  const PenaltyParams pen{lambda, 1e-9};
  const double phi_star =
      objective_value(inst.objective, sym_from_factor(cert.R_star));

  RegularityReport rep;
  for (int s = 0; s < samples; ++s) {
    const double frac = samples == 1 ? 0.0 : static_cast<double>(s) / (samples - 1);
    const double radius = scale * radii.first * std::pow(radii.second / radii.first, frac);
    const bool feasible_sample = (s % 2 == 0);

    Factor U;
    if (feasible_sample) {
      const Factor G = rng.normalMatrix(inst.n, r);
      const JacobianMR jac = constraint_jacobian_MR(inst, Ustar);
      const PinvSolve sol = pinv_solve(jac.M, G.reshaped());
      Vector tangent = G.reshaped() - jac.M * sol.x;
      if (tangent.norm() < 1e-12) {
        ++rep.skipped;
        continue;
      }
      tangent /= tangent.norm();
      U = Ustar + radius * tangent.reshaped(inst.n, r);
      if (!retract_feasible(inst, U)) {
        ++rep.skipped;
        continue;
      }
    } else {
      Factor G = rng.normalMatrix(inst.n, r);
      G /= G.norm();
      U = Ustar + radius * G;
    }

    const PhiValue pv = phi_value(inst, U, pen);
    const double gap = pv.phi - phi_star;
    const SubgradResult sg = min_norm_subgrad(inst, U, pen);
    const double sn = sg.G.norm();
    const double dist = procrustes_distance_padded(U, cert.R_star);
    if (sn < 1e-14 || dist <= 0) {
      ++rep.skipped;
      continue;
    }
    ++rep.used;
    if (gap > 0) rep.max_norm_convexity_ratio =
        std::max(rep.max_norm_convexity_ratio, gap / (sn * dist));
    rep.max_subreg_ratio = std::max(rep.max_subreg_ratio, dist / sn);
  }
  return rep;
}

KktResidual kkt_residual(const Instance& inst, const Factor& R) {
  const JacobianMR jac = constraint_jacobian_MR(inst, R);
  const Vector g = phi_f_grad(inst, R).reshaped();
  const PinvSolve sol = pinv_solve(jac.M, g);
  KktResidual out;
  out.y_fit = -sol.x;
  out.stat_res = (g + jac.M * out.y_fit).norm();
  out.primal_res =
      (apply_lin_op(inst.constraints, sym_from_factor(R)) - inst.constraints.b).norm();
  return out;
}

GrowthConstants kappa_c(const Instance& inst, const Certificate& cert) {
  if (inst.objective.kind != Objective::Kind::Linear)
    throw std::invalid_argument("kappa_c: requires a linear objective");
  const int r_star = cert.r_star;
  Eigen::HouseholderQR<Matrix> qr(cert.R_star);
  const Matrix Q1 = Matrix(qr.householderQ()).leftCols(r_star);
  const Matrix Q2 = orthogonal_complement(cert.R_star);

  GrowthConstants out;
  out.gamma_Q = dual_nondegeneracy_gamma(inst.constraints, Q1);
  if (out.gamma_Q < 1e-12) throw std::runtime_error("kappa_c: dual degeneracy (gamma_Q ~ 0)");

  double cross = 0.0;
  for (const auto& Ai : inst.constraints.mats)
    cross += (Q2.transpose() * Ai.mat() * Q1).squaredNorm();

  Eigen::JacobiSVD<Matrix> svd(cert.R_star);
  const Vector& sv = svd.singularValues();
  const double lam1 = sv(0) * sv(0);
  const double lam_r = sv(sv.size() - 1) * sv(sv.size() - 1);

  out.kappa = (4.0 * lam1 / lam_r) * cross / out.gamma_Q;
  out.c = 1.0 / (2.0 * out.kappa + 1.0);

  Eigen::SelfAdjointEigenSolver<Matrix> es(cert.Z_star.mat(), Eigen::EigenvaluesOnly);
  out.lambda_Z = es.eigenvalues()(r_star);  // (r*+1)-th smallest
  return out;
}

double predicted_rate(double ell, double L, double beta, double alpha_phi) {
  if (ell <= 0 || L <= 0 || beta <= 0 || alpha_phi <= 0)
    throw std::invalid_argument("predicted_rate: inputs must be positive");
  return 1.0 - 1.0 / (9.0 + 40.0 * ell + 100.0 * ell * ell * L * beta / alpha_phi);
}

double predicted_rate_sdp(double ratio) {
  if (ratio <= 0) throw std::invalid_argument("predicted_rate_sdp: ratio must be positive");
  return 1.0 - 1.0 / (209.0 + 5000.0 * ratio);
}

}  // namespace lrsdp
