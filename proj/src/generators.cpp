#include "lrsdp/generators.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>

#include "lrsdp/rng.hpp"

namespace lrsdp {

LinOpA diag_constraints(Eigen::Index n) {
  std::vector<SymMat> mats;
  mats.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix e = Matrix::Zero(n, n);
    e(i, i) = 1.0;
    mats.emplace_back(e);
  }
  return LinOpA(std::move(mats), Vector::Ones(n));
}

namespace {

Factor unit_row_factor(Eigen::Index n, int r_star, Rng& rng) {
  Factor R = rng.normalMatrix(n, r_star);
  for (Eigen::Index i = 0; i < n; ++i) {
    double norm = R.row(i).norm();
    while (norm < 1e-12) {  // essentially impossible, but keep rows valid
      R.row(i) = rng.normalMatrix(1, r_star);
      norm = R.row(i).norm();
    }
    R.row(i) /= norm;
  }
  return R;
}

}  // namespace

std::pair<Instance, Certificate> gen_maxcut_planted(Eigen::Index n, int r_star,
                                                    std::uint64_t seed) {
  if (r_star < 1 || r_star > n - 1)
    throw GenerationError("gen_maxcut_planted: need 1 <= r_star <= n-1");
  Rng rng(seed);
  for (int attempt = 0; attempt < 20; ++attempt) {
    const Factor R_star = unit_row_factor(n, r_star, rng);
    const Matrix Q2 = orthogonal_complement(R_star);
    const SymMat Z(Q2 * Q2.transpose());
    const Vector y = rng.normalVector(n);
    const SymMat C(Z.mat() - Matrix(y.asDiagonal()));

    Instance inst;
    inst.n = n;
    inst.objective = Objective::linear(C);
    inst.constraints = diag_constraints(n);
    inst.name = "maxcut_planted_n" + std::to_string(n) + "_r" + std::to_string(r_star) +
                "_seed" + std::to_string(seed);
    Certificate cert{R_star, y, Z, r_star};

    Eigen::HouseholderQR<Matrix> qr(R_star);
    const Matrix Q1 = Matrix(qr.householderQ()).leftCols(r_star);
    if (dual_nondegeneracy_gamma(inst.constraints, Q1) <= 1e-6) continue;
    if (!validate_certificate(inst, cert).ok) continue;
    inst.certificate = cert;
    return {std::move(inst), std::move(cert)};
  }
  throw GenerationError("gen_maxcut_planted: resampling exhausted without a non-degenerate dual");
}

std::pair<Instance, Vector> gen_z2_sync(Eigen::Index n, double snr, std::uint64_t seed) {
  if (n < 2) throw GenerationError("gen_z2_sync: need n >= 2");
  if (snr < 0) throw GenerationError("gen_z2_sync: snr must be non-negative");
  Rng rng(seed);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.sign();
  Matrix W = Matrix::Zero(n, n);
  const double off_sd = std::sqrt(1.0 / static_cast<double>(n));
  const double diag_sd = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    W(i, i) = diag_sd * rng.normal();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = off_sd * rng.normal();
      W(i, j) = w;
      W(j, i) = w;
    }
  }
  const Matrix A = (snr / static_cast<double>(n)) * (x * x.transpose()) + W;

  Instance inst;
  inst.n = n;
  inst.objective = Objective::linear(SymMat(-A));
  inst.constraints = diag_constraints(n);
  inst.planted_signs = x;
  inst.name = "z2sync_n" + std::to_string(n) + "_seed" + std::to_string(seed);
  return {std::move(inst), std::move(x)};
}

std::pair<Instance, Certificate> gen_random_quadratics(Eigen::Index n, int r_star,
                                                       Eigen::Index k, double lambda_Z,
                                                       std::uint64_t seed) {
  if (k < 1) throw GenerationError("gen_random_quadratics: need k >= 1");
  if (lambda_Z <= 0) throw GenerationError("gen_random_quadratics: lambda_Z must be positive");
  if (r_star < 1 || r_star > n - 1)
    throw GenerationError("gen_random_quadratics: need 1 <= r_star <= n-1");
  Rng rng(seed);

  // (1) planted primal and dual slack
  const Factor R_star = rng.normalMatrix(n, r_star);
  const SymMat X_star = sym_from_factor(R_star);
  const Matrix Q2 = orthogonal_complement(R_star);
  const SymMat Z(lambda_Z * (Q2 * Q2.transpose()));

  // (2) random constraints and multiplier
  const Vector y = rng.normalVector(k);
  std::vector<SymMat> mats;
  mats.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Vector a = rng.normalVector(n);
    mats.emplace_back(a * a.transpose());
  }
  LinOpA constraints(std::move(mats), Vector::Zero(k));
  constraints.b = apply_lin_op(constraints, X_star);

  // (3) objective center closing the KKT system
  const SymMat Y(X_star.mat() + adjoint_lin_op(constraints, y).mat() - Z.mat());

  Instance inst;
  inst.n = n;
  inst.objective = Objective::quadDistance(Y);
  inst.constraints = std::move(constraints);
  inst.name = "random_quadratics_n" + std::to_string(n) + "_r" + std::to_string(r_star) +
              "_k" + std::to_string(k) + "_seed" + std::to_string(seed);
  Certificate cert{R_star, y, Z, r_star};
  inst.certificate = cert;
  return {std::move(inst), std::move(cert)};
}

std::pair<Instance, Certificate> gen_matrix_sensing(Eigen::Index n, int r_star, Eigen::Index N,
                                                    std::uint64_t seed) {
  if (N < 1) throw GenerationError("gen_matrix_sensing: need N >= 1");
  if (r_star < 1 || r_star > n) throw GenerationError("gen_matrix_sensing: need 1 <= r_star <= n");
  Rng rng(seed);
  const Factor R_star = unit_row_factor(n, r_star, rng);
  const SymMat X_star = sym_from_factor(R_star);
  std::vector<Vector> c;
  c.reserve(static_cast<std::size_t>(N));
  Vector d(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Vector ci = rng.normalVector(n);
    d(i) = ci.dot(X_star.mat() * ci);
    c.push_back(std::move(ci));
  }

  Instance inst;
  inst.n = n;
  inst.objective = Objective::matrixSensing(std::move(c), std::move(d));
  inst.constraints = diag_constraints(n);
  inst.name = "matrix_sensing_n" + std::to_string(n) + "_r" + std::to_string(r_star) + "_N" +
              std::to_string(N) + "_seed" + std::to_string(seed);
  Certificate cert{R_star, Vector::Zero(n), SymMat::Zero(n), r_star};
  inst.certificate = cert;
  return {std::move(inst), std::move(cert)};
}

std::pair<Instance, Certificate> generate(const GenSpec& spec) {
  switch (spec.family) {
    case Family::MaxCutPlanted:
      return gen_maxcut_planted(spec.n, spec.r_star, spec.seed);
    case Family::Z2Sync: {
      auto [inst, signs] = gen_z2_sync(spec.n, spec.snr, spec.seed);
      (void)signs;
      return {std::move(inst), Certificate{}};
    }
    case Family::RandomQuadratics:
      return gen_random_quadratics(spec.n, spec.r_star, spec.k, spec.lambda_Z, spec.seed);
    case Family::MatrixSensing:
      return gen_matrix_sensing(spec.n, spec.r_star, spec.N, spec.seed);
  }
  throw GenerationError("generate: unknown family");
}

}  // namespace lrsdp
