#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lrsdp/linalg.hpp"
#include "lrsdp/rng.hpp"
#include "test_support.hpp"

using namespace lrsdp;

TEST_CASE("sym_from_factor basics") {
  Factor col(2, 1);
  col << 1, 1;
  CHECK(sym_from_factor(col).mat().isApprox(Matrix::Ones(2, 2)));

  CHECK(sym_from_factor(Factor(Matrix::Identity(2, 2))).mat().isApprox(Matrix::Identity(2, 2)));

  Factor R(3, 2);
  R << 1, 0, 0, 1, 1, 1;
  Matrix expect(3, 3);
  expect << 1, 0, 1, 0, 1, 1, 1, 1, 2;
  CHECK(sym_from_factor(R).mat().isApprox(expect));
}

TEST_CASE("symmetrization is idempotent") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = rng.normalMatrix(5, 5);
    const SymMat s(m);
    CHECK(s.mat().isApprox(0.5 * (m + m.transpose())));
    CHECK(SymMat(s.mat()).mat() == s.mat());
    CHECK((s.mat() - s.mat().transpose()).norm() == 0.0);
  }
}

TEST_CASE("apply_lin_op examples") {
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1;
  Matrix x(2, 2);
  x << 2, 1, 1, 3;
  LinOpA A({SymMat(e11)}, Vector::Zero(1));
  CHECK(apply_lin_op(A, SymMat(x))(0) == doctest::Approx(2.0));
  CHECK(apply_lin_op(A, SymMat::Zero(2))(0) == 0.0);

  Matrix off(2, 2);
  off << 0, 1, 1, 0;
  LinOpA Aoff({SymMat(off)}, Vector::Zero(1));
  CHECK(apply_lin_op(Aoff, SymMat(x))(0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(apply_lin_op(A, SymMat::Zero(3)), DimensionError);
}

TEST_CASE("adjoint examples and identity") {
  LinOpA single({SymMat::Identity(3)}, Vector::Zero(1));
  Vector y3(1);
  y3 << 3;
  CHECK(adjoint_lin_op(single, y3).mat().isApprox(3.0 * Matrix::Identity(3, 3)));
  CHECK(adjoint_lin_op(single, Vector::Zero(1)).mat().isZero());

  Rng rng(11);
  const LinOpA A = testing::random_lin_op(rng, 4, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const SymMat X = testing::random_sym(rng, 4);
    const Vector y = rng.normalVector(3);
    const double lhs = apply_lin_op(A, X).dot(y);
    const double rhs = X.mat().cwiseProduct(adjoint_lin_op(A, y).mat()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + X.mat().norm() * y.norm()));
  }
}

TEST_CASE("lin_op_factored matches the dense path") {
  Rng rng(13);
  const LinOpA A = testing::random_lin_op(rng, 4, 3);
  const Factor R = rng.normalMatrix(4, 2);

  CHECK(lin_op_factored(A, R, Factor::Zero(4, 2)).norm() == 0.0);

  const Vector self = lin_op_factored(A, R, R);
  CHECK(self.isApprox(2.0 * apply_lin_op(A, sym_from_factor(R)), 1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    const Factor D = rng.normalMatrix(4, 2);
    const Vector fast = lin_op_factored(A, R, D);
    const SymMat dense(R * D.transpose() + D * R.transpose());
    CHECK(fast.isApprox(apply_lin_op(A, dense), 1e-12));
  }
}

TEST_CASE("lin_op_norm") {
  LinOpA eye({SymMat::Identity(2)}, Vector::Zero(1));
  CHECK(lin_op_norm(eye, 1e-8) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

  const Eigen::Index n = 5;
  LinOpA diag = diag_constraints(n);
  CHECK(lin_op_norm(diag, 1e-8) == doctest::Approx(1.0).epsilon(1e-6));

  LinOpA zero({SymMat::Zero(3)}, Vector::Zero(1));
  CHECK(lin_op_norm(zero, 1e-8) == 0.0);
}

TEST_CASE("procrustes alignment") {
  Rng rng(17);
  const Factor R = rng.normalMatrix(5, 2);

  const auto self = procrustes(R, R);
  CHECK(self.dist == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(self.omega.isApprox(Matrix::Identity(2, 2), 1e-10));

  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;  // planar rotation by 90 degrees
  const auto rotated = procrustes(R, Factor(R * rot));
  CHECK(rotated.dist <= 1e-10);

  Factor a(2, 1), b(2, 1);
  a << 1, 0;
  b << -1, 0;
  const auto flip = procrustes(a, b);
  CHECK(flip.omega(0, 0) == doctest::Approx(-1.0));
  CHECK(flip.dist <= 1e-12);
}

TEST_CASE("procrustes optimality and PSD alignment") {
  Rng rng(19);
  for (int pair = 0; pair < 200; ++pair) {
    const Eigen::Index r = 1 + rng.below(3);
    const Eigen::Index n = r + 2 + rng.below(4);
    const Factor R = rng.normalMatrix(n, r);
    const Factor Q = rng.normalMatrix(n, r);
    const auto pr = procrustes(R, Q);

    CHECK((pr.omega * pr.omega.transpose() - Matrix::Identity(r, r)).norm() <= 1e-12);
    // Omega^T Q^T R is symmetric PSD up to tolerance.
    const Matrix s = pr.omega.transpose() * Q.transpose() * R;
    CHECK((s - s.transpose()).norm() <= 1e-10 * (1.0 + s.norm()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * (1.0 + s.norm()));

    if (r == 1) {
      const double best = std::min((R - Q).norm(), (R + Q).norm());
      CHECK(pr.dist == doctest::Approx(best).epsilon(1e-12));
    }
    for (int probe = 0; probe < (r == 1 ? 2 : 1000); ++probe) {
      const Matrix omega = rng.orthogonal(r);
      CHECK(pr.dist <= (R - Q * omega).norm() + 1e-10);
    }
  }
}

TEST_CASE("min_eigpair diagonal and identity") {
  Vector v(3);
  v << 1, -2, 3;
  const SymMat D(Matrix(v.asDiagonal()));
  const EigPair p = min_eigpair(D, 1e-10);
  CHECK(p.value == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(std::abs(p.vector(1)) == doctest::Approx(1.0).epsilon(1e-8));

  const EigPair pi = min_eigpair(SymMat::Identity(4), 1e-10);
  CHECK(pi.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pi.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("min_eigpair matches a dense eigensolver") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMat S = testing::random_sym(rng, 6);
    const EigPair p = min_eigpair(S, 1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S.mat(), Eigen::EigenvaluesOnly);
    const double truth = es.eigenvalues().minCoeff();
    CHECK(std::abs(p.value - truth) <= 1e-9 * (1.0 + S.mat().norm()) * 10);
    CHECK(p.residual <= 1e-9 * (1.0 + S.mat().norm()));
  }
}

TEST_CASE("min_norm_in_span_ball matches projection when the ball is large") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix M = rng.normalMatrix(8, 3);
    const Vector g = rng.normalVector(8);
    const auto mn = min_norm_in_span_ball(M, g, 1e9);
    // Compare against the explicit orthogonal projection.
    const Matrix P = M * (M.transpose() * M).ldlt().solve(M.transpose());
    const Vector expect = g - P * g;
    CHECK((mn.element - expect).norm() <= 1e-8 * (1.0 + g.norm()));

    // Small ball: solution lies on the boundary and beats a few samples.
    const auto clamped = min_norm_in_span_ball(M, g, 0.1);
    CHECK(clamped.coefficient.norm() <= 0.1 + 1e-9);
    for (int probe = 0; probe < 50; ++probe) {
      Vector w = rng.normalVector(3);
      w *= 0.1 / w.norm();
      CHECK(clamped.element.norm() <= (g + M * w).norm() + 1e-8);
    }
  }
}

TEST_CASE("orthogonal_complement and dual_nondegeneracy_gamma") {
  Rng rng(31);
  const Factor R = rng.normalMatrix(6, 2);
  const Matrix Q2 = orthogonal_complement(R);
  CHECK(Q2.cols() == 4);
  CHECK((Q2.transpose() * Q2 - Matrix::Identity(4, 4)).norm() <= 1e-12);
  CHECK((Q2.transpose() * R).norm() <= 1e-12 * R.norm());

  // MaxCut r* = 1: gamma_Q equals sum of q_i^4.
  const Eigen::Index n = 5;
  Vector q = rng.normalVector(n);
  q.normalize();
  const LinOpA diag = diag_constraints(n);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) expect += std::pow(q(i), 4);
  CHECK(dual_nondegeneracy_gamma(diag, q) == doctest::Approx(expect).epsilon(1e-10));
}
