#pragma once

// Shared helpers for the test suites: small random problem builders and the
// independent oracles (finite differences, dense projections, a subgradient
// solver for the prox-linear model). Everything here is deliberately naive
// and kept independent of the library's solution paths.

#include <cmath>
#include <functional>
#include <vector>

#include "lrsdp/generators.hpp"
#include "lrsdp/pogs.hpp"
#include "lrsdp/rng.hpp"

namespace lrsdp::testing {

inline SymMat random_sym(Rng& rng, Eigen::Index n, double scale = 1.0) {
  return SymMat(scale * rng.normalMatrix(n, n));
}

inline LinOpA random_lin_op(Rng& rng, Eigen::Index n, Eigen::Index k, double scale = 1.0) {
  std::vector<SymMat> mats;
  mats.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) mats.push_back(random_sym(rng, n, scale));
  return LinOpA(std::move(mats), rng.normalVector(k));
}

// Central finite difference of a scalar function along a direction.
inline double central_diff(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

// Directional derivative of f at X along symmetric direction D.
inline double objective_dir_deriv_fd(const Objective& obj, const SymMat& X, const SymMat& D) {
  const double h = 1e-6 * (1.0 + X.mat().norm());
  return central_diff(
      [&](double s) { return objective_value(obj, SymMat(X.mat() + s * D.mat())); }, h);
}

// Directional derivative of phi_f(R) = f(RR^T) along factor direction D.
inline double phi_f_dir_deriv_fd(const Instance& inst, const Factor& R, const Factor& D) {
  const double h = 1e-6 * (1.0 + R.norm());
  return central_diff(
      [&](double s) {
        return objective_value(inst.objective, sym_from_factor(Factor(R + s * D)));
      },
      h);
}

// Directional derivative of the full penalty phi along factor direction D.
inline double phi_dir_deriv_fd(const Instance& inst, const Factor& R, const Factor& D,
                               const PenaltyParams& pen) {
  const double h = 1e-6 * (1.0 + R.norm());
  return central_diff([&](double s) { return phi_value(inst, R + s * D, pen).phi; }, h);
}

// Dense graph projection oracle: build M explicitly and solve the normal
// equations with a dense factorization.
inline std::pair<Vector, Factor> dense_graph_projection(const Subproblem& sub, const Vector& z,
                                                        const Factor& d) {
  const Matrix M = sub.graphMatrix();
  const Eigen::Index nr = M.cols();
  const Matrix A = Matrix::Identity(nr, nr) + M.transpose() * M;
  const Vector rhs = d.reshaped() + M.transpose() * z;
  const Vector x = A.ldlt().solve(rhs);
  return {M * x, x.reshaped(d.rows(), d.cols())};
}

// High-accuracy subgradient oracle for the subproblem model, independent of
// the ADMM path: plain subgradient descent with the strongly-convex stepsize
// schedule, returning the best iterate seen.
struct SubgradOracleResult {
  Factor delta;
  double value = 0.0;
};
inline SubgradOracleResult model_subgradient_oracle(const Subproblem& sub, int iters) {
  const double mu = 1.0 / sub.t();
  Factor x = Factor::Zero(sub.n(), sub.r());
  SubgradOracleResult best{x, sub.modelValue(x)};
  for (int k = 1; k <= iters; ++k) {
    // Subgradient of the model at x.
    Factor g = sub.smoothBlockGrad(x);
    const Vector zres = sub.graphMap(x) + sub.residual0();
    const double zn = zres.norm();
    if (zn > 0) g += sub.lambda() * sub.graphAdjoint(zres / zn);
    x -= (2.0 / (mu * (k + 1))) * g;
    const double v = sub.modelValue(x);
    if (v < best.value) {
      best.value = v;
      best.delta = x;
    }
  }
  return best;
}

// Least-squares regression slope of y on x.
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace lrsdp::testing
