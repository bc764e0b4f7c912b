#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lrsdp/generators.hpp"
#include "lrsdp/prox_linear.hpp"
#include "lrsdp/rng.hpp"
#include "test_support.hpp"

using namespace lrsdp;
using namespace lrsdp::testing;

namespace {

SolveConfig planted_config(const Certificate& cert) {
  SolveConfig cfg;
  cfg.lambda = 2.0 * cert.y_star.norm() + 1.0;
  cfg.max_outer = 300;
  cfg.grad_map_tol = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("starting at the planted optimum terminates immediately") {
  auto [inst, cert] = gen_maxcut_planted(10, 2, 3);
  SolveConfig cfg = planted_config(cert);
  cfg.grad_map_tol = 1e-8;
  const SolveResult res = prox_linear_solve(inst, cert.R_star, cfg);
  CHECK(res.status == SolveStatus::Converged);
  CHECK(res.trace.back().iter <= 1);
  CHECK(res.trace.back().grad_map_norm <= cfg.grad_map_tol);
}

TEST_CASE("planted maxcut at the true rank converges with monotone descent") {
  auto [inst, cert] = gen_maxcut_planted(16, 2, 5);
  SolveConfig cfg = planted_config(cert);
  Rng rng(7);
  const Factor R0 = rng.normalMatrix(16, 2) / 4.0;
  const SolveResult res = prox_linear_solve(inst, R0, cfg);

  const double phi_star = phi_star_from_certificate(inst);
  const TraceRecord& last = res.trace.back();
  CHECK(last.feas <= 1e-8);
  CHECK(last.phi - phi_star <= 1e-6);
  REQUIRE(last.dist_to_solution.has_value());
  CHECK(*last.dist_to_solution <= 1e-4);

  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].phi <= res.trace[i - 1].phi + 1e-12 * (1.0 + std::abs(res.trace[i - 1].phi)));
    CHECK(res.trace[i].phi == doctest::Approx(res.trace[i].f_val + cfg.lambda * res.trace[i].feas)
                                  .epsilon(1e-12));
  }

  // Stationarity sanity at convergence (loose near-stationarity scaling).
  const SubgradResult sg = min_norm_subgrad(inst, res.R, PenaltyParams{cfg.lambda, cfg.feas_tol});
  const double L = inst.objective.C.mat().norm() + cfg.lambda * lin_op_norm(inst.constraints, 1e-6);
  const double beta = 2.0;
  const double t = res.final_t;
  CHECK(sg.G.norm() <= 10.0 * cfg.grad_map_tol * (3.0 * L * beta * t + 2.0) / t);

  // Under-specified rank stays bounded away from the optimum.
  SolveConfig under = cfg;
  const Factor R0_1 = rng.normalMatrix(16, 1) / 4.0;
  const SolveResult res1 = prox_linear_solve(inst, R0_1, under);
  CHECK(res1.trace.back().phi - phi_star > 1e-2);
}

TEST_CASE("orbit invariance of the trace") {
  auto [inst, cert] = gen_maxcut_planted(12, 2, 11);
  SolveConfig cfg = planted_config(cert);
  cfg.max_outer = 25;
  cfg.grad_map_tol = 1e-13;
  Rng rng(13);
  const Factor R0 = rng.normalMatrix(12, 2) / 3.0;
  const Matrix omega = rng.orthogonal(2);

  const SolveResult a = prox_linear_solve(inst, R0, cfg);
  const SolveResult b = prox_linear_solve(inst, Factor(R0 * omega), cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(std::abs(a.trace[i].phi - b.trace[i].phi) <= 1e-8 * (1.0 + std::abs(a.trace[i].phi)));
    CHECK(std::abs(a.trace[i].feas - b.trace[i].feas) <= 1e-8 * (1.0 + a.trace[i].feas));
    CHECK(std::abs(a.trace[i].grad_map_norm - b.trace[i].grad_map_norm) <=
          1e-8 * (1.0 + a.trace[i].grad_map_norm));
  }
}

TEST_CASE("linear rate detection on the planted instance") {
  auto [inst, cert] = gen_maxcut_planted(20, 2, 17);
  SolveConfig cfg = planted_config(cert);
  cfg.max_outer = 200;
  Rng rng(19);
  const Factor R0 = rng.normalMatrix(20, 2) / 4.0;
  const SolveResult res = prox_linear_solve(inst, R0, cfg);
  const double phi_star = phi_star_from_certificate(inst);

  std::vector<double> iters, logs;
  for (const auto& rec : res.trace) {
    const double gap = rec.phi - phi_star;
    if (gap > 1e-13 * (1.0 + std::abs(phi_star)))
      iters.push_back(rec.iter), logs.push_back(std::log(gap));
  }
  REQUIRE(iters.size() >= 8);
  const std::size_t half = iters.size() / 2;
  const double slope = regression_slope(
      std::vector<double>(iters.begin() + half, iters.end()),
      std::vector<double>(logs.begin() + half, logs.end()));
  CHECK(slope <= std::log(0.999));
}

TEST_CASE("check_descent") {
  TraceRecord a{0, 1.0, 1.0, 0.0, 0.0, std::nullopt, 0, 0.0};
  TraceRecord b{1, 1.0, 1.0, 0.0, 0.0, std::nullopt, 0, 0.0};
  CHECK(check_descent(a, b, 2.0, 2.0) == 0.0);

  TraceRecord worse{1, 1.5, 1.5, 0.0, 0.4, std::nullopt, 0, 0.0};
  CHECK(check_descent(a, worse, 2.0, 2.0) < 0.0);

  // Real run at the theoretical stepsize: margins stay non-negative.
  auto [inst, cert] = gen_maxcut_planted(12, 2, 23);
  const double lambda = std::max(100.0, 2.0 * cert.y_star.norm() + 1.0);
  const double L = inst.objective.C.mat().norm() + lambda * lin_op_norm(inst.constraints, 1e-8);
  const double beta = 2.0;
  SolveConfig cfg;
  cfg.lambda = lambda;
  cfg.t = 1.0 / (L * beta);
  cfg.max_outer = 60;
  cfg.grad_map_tol = 1e-12;
  Rng rng(29);
  const SolveResult res = prox_linear_solve(inst, Factor(rng.normalMatrix(12, 2) / 3.0), cfg);
  CHECK(res.t_halvings == 0);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(check_descent(res.trace[i - 1], res.trace[i], L, beta) >= -1e-9);
  }
}

TEST_CASE("solver rejects invalid configuration") {
  auto [inst, cert] = gen_maxcut_planted(6, 2, 31);
  SolveConfig bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(prox_linear_solve(inst, cert.R_star, bad), std::invalid_argument);
  CHECK_THROWS_AS(prox_linear_solve(inst, Factor(Matrix::Zero(5, 2)), SolveConfig{}),
                  DimensionError);
}
