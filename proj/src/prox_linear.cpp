#include "lrsdp/prox_linear.hpp"

#include <cassert>
#include <chrono>
#include <cmath>

namespace lrsdp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<double> dist_to_cert(const Instance& inst, const Factor& R, bool enabled) {
  if (!enabled || !inst.certificate) return std::nullopt;
  return procrustes_distance_padded(R, inst.certificate->R_star);
}

}  // namespace

SolveResult prox_linear_solve(const Instance& inst, const Factor& R0, const SolveConfig& cfg) {
  if (R0.rows() != inst.n || R0.cols() < 1)
    throw DimensionError("prox_linear_solve: R0 must be n x r with r >= 1");
  if (cfg.lambda <= 0 || cfg.grad_map_tol <= 0 || cfg.max_outer < 1)
    throw std::invalid_argument("prox_linear_solve: invalid config");

  double t = cfg.t > 0 ? cfg.t : 1.0 / cfg.lambda;
  const PenaltyParams pen{cfg.lambda, cfg.feas_tol};

  SolveResult out;
  out.R = R0;
  PhiValue cur = phi_value(inst, out.R, pen);

  TraceRecord rec0;
  rec0.iter = 0;
  rec0.phi = cur.phi;
  rec0.f_val = cur.f_val;
  rec0.feas = cur.feas;
  rec0.dist_to_solution = dist_to_cert(inst, out.R, cfg.record_dist);
  out.trace.push_back(rec0);

  double prev_gm = std::numeric_limits<double>::infinity();
  out.status = SolveStatus::MaxIterations;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    const auto t0 = std::chrono::steady_clock::now();

    PogsParams inner = cfg.pogs;
    // The inner accuracy tightens as the outer iterate converges, with a
    // floor no looser than the outer stationarity target.
    const double rel_floor = std::min(cfg.pogs.rel_tol, cfg.grad_map_tol);
    inner.rel_tol = std::max(rel_floor, std::min(1e-6, 0.1 * prev_gm));
    inner.abs_tol = std::min(cfg.pogs.abs_tol, std::max(0.1 * cfg.grad_map_tol, 1e-14));

    Subproblem sub(inst, out.R, t, cfg.lambda);
    PogsResult step = pogs_solve(sub, inner);
    double gm_solved = step.delta.norm() / t;

    Factor R_next = out.R + step.delta;
    PhiValue next = phi_value(inst, R_next, pen);
    int inner_iters = step.iterations;

    const double slack = 1e-12 * (1.0 + std::abs(cur.phi));
    if (next.phi > cur.phi + slack) {
      // Retry once with 10x tighter inner tolerance.
      PogsParams tighter = inner;
      tighter.rel_tol = inner.rel_tol / 10.0;
      tighter.abs_tol = inner.abs_tol / 10.0;
      step = pogs_solve(sub, tighter);
      gm_solved = step.delta.norm() / t;
      R_next = out.R + step.delta;
      next = phi_value(inst, R_next, pen);
      inner_iters += step.iterations;
      if (next.phi > cur.phi + slack) {
        // Accept the null step and shrink the stepsize for later iterations.
        if (out.t_halvings >= 5) {
          out.status = SolveStatus::Stalled;
          out.final_t = t;
          return out;
        }
        ++out.t_halvings;
        t *= 0.5;
        R_next = out.R;
        next = cur;
        step.delta.setZero();
      }
    }

    TraceRecord rec;
    rec.iter = k;
    rec.phi = next.phi;
    rec.f_val = next.f_val;
    rec.feas = next.feas;
    rec.grad_map_norm = step.delta.norm() / t;
    rec.dist_to_solution = dist_to_cert(inst, R_next, cfg.record_dist);
    rec.inner_iters = inner_iters;
    rec.wall_time = seconds_since(t0);
    if (k == 1) out.trace.front().grad_map_norm = gm_solved;
    assert(rec.phi <= cur.phi + slack);
    out.trace.push_back(rec);

    out.R = std::move(R_next);
    cur = next;
    prev_gm = std::max(gm_solved, 1e-300);

    if (gm_solved <= cfg.grad_map_tol) {
      out.status = SolveStatus::Converged;
      break;
    }
    if (cfg.feas_target && cur.feas <= *cfg.feas_target) {
      out.status = SolveStatus::Converged;
      break;
    }
  }
  out.final_t = t;
  return out;
}

double check_descent(const TraceRecord& prev, const TraceRecord& cur, double L, double beta) {
  if (L <= 0 || beta <= 0) throw std::invalid_argument("check_descent: L, beta must be positive");
  const double g = cur.grad_map_norm;
  return (prev.phi - cur.phi) - g * g / (2.0 * L * beta);
}

double phi_star_from_certificate(const Instance& inst) {
  if (!inst.certificate) throw std::invalid_argument("phi_star_from_certificate: no certificate");
  return objective_value(inst.objective, sym_from_factor(inst.certificate->R_star));
}

}  // namespace lrsdp
