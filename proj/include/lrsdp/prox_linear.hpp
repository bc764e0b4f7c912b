#pragma once

#include <optional>
#include <vector>

#include "lrsdp/pogs.hpp"

namespace lrsdp {

struct SolveConfig {
  double lambda = 1.0;
  double t = 0.0;  // <= 0 means the default stepsize 1/lambda
  int max_outer = 300;
  double grad_map_tol = 1e-9;
  std::optional<double> feas_target;  // optional extra stop on feasibility
  PogsParams pogs;
  bool record_dist = true;  // log Procrustes distance when a certificate exists
  double feas_tol = 1e-9;
};

struct TraceRecord {
  int iter = 0;
  double phi = 0.0;
  double f_val = 0.0;
  double feas = 0.0;
  double grad_map_norm = 0.0;
  std::optional<double> dist_to_solution;
  int inner_iters = 0;
  double wall_time = 0.0;  // seconds spent producing this iterate
};

enum class SolveStatus { Converged, MaxIterations, Stalled };

struct SolveResult {
  Factor R;
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::MaxIterations;
  double final_t = 0.0;
  int t_halvings = 0;
};

// Outer prox-linear loop on the exact penalty objective. Each accepted step
// appends one record; record 0 is the initial point. Acceptance enforces
// monotone descent: a phi increase triggers one retry at 10x tighter inner
// tolerance, then a null step with a halved stepsize (at most 5 halvings
// before the solve reports Stalled).
SolveResult prox_linear_solve(const Instance& inst, const Factor& R0, const SolveConfig& cfg);

// Margin of the per-step descent inequality at stepsize t = 1/(L*beta):
// (phi_prev - phi_cur) - ||G_t||^2 / (2 L beta), where the gradient-mapping
// norm is the one recorded on the later record. Non-negative margins mean
// the inequality held.
double check_descent(const TraceRecord& prev, const TraceRecord& cur, double L, double beta);

// Penalized optimum value from a certificate (the planted point is feasible,
// so phi_star = f(X_star)).
double phi_star_from_certificate(const Instance& inst);

}  // namespace lrsdp
