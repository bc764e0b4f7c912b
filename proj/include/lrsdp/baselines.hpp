#pragma once

#include "lrsdp/prox_linear.hpp"

namespace lrsdp {

// Projected gradient descent for unit-diagonal problems:
// R <- row-normalize((I - 2tC) R). Every iterate is feasible.
struct PgdResult {
  Factor R;
  std::vector<TraceRecord> trace;
  int zero_row_events = 0;  // rows kept from the previous iterate
};
PgdResult pgd_maxcut(const Instance& inst, const Factor& R0, double t, int iters);

struct FwConfig {
  double alpha_trace = 0.0;  // trace bound alpha >= tr(X_star)
  double rho = 1.0;          // augmented Lagrangian parameter
  int outer_rounds = 20;     // method-of-multipliers rounds
  int inner_fw_iters = 50;   // Frank-Wolfe iterations per round
  double eig_tol = 1e-7;
};

struct FwRound {
  double f_val = 0.0;
  double feas = 0.0;
};

struct FwResult {
  SymMat X;
  std::vector<FwRound> rounds;
};

// Convex initializer: method-of-multipliers rounds on the augmented
// Lagrangian, each minimized by Frank-Wolfe over {X >= 0, tr(X) <= alpha}
// with step tau_j = 2/(j+2) and the rank-one linear minimization oracle
// S = alpha v v^T when lambda_min of the gradient is negative, else 0.
FwResult fw_init(const Instance& inst, const FwConfig& cfg);

// Best PSD rank-r Frobenius approximation of the PSD part of X, returned in
// factored form (negative eigenvalues clipped to zero, column signs fixed).
Factor rank_r_truncate(const SymMat& X, int r);

}  // namespace lrsdp
