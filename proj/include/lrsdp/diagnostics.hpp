#pragma once

#include <cstdint>
#include <utility>

#include "lrsdp/problem.hpp"

namespace lrsdp {

// Both sides of a growth inequality and whether it held (1e-10 slack).
struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// ||RR^T - R*R*^T||_F^2 >= 2(sqrt(2)-1) sigma_r^2(R*) ||R - R*||_F^2 after
// Procrustes alignment (the inputs are aligned internally).
BoundCheck check_factor_bound(const Factor& R, const Factor& Rstar);

// ||UU^T - U*U*^T||_F^2 >= (2(sqrt(2)-1)/9r) ||U - U*||_F^4 after alignment.
BoundCheck check_overspec_bound(const Factor& U, const Factor& Ustar);

enum class GrowthDirection {
  TangentRandom,  // random direction in the constraint tangent space
  NewColumn       // perturb only the new column, orthogonal to range(R_star)
};

struct GrowthReport {
  double fitted_order = 0.0;     // log-log regression slope
  double fitted_constant = 0.0;  // exp(intercept)
  int sample_count = 0;
  std::pair<double, double> radius_range{0.0, 0.0};
  int dropped = 0;
};

// Samples feasible points near the (zero-padded) planted factor by tangent
// perturbation plus damped Gauss-Newton retraction onto {A(UU^T) = b}, then
// regresses log(phi_f(U) - phi_f*) on log dist(U, S).
GrowthReport estimate_growth(const Instance& inst, const Certificate& cert, int r, int samples,
                             std::pair<double, double> radii, std::uint64_t seed,
                             GrowthDirection direction = GrowthDirection::TangentRandom);

struct RegularityReport {
  double max_norm_convexity_ratio = 0.0;  // sup (phi - phi*) / (||subgrad|| dist)
  double max_subreg_ratio = 0.0;          // sup dist / ||subgrad||
  int used = 0;
  int skipped = 0;
};

// Mixed feasible/infeasible samples in the radius band around the planted
// factor; ratios use min_norm_subgrad and the padded Procrustes distance.
RegularityReport regularity_ratios(const Instance& inst, const Certificate& cert, double lambda,
                                   int samples, std::pair<double, double> radii,
                                   std::uint64_t seed, int r = 0);

struct KktResidual {
  Vector y_fit;            // -pinv(M_R) vec(grad phi_f)
  double primal_res = 0.0;
  double stat_res = 0.0;   // min_y ||vec(grad phi_f) + M_R y||
};
KktResidual kkt_residual(const Instance& inst, const Factor& R);

struct GrowthConstants {
  double kappa = 0.0;
  double c = 0.0;        // 1 / (2 kappa + 1)
  double gamma_Q = 0.0;  // dual non-degeneracy constant
  double lambda_Z = 0.0; // (r*+1)-th smallest eigenvalue of Z*
};
// Rate-relevant constants for linear objectives with a planted certificate.
GrowthConstants kappa_c(const Instance& inst, const Certificate& cert);

// Local linear rate bound q = 1 - 1/(9 + 40 ell + 100 ell^2 L beta / alpha).
double predicted_rate(double ell, double L, double beta, double alpha_phi);

// SDP-specialized variant q = 1 - 1/(209 + 5000 ratio) with
// ratio = (L_f + lambda ||A||) / alpha_phi.
double predicted_rate_sdp(double ratio);

}  // namespace lrsdp
