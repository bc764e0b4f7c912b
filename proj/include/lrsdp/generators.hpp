#pragma once

#include <cstdint>

#include "lrsdp/problem.hpp"

namespace lrsdp {

enum class Family { MaxCutPlanted, Z2Sync, RandomQuadratics, MatrixSensing };

struct GenSpec {
  Family family = Family::MaxCutPlanted;
  Eigen::Index n = 50;
  int r_star = 2;
  Eigen::Index k = 0;      // RandomQuadratics constraint count
  double snr = 1.0;        // Z2Sync signal-to-noise
  double lambda_Z = 1.0;   // RandomQuadratics dual eigenvalue floor
  Eigen::Index N = 0;      // MatrixSensing sample count
  std::uint64_t seed = 0;
};

// MaxCut-type SDP (diag(X) = 1, linear objective) with a planted primal/dual
// certificate: C = Z_star - Diag(y_star) with Z_star the projector onto
// range(R_star)^perp, so strict complementarity holds with rank(Z) = n - r.
// Resamples (up to 20 times) until the dual non-degeneracy constant gamma_Q
// exceeds 1e-6.
std::pair<Instance, Certificate> gen_maxcut_planted(Eigen::Index n, int r_star,
                                                    std::uint64_t seed);

// Z2 synchronization: C = -((snr/n) x x^T + W) with W a GOE matrix
// (W_ij ~ N(0,1/n) off-diagonal, W_ii ~ N(0,2/n)), constraints diag(X) = 1.
// Returns the planted sign vector; no certificate (tightness is
// probabilistic).
std::pair<Instance, Vector> gen_z2_sync(Eigen::Index n, double snr, std::uint64_t seed);

// Random quadratics: f(X) = 0.5 ||X - Y||_F^2 with Y = X_star + A^*(y) - Z
// built so that (R_star, y, Z) is a KKT point by construction;
// Z = lambda_Z * Q2 Q2^T, A_i = a_i a_i^T with Gaussian a_i.
std::pair<Instance, Certificate> gen_random_quadratics(Eigen::Index n, int r_star,
                                                       Eigen::Index k, double lambda_Z,
                                                       std::uint64_t seed);

// Low-rank matrix sensing with unit-diagonal constraints. d_i = <c_i c_i^T,
// X_star> so the objective vanishes at the planted point; the certificate
// carries y = 0, Z = 0 (valid since grad f(X_star) = 0).
std::pair<Instance, Certificate> gen_matrix_sensing(Eigen::Index n, int r_star, Eigen::Index N,
                                                    std::uint64_t seed);

std::pair<Instance, Certificate> generate(const GenSpec& spec);

// Unit-diagonal constraint block: A_i = e_i e_i^T, b = 1.
LinOpA diag_constraints(Eigen::Index n);

}  // namespace lrsdp
