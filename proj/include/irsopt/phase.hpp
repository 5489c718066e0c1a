#pragma once

#include <vector>

#include "irsopt/conic/problem.hpp"
#include "irsopt/conic/solver.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

/// v[k][i]: length L N_r vector with v[k][i]^H u = a_k^H w_i for the stacked
/// phase vector u = (u_1, ..., u_L).
using InterferenceVectors = std::vector<std::vector<CVec>>;

struct PhaseScaState {
  /// Stacked phases; unit modulus after the final projection.
  CVec u;
  /// SINR of every user at the returned phases.
  Vec lambda;
  double mu = 0.0;
  int iteration = 0;
  /// sum_k log2(1 + SINR_k(u)) + mu sum_n (|u_n|^2 - 1) after each accepted
  /// step, starting with the initial point.
  std::vector<double> objective_trace;
  /// Smallest |u_n| of the last iterate before projection.
  double min_modulus = 1.0;
  /// False when the projected iterate lost to the initial phases and the
  /// initial phases were returned instead.
  bool improved = false;
  int solver_iterations = 0;
};

struct PhaseOptions {
  /// Penalty weight of the unit-modulus term, fixed for one call. Steps
  /// shrink like (rate gradient) / mu, so this stays well below the rate
  /// gradient; the disk relaxation is usually tight on its own.
  double mu = 1e-4;
  double tol = 1e-4;
  int max_outer = 30;
  conic::SolverOptions solver{.tol = 1e-4, .max_iter = 500};
};

InterferenceVectors interference_vectors(const ChannelSet& channels, const SwitchVector& switches,
                                         const std::vector<CVec>& beamformers);

/// One penalty-SCA step around (u_t, lambda_t), noise-normalized data (the
/// caller divides v[k][*] by sigma_k). Maximizes
///   sum_k log2(1 + lambda_k) + mu sum_n Re[conj(u_t,n) (u_n - u_t,n)]
/// subject to |u_n| <= 1, lambda_k >= 2^gamma_k - 1 and the convex
/// restriction of lambda_k (sum_{i != k} |v_ki^H u|^2 + 1) <= |v_kk^H u|^2.
/// Variables: "u" (real parts, then imaginary parts), "lambda", "t", "beta".
conic::ConicProblem build_p9(const InterferenceVectors& v, const Vec& lambda_t, const CVec& u_t, double mu,
                             const std::vector<double>& gamma_bits);

/// u / |u| elementwise; entries below 1e-12 in modulus map to 1.
CVec project_unit_modulus(const CVec& u);

CVec stack_phases(const std::vector<CVec>& phases);
std::vector<CVec> split_phases(const CVec& u, int n_irs);

/// Penalty-SCA phase design for fixed beamformers and switches.
PhaseScaState sca_phases(const ChannelSet& channels, const SwitchVector& switches,
                         const std::vector<CVec>& beamformers, const std::vector<CVec>& init_phases,
                         const std::vector<double>& gamma_bits, const PhaseOptions& options = {});

}  // namespace irsopt
