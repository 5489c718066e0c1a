#pragma once

#include <vector>

#include "irsopt/channel.hpp"
#include "irsopt/conic/problem.hpp"
#include "irsopt/conic/solver.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

/// Iterate of the SDR + SCA beamforming loop.
struct ScaBeamState {
  std::vector<CMat> covariances;  // W_k, N_t x N_t
  Vec p;
  Vec q;
  Vec q_bar;
  int iteration = 0;
  /// Relaxed sum-rate (bits/s/Hz) of the covariances after each solve,
  /// starting with the initial point.
  std::vector<double> objective_trace;
  /// Rank-one beamformers recovered from the final covariances, or the
  /// initial ones when those score better.
  std::vector<CVec> beamformers;
  int solver_iterations = 0;
};

struct BeamformingOptions {
  double tol = 1e-4;
  int max_outer = 30;
  int randomization_trials = 200;
  std::uint64_t seed = 0x5eed;
  /// Solve in the span of the effective channels instead of C^{N_t}.
  bool reduce_subspace = true;
  /// Step problems only need to improve on the incumbent; the true rate is
  /// re-evaluated exactly after every solve.
  conic::SolverOptions solver{.tol = 1e-4, .max_iter = 500};
};

/// Conic form of one SCA step: maximize sum_i (p_i - q_i) log2 e over
/// Hermitian W_k with
///   e^{p_i} <= sum_k Tr(W_k A_i) + sigma_i^2
///   sum_{k != i} Tr(W_k A_i) + sigma_i^2 <= e^{qbar_i} (1 + q_i - qbar_i)
///   (p_i - q_i) log2 e >= gamma_i,  sum_k Tr(W_k) <= power,  W_k >= 0.
/// Variables "W<k>" hold n^2 reals each: diagonal, then the real and the
/// imaginary parts of the strict upper triangle (row-major).
conic::ConicProblem build_p5(const std::vector<CMat>& a_mats, const Vec& q_bar, const Vec& sigma2,
                             const std::vector<double>& gamma_bits, double power);

/// Reassembles the Hermitian matrices from a solution vector of build_p5.
std::vector<CMat> unpack_covariances(const conic::ConicProblem& problem, const Vec& x, int n_users, int order);

/// q_i = ln(sum_{k != i} Tr(W_k A_i) + sigma_i^2)
Vec update_q_bar(const std::vector<CMat>& covariances, const std::vector<CMat>& a_mats, const Vec& sigma2);

/// Rank-one beamformer for user k from W_k. Near rank-one input returns the
/// scaled principal eigenvector; otherwise Gaussian randomization, scored by
/// the true sum-rate with the other entries of `current` held fixed. With
/// thresholds given, candidates meeting every one of them rank first.
CVec extract_rank_one(const CMat& w, int user_index, const std::vector<CVec>& effective,
                      const std::vector<CVec>& current, const Vec& noise, Rng& rng, int trials = 200,
                      const std::vector<double>& gamma_bits = {});

/// Matched filter with an equal power split; falls back to regularized
/// zero-forcing when the matched filter misses a rate threshold. Throws
/// InfeasibleError when neither meets every threshold.
std::vector<CVec> initial_beamformers(const std::vector<CVec>& effective, const Vec& noise, double power,
                                      const std::vector<double>& gamma_bits);

/// SDR-SCA loop on fixed phases and switches. `init` must meet the rate
/// thresholds (InfeasibleError otherwise).
ScaBeamState sca_beamforming(const ChannelSet& channels, const std::vector<CVec>& phases,
                             const SwitchVector& switches, const std::vector<CVec>& init, double power,
                             const std::vector<double>& gamma_bits, const BeamformingOptions& options = {});

/// Same loop on precomputed effective channels.
ScaBeamState sca_beamforming(const std::vector<CVec>& effective, const Vec& noise, const std::vector<CVec>& init,
                             double power, const std::vector<double>& gamma_bits,
                             const BeamformingOptions& options = {});

}  // namespace irsopt
