#pragma once

#include <string>
#include <vector>

#include "irsopt/beamforming.hpp"
#include "irsopt/phase.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

enum class AoStatus {
  Ok,
  /// Every effective channel is zero: nothing to optimize, rate 0.
  Degenerate,
  /// No starting point meets the rate thresholds.
  Infeasible,
  /// A stage failed before any feasible design was produced.
  SolverFail,
};

const char* to_string(AoStatus status);

enum class SwitchMode {
  Greedy,
  /// x stays all-on; the switch stage is skipped.
  AllActive,
};

struct AoOptions {
  /// Stop when one outer pass changes the sum-rate by at most this much.
  double tol = 1e-3;
  int max_outer = 20;
  SwitchMode switching = SwitchMode::Greedy;
  BeamformingOptions beamforming;
  PhaseOptions phase;
  /// Penalty growth between passes when the relaxed phases stayed far
  /// from the unit circle.
  double mu_growth = 2.0;
  double mu_max = 1e6;
  double min_modulus_target = 0.9;
};

struct StageTimes {
  double beamforming_ms = 0.0;
  double phase_ms = 0.0;
  double switch_ms = 0.0;
};

struct AoReport {
  DesignState state;
  AoStatus status = AoStatus::Ok;
  /// True sum-rate at the start and after every outer pass.
  std::vector<double> objective_trace;
  int outer_iterations = 0;
  /// Inner SCA steps summed over passes.
  int beamforming_steps = 0;
  int phase_steps = 0;
  /// Inner objective traces of every beamforming and phase run, in order.
  std::vector<std::vector<double>> beamforming_traces;
  std::vector<std::vector<double>> phase_traces;
  int solver_iterations = 0;
  StageTimes times;
  /// Stages that threw after a feasible design existed; the incumbent is kept.
  int stage_failures = 0;
  std::string message;

  double sum_rate() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// Alternates beamforming, phase and switch updates from all-ones phases and
/// all-on switches. Each stage starts from the previous design and never
/// returns a worse one, so objective_trace is nondecreasing.
///
/// Cost per pass is roughly one SDR-SCA run (K PSD blocks of order
/// min(N_t, K)), one phase SCA run (L N_r second-order cones) and
/// L^2 sum-rate evaluations for the switch, each O(K^2 L N_r N_t).
AoReport alternating_optimize(const Scenario& scenario, const ChannelSet& channels, const AoOptions& options = {});

struct FeasibilityReport {
  bool feasible = true;
  /// Worst violation per constraint family (0 when satisfied).
  double rate = 0.0;     // max_k gamma_k - R_k
  double power = 0.0;    // P_W / P - 1
  double modulus = 0.0;  // max | |u_ln| - 1 |
  double binary = 0.0;   // 1 when some x_l is not 0/1
};

inline constexpr double kFeasRateTol = 1e-4;
inline constexpr double kFeasPowerTol = 1e-6;
inline constexpr double kFeasModulusTol = 1e-9;

FeasibilityReport check_feasible(const ChannelSet& channels, const DesignState& state, const Scenario& scenario);

}  // namespace irsopt
