#pragma once

#include <optional>

#include "irsopt/conic/problem.hpp"

namespace irsopt::conic {

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 50000;
  /// Over-relaxation factor of the splitting iteration.
  double alpha = 1.5;
  /// Ruiz equilibration passes applied to A.
  int scale_passes = 10;
  /// Extra scalar on the normalized b and c.
  double scale = 1.0;
  /// Residuals are evaluated every this many iterations.
  int check_every = 5;
  /// Anderson acceleration memory on the (u, v) iterate; 0 disables it.
  int anderson_memory = 10;
  /// An accelerated step is undone when it grows the fixed-point residual
  /// by more than this factor.
  double anderson_safeguard = 1.0;
};

/// Previous primal/dual/slack triple used to seed the iteration.
struct WarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
};

/// Operator splitting on the homogeneous self-dual embedding of
///   min c'x  s.t.  Ax + s = b, s in K    /   max -b'y  s.t.  A'y + c = 0, y in K*.
///
/// Residuals are reported on the unscaled data:
///   primal = ||Ax + s - b|| / (1 + ||b||)
///   dual   = ||A'y + c||    / (1 + ||c||)
///   gap    = |c'x + b'y|    / (1 + |c'x| + |b'y|)
ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {},
                    const std::optional<WarmStart>& warm = std::nullopt);

/// Projection of v onto the product cone described by `cones`.
void project_onto_cones(const std::vector<ConeBlock>& cones, Eigen::Ref<Eigen::VectorXd> v);

/// Projection onto the dual product cone (zero cones become free).
void project_onto_dual_cones(const std::vector<ConeBlock>& cones, Eigen::Ref<Eigen::VectorXd> v);

}  // namespace irsopt::conic
