#pragma once

#include <vector>

#include "irsopt/types.hpp"

namespace irsopt {

struct HybridFactors {
  CMat rf;        // N_t x N_RF, unit-modulus entries
  CMat baseband;  // N_RF x K
  /// ||W - rf * baseband||_F after the power renormalization.
  double residual = 0.0;

  CMat precoder() const { return rf * baseband; }
};

/// Unit-norm steering columns over spatial frequencies -1 + 2 i / grid,
/// i = 0 .. grid-1 (f = 0 is present for even grids).
CMat steering_dictionary(int n_t, int grid_size);

/// Orthogonal matching pursuit: pick n_rf atoms by residual correlation,
/// least-squares baseband after each pick, then rescale the baseband so
/// that ||rf * baseband||_F = ||W||_F. Atoms are used at unit modulus.
HybridFactors omp_decompose(const CMat& digital, const CMat& dictionary, int n_rf);

/// Beamformers as columns and back.
CMat stack_beamformers(const std::vector<CVec>& beamformers);
std::vector<CVec> split_beamformers(const CMat& precoder);

}  // namespace irsopt
