#pragma once

#include "irsopt/types.hpp"

namespace irsopt {

/// Deployment of the reference simulation: BS at the origin, three IRSs at
/// (0, 30|60|90, 20) and three users below them, N_t = N_r = 16.
Scenario paper_scenario();

/// Scaled-down variant: N_t = N_r = 8, L = 3, K = 2, with the noise floor
/// lowered so that the power sweep covers a useful SNR range.
Scenario desk_scenario();

/// RF/IRS power accounting; n_rf is the hybrid RF-chain count.
PowerModel paper_power_model();
PowerModel desk_power_model();

}  // namespace irsopt
