#pragma once

#include "irsopt/types.hpp"

namespace irsopt {

/// Slack on R_k >= gamma_k used by every feasibility test inside the solvers.
inline constexpr double kRateTolerance = 1e-6;

/// |a_k^H w_k|^2 / (sum_{i != k} |a_k^H w_i|^2 + sigma_k^2)
double sinr(const ChannelSet& channels, const DesignState& state, int user_index);

/// Same quantity from precomputed effective channels a_k.
double sinr(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers, const Vec& noise,
            int user_index);

/// log2(1 + sinr); negative input is a DomainError.
double user_rate(double sinr_value);

std::vector<double> user_rates(const ChannelSet& channels, const DesignState& state);
std::vector<double> user_rates(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers,
                               const Vec& noise);

double sum_rate(const ChannelSet& channels, const DesignState& state);
double sum_rate(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers, const Vec& noise);

/// sum_k ||w_k||^2 in watts.
double transmit_power(const std::vector<CVec>& beamformers);
inline double transmit_power(const DesignState& state) { return transmit_power(state.beamformers); }

/// R_sum / (P_W + N_RF P_RF + sum_l x_l N_r P_IRS).
double energy_efficiency(double sum_rate_value, double transmit_watts, const SwitchVector& switches, int n_r,
                         const PowerModel& power);
double energy_efficiency(const ChannelSet& channels, const DesignState& state, const PowerModel& power);

}  // namespace irsopt
