#include "irsopt/metrics.hpp"

#include <cmath>

#include "irsopt/channel.hpp"
#include "irsopt/errors.hpp"

namespace irsopt {

double sinr(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers, const Vec& noise,
            int user_index) {
  const int k_users = static_cast<int>(effective.size());
  if (static_cast<int>(beamformers.size()) != k_users || noise.size() != k_users) {
    throw DimensionError("sinr: user count mismatch");
  }
  if (user_index < 0 || user_index >= k_users) throw DimensionError("sinr: user index out of range");
  const double sigma2 = noise(user_index);
  if (!(sigma2 > 0.0)) throw DomainError("sinr: noise power must be positive");
  const CVec& a = effective[user_index];
  double signal = 0.0, interference = 0.0;
  for (int i = 0; i < k_users; ++i) {
    if (beamformers[i].size() != a.size()) throw DimensionError("sinr: beamformer length does not match N_t");
    const double g = std::norm(a.dot(beamformers[i]));  // a^H w_i
    if (i == user_index) signal = g; else interference += g;
  }
  return signal / (interference + sigma2);
}

double sinr(const ChannelSet& channels, const DesignState& state, int user_index) {
  const auto eff = effective_channels(channels, state.phases, state.switches);
  return sinr(eff, state.beamformers, channels.noise, user_index);
}

double user_rate(double sinr_value) {
  if (!(sinr_value >= 0.0)) throw DomainError("user_rate: SINR must be nonnegative");
  return std::log2(1.0 + sinr_value);
}

std::vector<double> user_rates(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers,
                               const Vec& noise) {
  std::vector<double> out(effective.size());
  for (std::size_t k = 0; k < effective.size(); ++k) {
    out[k] = user_rate(sinr(effective, beamformers, noise, static_cast<int>(k)));
  }
  return out;
}

std::vector<double> user_rates(const ChannelSet& channels, const DesignState& state) {
  return user_rates(effective_channels(channels, state.phases, state.switches), state.beamformers, channels.noise);
}

double sum_rate(const std::vector<CVec>& effective, const std::vector<CVec>& beamformers, const Vec& noise) {
  double total = 0.0;
  for (double r : user_rates(effective, beamformers, noise)) total += r;
  return total;
}

double sum_rate(const ChannelSet& channels, const DesignState& state) {
  return sum_rate(effective_channels(channels, state.phases, state.switches), state.beamformers, channels.noise);
}

double transmit_power(const std::vector<CVec>& beamformers) {
  double p = 0.0;
  for (const auto& w : beamformers) p += w.squaredNorm();
  return p;
}

double energy_efficiency(double sum_rate_value, double transmit_watts, const SwitchVector& switches, int n_r,
                         const PowerModel& power) {
  if (power.p_rf_watts < 0.0 || power.p_irs_watts < 0.0 || power.n_rf < 0) {
    throw DomainError("energy_efficiency: power model entries must be nonnegative");
  }
  const double denom = transmit_watts + power.n_rf * power.p_rf_watts +
                       switches.active_count() * static_cast<double>(n_r) * power.p_irs_watts;
  if (!(denom > 0.0)) throw DomainError("energy_efficiency: total consumed power must be positive");
  return sum_rate_value / denom;
}

double energy_efficiency(const ChannelSet& channels, const DesignState& state, const PowerModel& power) {
  return energy_efficiency(sum_rate(channels, state), transmit_power(state), state.switches, channels.n_r(), power);
}

}  // namespace irsopt
