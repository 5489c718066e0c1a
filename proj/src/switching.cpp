#include "irsopt/switching.hpp"

#include "irsopt/channel.hpp"
#include "irsopt/errors.hpp"
#include "irsopt/metrics.hpp"

namespace irsopt {

double switch_value(const ChannelSet& channels, const std::vector<CVec>& phases,
                    const std::vector<CVec>& beamformers, const SwitchVector& switches,
                    const std::vector<double>& gamma_bits) {
  if (static_cast<int>(gamma_bits.size()) != channels.num_users()) {
    throw DimensionError("switch_value: one threshold per user required");
  }
  const auto rates = user_rates(effective_channels(channels, phases, switches), beamformers, channels.noise);
  double total = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] < gamma_bits[k] - kRateTolerance) return 0.0;
    total += rates[k];
  }
  return total;
}

SwitchResult greedy_switch(const ChannelSet& channels, const std::vector<CVec>& phases,
                           const std::vector<CVec>& beamformers, const std::vector<double>& gamma_bits) {
  SwitchResult res{SwitchVector::all_on(channels.num_irs()), 0.0, 0};
  res.value = switch_value(channels, phases, beamformers, res.switches, gamma_bits);
  for (;;) {
    int best = -1;
    double best_value = res.value;
    for (int l = 0; l < res.switches.size(); ++l) {
      if (!res.switches.on(l)) continue;
      SwitchVector trial = res.switches;
      trial.flags[l] = 0;
      const double v = switch_value(channels, phases, beamformers, trial, gamma_bits);
      if (v > best_value) {
        best = l;
        best_value = v;
      }
    }
    if (best < 0) break;
    res.switches.flags[best] = 0;
    res.value = best_value;
    ++res.rounds;
  }
  return res;
}

SwitchResult exhaustive_switch(const ChannelSet& channels, const std::vector<CVec>& phases,
                               const std::vector<CVec>& beamformers, const std::vector<double>& gamma_bits) {
  const int n_irs = channels.num_irs();
  if (n_irs > 16) throw DomainError("exhaustive_switch: L must be at most 16");
  SwitchResult res{SwitchVector::all_off(n_irs), -1.0, 0};
  // Active sets as bit masks, bit l = IRS l. With equal counts, the set that
  // holds the lowest index where the two differ wins.
  auto prefer = [&](unsigned a, unsigned b) {
    const int ca = __builtin_popcount(a), cb = __builtin_popcount(b);
    if (ca != cb) return ca < cb;
    const unsigned diff = a ^ b;
    return (a & diff & (~diff + 1)) != 0;
  };
  unsigned best_mask = 0;
  for (unsigned mask = 0; mask < (1u << n_irs); ++mask) {
    SwitchVector x = SwitchVector::all_off(n_irs);
    for (int l = 0; l < n_irs; ++l) x.flags[l] = (mask >> l) & 1u;
    const double v = switch_value(channels, phases, beamformers, x, gamma_bits);
    ++res.rounds;
    if (v > res.value || (v == res.value && prefer(mask, best_mask))) {
      res.value = v;
      best_mask = mask;
      res.switches = x;
    }
  }
  return res;
}

}  // namespace irsopt
