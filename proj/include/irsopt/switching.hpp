#pragma once

#include <vector>

#include "irsopt/metrics.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

struct SwitchResult {
  SwitchVector switches;
  double value = 0.0;
  /// Deactivations performed (greedy) or vectors evaluated (exhaustive).
  int rounds = 0;
};

/// Sum-rate under x when every user meets its threshold, else 0.
double switch_value(const ChannelSet& channels, const std::vector<CVec>& phases,
                    const std::vector<CVec>& beamformers, const SwitchVector& switches,
                    const std::vector<double>& gamma_bits);

/// Greedy deactivation search starting from all-on. Each round switches off
/// the IRS whose removal gives the largest value, if that strictly beats
/// the current value; ties go to the lowest index.
SwitchResult greedy_switch(const ChannelSet& channels, const std::vector<CVec>& phases,
                           const std::vector<CVec>& beamformers, const std::vector<double>& gamma_bits);

/// All 2^L vectors (L <= 16). Ties: fewest active IRSs, then the
/// lexicographically smallest active index set.
SwitchResult exhaustive_switch(const ChannelSet& channels, const std::vector<CVec>& phases,
                               const std::vector<CVec>& beamformers, const std::vector<double>& gamma_bits);

}  // namespace irsopt
