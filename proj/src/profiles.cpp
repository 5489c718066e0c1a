#include "irsopt/profiles.hpp"

namespace irsopt {

Scenario paper_scenario() {
  Scenario s;
  s.bs_position = {0.0, 0.0, 0.0};
  s.irs_positions = {{0.0, 30.0, 20.0}, {0.0, 60.0, 20.0}, {0.0, 90.0, 20.0}};
  s.user_positions = {{0.0, 30.0, 0.0}, {0.0, 60.0, 0.0}, {0.0, 90.0, 0.0}};
  s.n_t = 16;
  s.n_r = 16;
  s.n_paths_irs_user = 3;
  s.beta0_db = 61.4;
  s.c_los = 2.0;
  s.c_nlos = 5.0;
  s.noise_power_dbm = -100.0;
  s.power_budget_dbm = 5.0;
  s.gamma_bits = 0.1;
  s.array_gain = true;
  s.seed = 1;
  return s;
}

Scenario desk_scenario() {
  Scenario s = paper_scenario();
  s.user_positions.resize(2);
  s.n_t = 8;
  s.n_r = 8;
  s.noise_power_dbm = -200.0;
  s.gamma_bits = 0.02;
  return s;
}

PowerModel paper_power_model() { return {0.25, 0.01, 8}; }

PowerModel desk_power_model() { return {0.25, 0.01, 4}; }

}  // namespace irsopt
