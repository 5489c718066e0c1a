#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace irsopt {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Point3 = Eigen::Vector3d;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Static description of one deployment: geometry, dimensions, budgets.
///
/// The IRS count L and the user count K are the lengths of the position
/// lists. Powers are kept in dB units here and converted once when channels
/// are sampled or solvers are set up.
struct Scenario {
  Point3 bs_position{0.0, 0.0, 0.0};
  std::vector<Point3> irs_positions;
  std::vector<Point3> user_positions;
  int n_t = 16;
  int n_r = 16;
  int n_paths_irs_user = 3;
  double beta0_db = 61.4;
  double c_los = 2.0;
  double c_nlos = 5.0;
  double noise_power_dbm = -100.0;
  double power_budget_dbm = 5.0;
  double gamma_bits = 0.0;
  /// Optional per-user thresholds; overrides gamma_bits when non-empty.
  std::vector<double> gamma_per_user;
  /// Unit-modulus array responses (N-fold array gain) instead of unit-norm.
  bool array_gain = true;
  std::uint64_t seed = 1;

  int num_irs() const { return static_cast<int>(irs_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  double noise_power_watts() const { return dbm_to_watts(noise_power_dbm); }
  double power_budget_watts() const { return dbm_to_watts(power_budget_dbm); }
  double gamma(int k) const {
    return gamma_per_user.empty() ? gamma_bits : gamma_per_user.at(k);
  }
  std::vector<double> gammas() const;

  /// Throws DomainError / DimensionError when an invariant is violated.
  void validate() const;
};

/// One channel realization. Linear amplitude scale.
struct ChannelSet {
  std::vector<CMat> g;               // [l] N_r x N_t, BS -> IRS l
  std::vector<std::vector<CVec>> h;  // [k][l] length N_r, IRS l -> user k
  Vec noise;                         // sigma_k^2 in watts, length K

  int num_irs() const { return static_cast<int>(g.size()); }
  int num_users() const { return static_cast<int>(h.size()); }
  int n_t() const { return g.empty() ? 0 : static_cast<int>(g.front().cols()); }
  int n_r() const { return g.empty() ? 0 : static_cast<int>(g.front().rows()); }
};

/// IRS on/off flags x_l.
struct SwitchVector {
  std::vector<std::uint8_t> flags;

  static SwitchVector all_on(int l) { return {std::vector<std::uint8_t>(l, 1)}; }
  static SwitchVector all_off(int l) { return {std::vector<std::uint8_t>(l, 0)}; }
  int size() const { return static_cast<int>(flags.size()); }
  bool on(int l) const { return flags[l] != 0; }
  int active_count() const;
  bool operator==(const SwitchVector&) const = default;
};

/// Optimization variables: beamformers w_k, phase vectors u_l, switch x.
struct DesignState {
  std::vector<CVec> beamformers;  // K x N_t
  std::vector<CVec> phases;       // L x N_r, entries e^{j theta}
  SwitchVector switches;
};

/// Power accounting for the energy-efficiency metric.
struct PowerModel {
  double p_rf_watts = 0.25;
  double p_irs_watts = 0.01;
  int n_rf = 8;
};

}  // namespace irsopt
