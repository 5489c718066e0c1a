#include "irsopt/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace irsopt {

std::vector<double> Scenario::gammas() const {
  std::vector<double> out(num_users());
  for (int k = 0; k < num_users(); ++k) out[k] = gamma(k);
  return out;
}

void Scenario::validate() const {
  if (n_t < 1 || n_r < 1 || n_paths_irs_user < 1) throw DimensionError("scenario: antenna/element/path counts must be >= 1");
  if (irs_positions.empty()) throw DimensionError("scenario: at least one IRS is required");
  if (user_positions.empty()) throw DimensionError("scenario: at least one user is required");
  if (!std::isfinite(power_budget_dbm)) throw DomainError("scenario: power budget must be finite");
  if (!std::isfinite(noise_power_dbm)) throw DomainError("scenario: noise power must be finite");
  if (!(gamma_bits >= 0.0)) throw DomainError("scenario: rate threshold must be >= 0");
  if (!gamma_per_user.empty()) {
    if (static_cast<int>(gamma_per_user.size()) != num_users()) {
      throw DimensionError("scenario: per-user thresholds must match the user count");
    }
    for (double g : gamma_per_user) {
      if (!(g >= 0.0)) throw DomainError("scenario: rate threshold must be >= 0");
    }
  }
  std::vector<Point3> all{bs_position};
  all.insert(all.end(), irs_positions.begin(), irs_positions.end());
  all.insert(all.end(), user_positions.begin(), user_positions.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if ((all[i] - all[j]).norm() == 0.0) throw DomainError("scenario: node positions must be distinct");
    }
  }
}

int SwitchVector::active_count() const {
  int n = 0;
  for (auto f : flags) n += f != 0;
  return n;
}

CVec array_response(int n, double spatial_freq, bool array_gain) {
  CVec v = steering_vector(n, spatial_freq);
  if (array_gain) v *= std::sqrt(static_cast<double>(n));
  return v;
}

double spatial_frequency(const Point3& axis, const Point3& from, const Point3& to) {
  const Point3 dir = to - from;
  const double len = dir.norm();
  if (len == 0.0) return 0.0;
  return std::clamp(axis.dot(dir) / len, -1.0, 1.0);
}

double pathloss_db(double distance, double exponent, double beta0_db) {
  if (!(distance > 0.0)) throw DomainError("pathloss_db: distance must be positive");
  return beta0_db + 10.0 * exponent * std::log10(std::max(distance, 1.0));
}

cplx complex_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

namespace {

void check_irs(const Scenario& s, int l) {
  if (l < 0 || l >= s.num_irs()) throw DimensionError("IRS index out of range");
}

void check_user(const Scenario& s, int k) {
  if (k < 0 || k >= s.num_users()) throw DimensionError("user index out of range");
}

}  // namespace

CMat bs_irs_channel(const Scenario& scenario, int irs_index, cplx alpha) {
  check_irs(scenario, irs_index);
  const Point3& irs = scenario.irs_positions[irs_index];
  const double d = (irs - scenario.bs_position).norm();
  const double beta = db_to_linear(pathloss_db(d, scenario.c_los, scenario.beta0_db));
  const CVec a = array_response(scenario.n_r, spatial_frequency(kIrsArrayAxis, irs, scenario.bs_position),
                                scenario.array_gain);
  const CVec b = array_response(scenario.n_t, spatial_frequency(kBsArrayAxis, scenario.bs_position, irs),
                                scenario.array_gain);
  return (alpha / std::sqrt(beta)) * a * b.adjoint();
}

CVec irs_user_channel(const Scenario& scenario, int user_index, int irs_index, std::span<const cplx> gains,
                      std::span<const double> spatial_freqs) {
  check_user(scenario, user_index);
  check_irs(scenario, irs_index);
  if (gains.empty() || gains.size() != spatial_freqs.size()) {
    throw DimensionError("irs_user_channel: need one gain and one spatial frequency per path");
  }
  const double d = (scenario.user_positions[user_index] - scenario.irs_positions[irs_index]).norm();
  const double beta = db_to_linear(pathloss_db(d, scenario.c_nlos, scenario.beta0_db));
  const double paths = static_cast<double>(gains.size());
  CVec h = CVec::Zero(scenario.n_r);
  for (std::size_t p = 0; p < gains.size(); ++p) {
    h += gains[p] * array_response(scenario.n_r, spatial_freqs[p], scenario.array_gain);
  }
  return h / std::sqrt(beta * paths);
}

CMat sample_bs_irs_channel(const Scenario& scenario, int irs_index, Rng& rng) {
  check_irs(scenario, irs_index);
  return bs_irs_channel(scenario, irs_index, complex_normal(rng));
}

CVec sample_irs_user_channel(const Scenario& scenario, int user_index, int irs_index, Rng& rng) {
  const int paths = scenario.n_paths_irs_user;
  if (paths < 1) throw DimensionError("irs_user_channel: path count must be >= 1");
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::vector<cplx> gains(paths);
  std::vector<double> freqs(paths);
  for (int p = 0; p < paths; ++p) {
    gains[p] = complex_normal(rng);
    freqs[p] = std::sin(angle(rng));
  }
  return irs_user_channel(scenario, user_index, irs_index, gains, freqs);
}

ChannelSet sample_channels(const Scenario& scenario) {
  Rng rng(scenario.seed);
  return sample_channels(scenario, rng);
}

ChannelSet sample_channels(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  ChannelSet out;
  for (int l = 0; l < scenario.num_irs(); ++l) out.g.push_back(sample_bs_irs_channel(scenario, l, rng));
  out.h.resize(scenario.num_users());
  for (int k = 0; k < scenario.num_users(); ++k) {
    for (int l = 0; l < scenario.num_irs(); ++l) out.h[k].push_back(sample_irs_user_channel(scenario, k, l, rng));
  }
  out.noise = Vec::Constant(scenario.num_users(), scenario.noise_power_watts());
  return out;
}

void check_dimensions(const ChannelSet& channels, const std::vector<CVec>& phases, const SwitchVector& switches) {
  const int l_irs = channels.num_irs();
  if (static_cast<int>(phases.size()) != l_irs || switches.size() != l_irs) {
    throw DimensionError("phase/switch count does not match the IRS count");
  }
  for (int l = 0; l < l_irs; ++l) {
    if (phases[l].size() != channels.g[l].rows()) throw DimensionError("phase vector length does not match N_r");
  }
  for (const auto& hk : channels.h) {
    if (static_cast<int>(hk.size()) != l_irs) throw DimensionError("h has the wrong IRS count");
    for (int l = 0; l < l_irs; ++l) {
      if (hk[l].size() != channels.g[l].rows()) throw DimensionError("h_kl length does not match N_r");
    }
  }
}

CVec effective_channel(const ChannelSet& channels, const std::vector<CVec>& phases, const SwitchVector& switches,
                       int user_index) {
  check_dimensions(channels, phases, switches);
  if (user_index < 0 || user_index >= channels.num_users()) throw DimensionError("user index out of range");
  CVec a = CVec::Zero(channels.n_t());
  for (int l = 0; l < channels.num_irs(); ++l) {
    if (!switches.on(l)) continue;
    // (h^H Theta G)^H = G^H Theta^H h
    const CVec reflected = phases[l].conjugate().cwiseProduct(channels.h[user_index][l]);
    a.noalias() += channels.g[l].adjoint() * reflected;
  }
  return a;
}

std::vector<CVec> effective_channels(const ChannelSet& channels, const std::vector<CVec>& phases,
                                     const SwitchVector& switches) {
  std::vector<CVec> out;
  out.reserve(channels.num_users());
  for (int k = 0; k < channels.num_users(); ++k) out.push_back(effective_channel(channels, phases, switches, k));
  return out;
}

}  // namespace irsopt
