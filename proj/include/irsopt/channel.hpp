#pragma once

// Geometric mmWave channels for the BS -> IRS -> user cascade.
//
// Arrays are half-wavelength ULAs. The BS array lies along the z axis and
// every IRS array along the y axis; line-of-sight angles follow from the
// scenario geometry and the scattered IRS -> user paths draw their angles
// uniformly on [-pi/2, pi/2].

#include <random>
#include <span>

#include "irsopt/errors.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

using Rng = std::mt19937_64;

inline const Point3 kBsArrayAxis{0.0, 0.0, 1.0};
inline const Point3 kIrsArrayAxis{0.0, 1.0, 0.0};

/// exp(j pi m f) / sqrt(n), m = 0..n-1. Unit Euclidean norm.
template <typename Real = double>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> steering_vector(Eigen::Index n, Real spatial_freq) {
  if (n < 1) throw DimensionError("steering_vector: element count must be >= 1");
  const Real pi = Real(3.14159265358979323846264338327950288L);
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(n));
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> v(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    v(m) = std::polar(scale, pi * static_cast<Real>(m) * spatial_freq);
  }
  return v;
}

/// Array response used inside the channel model: the steering vector,
/// scaled to unit-modulus entries when the scenario enables array gain.
CVec array_response(int n, double spatial_freq, bool array_gain);

/// Cosine between an array axis and the direction from -> to.
double spatial_frequency(const Point3& axis, const Point3& from, const Point3& to);

/// beta_0 + 10 c log10(d) in dB; distances below 1 m are clamped to 1 m.
double pathloss_db(double distance, double exponent, double beta0_db);

/// CN(0, 1) draw.
cplx complex_normal(Rng& rng);

/// G_l = sqrt(1 / beta_l) alpha a b^H for a given small-scale gain.
CMat bs_irs_channel(const Scenario& scenario, int irs_index, cplx alpha);

/// h_kl = sqrt(1 / (beta_kl L_kl)) sum_p alpha_p a(f_p) for given gains and
/// spatial frequencies (both of length L_kl).
CVec irs_user_channel(const Scenario& scenario, int user_index, int irs_index, std::span<const cplx> gains,
                      std::span<const double> spatial_freqs);

CMat sample_bs_irs_channel(const Scenario& scenario, int irs_index, Rng& rng);
CVec sample_irs_user_channel(const Scenario& scenario, int user_index, int irs_index, Rng& rng);

/// Full realization: all G_l first, then h_kl user-major. Seeded from
/// scenario.seed.
ChannelSet sample_channels(const Scenario& scenario);
ChannelSet sample_channels(const Scenario& scenario, Rng& rng);

/// a_k with a_k^H = sum_l x_l h_kl^H Theta_l G_l.
CVec effective_channel(const ChannelSet& channels, const std::vector<CVec>& phases, const SwitchVector& switches,
                       int user_index);

/// a_k for every user.
std::vector<CVec> effective_channels(const ChannelSet& channels, const std::vector<CVec>& phases,
                                     const SwitchVector& switches);

/// Checks phases / switch vector shapes against the channel set.
void check_dimensions(const ChannelSet& channels, const std::vector<CVec>& phases, const SwitchVector& switches);

}  // namespace irsopt
