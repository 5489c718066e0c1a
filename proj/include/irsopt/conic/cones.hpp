#pragma once

// Euclidean projections onto the cones understood by the conic engine.
// Everything here is header-only and works on any real Eigen expression.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "irsopt/errors.hpp"

namespace irsopt::conic {

/// Length of the scaled upper-triangle packing of an order-n symmetric matrix.
constexpr Eigen::Index packed_size(Eigen::Index order) { return order * (order + 1) / 2; }

/// Matrix order from a packed length; -1 when the length is not triangular.
inline Eigen::Index packed_order(Eigen::Index len) {
  auto n = static_cast<Eigen::Index>(std::floor((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5));
  return packed_size(n) == len ? n : -1;
}

/// Packs the upper triangle column by column with off-diagonals scaled by
/// sqrt(2), so that <svec(X), svec(Y)> = Tr(XY).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> svec(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  const Scalar r2 = std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(packed_size(n));
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) out(idx++) = r2 * m(i, j);
    out(idx++) = m(j, j);
  }
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smat(
    const Eigen::MatrixBase<Derived>& v, Eigen::Index n) {
  using Scalar = typename Derived::Scalar;
  const Scalar inv_r2 = Scalar(1) / std::sqrt(Scalar(2));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      m(i, j) = m(j, i) = inv_r2 * v(idx++);
    }
    m(j, j) = v(idx++);
  }
  return m;
}

/// Position of entry (i, j), i <= j, inside the svec packing.
constexpr Eigen::Index packed_index(Eigen::Index i, Eigen::Index j) { return j * (j + 1) / 2 + i; }

/// Real symmetric image [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
/// H is PSD exactly when the image is, and the trace doubles.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar::value_type, Eigen::Dynamic, Eigen::Dynamic> hermitian_embed(
    const Eigen::MatrixBase<Derived>& h) {
  using Real = typename Derived::Scalar::value_type;
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw DimensionError("hermitian_embed: matrix is not square");
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.bottomRightCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  return out;
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clamped to 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_psd(
    const Eigen::MatrixBase<Derived>& sym) {
  using Scalar = typename Derived::Scalar;
  using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (sym.rows() != sym.cols()) throw DimensionError("project_psd: matrix is not square");
  if (sym.rows() == 0) return MatrixT(0, 0);
  MatrixT s = (sym + sym.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixT> eig(s);
  const auto& lam = eig.eigenvalues();
  if (lam(0) >= Scalar(0)) return s;
  if (lam(lam.size() - 1) <= Scalar(0)) return MatrixT::Zero(s.rows(), s.cols());
  const auto& vecs = eig.eigenvectors();
  return vecs * lam.cwiseMax(Scalar(0)).asDiagonal() * vecs.transpose();
}

/// In-place projection of an svec-packed block of order n.
inline void project_psd_packed(Eigen::Ref<Eigen::VectorXd> v, Eigen::Index n) {
  v = svec(project_psd(smat(v, n)));
}

/// Second-order cone {(t, z) : ||z|| <= t}, closed-form projection.
inline void project_soc_inplace(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  const double t = v(0);
  const double nz = v.tail(v.size() - 1).norm();
  if (nz <= t) return;
  if (nz <= -t) {
    v.setZero();
    return;
  }
  const double a = 0.5 * (t + nz);
  v(0) = a;
  v.tail(v.size() - 1) *= a / nz;
}

template <typename Derived>
Eigen::VectorXd project_soc(const Eigen::MatrixBase<Derived>& v) {
  Eigen::VectorXd out = v;
  project_soc_inplace(out);
  return out;
}

namespace detail {

// Root t > max(0, -t0) of
//   t (t + t0) / rho^2 - s0 / rho + log(t / rho) + 1 = 0,
// returned as x2 = t + t0; returns 0 when the root falls outside the domain.
inline double exp_boundary_x2(double rho, double s0, double t0) {
  auto f = [&](double t) { return t * (t + t0) / (rho * rho) - s0 / rho + std::log(t / rho) + 1.0; };
  double lo = std::max(0.0, -t0);
  if (lo > 0.0 && f(lo) >= 0.0) return 0.0;
  double hi = std::max(1.0, 2.0 * lo);
  while (f(hi) < 0.0) hi *= 2.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (ft > 0.0) hi = t; else lo = t;
    const double fp = (2.0 * t + t0) / (rho * rho) + 1.0 / t;
    double next = t - ft / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t)) || hi - lo <= 1e-16 * hi) {
      t = next;
      break;
    }
    t = next;
  }
  return t + t0;
}

inline Eigen::Vector3d exp_point_for_rho(const Eigen::Vector3d& v, double rho) {
  Eigen::Vector3d x;
  x(2) = exp_boundary_x2(rho, v(1), v(2));
  x(1) = (x(2) - v(2)) * x(2) / rho;
  x(0) = v(0) - rho;
  return x;
}

inline double exp_dual_gradient(const Eigen::Vector3d& x) {
  if (x(1) <= 1e-300 || x(2) <= 1e-300) return x(0);
  return x(0) + x(1) * std::log(x(1) / x(2));
}

}  // namespace detail

/// Membership in the closure of {(x, y, z) : y > 0, y e^{x/y} <= z}.
inline bool in_exp_cone(const Eigen::Vector3d& v, double tol = 0.0) {
  const double r = v(0), s = v(1), t = v(2);
  if (s > 0.0) return s * std::exp(r / s) - t <= tol * std::max(1.0, std::abs(t));
  return s >= -tol && r <= tol && t >= -tol;
}

/// Membership in the dual exponential cone
/// cl{(u, v, w) : u < 0, -u e^{v/u} <= e w}.
inline bool in_exp_dual_cone(const Eigen::Vector3d& v, double tol = 0.0) {
  const double u = v(0), s = v(1), w = v(2);
  if (u < 0.0) return -u * std::exp(s / u) - std::exp(1.0) * w <= tol * std::max(1.0, std::abs(w));
  return u <= tol && s >= -tol && w >= -tol;
}

namespace detail {

// Projection of v onto the ray {y (r, 1, e^r) : y >= 0}.
inline Eigen::Vector3d exp_ray_projection(const Eigen::Vector3d& v, double r) {
  const Eigen::Vector3d dir(r, 1.0, std::exp(r));
  return std::max(0.0, v.dot(dir) / dir.squaredNorm()) * dir;
}

// Stationarity of  <v, d(r)> / ||d(r)||  in the ray ratio r, up to a positive
// factor, with d(r) = (r, 1, e^r). Positive left of the best ray.
inline double exp_ray_stationarity(const Eigen::Vector3d& v, double r, double* deriv) {
  const double er = std::exp(r), e2r = er * er;
  const double a = v(0) + er * v(2);
  const double b = r * r + 1.0 + e2r;
  const double c = r * v(0) + v(1) + er * v(2);
  const double d = r + e2r;
  if (deriv) *deriv = er * v(2) * b + a * d - c * (1.0 + 2.0 * e2r);
  return a * b - c * d;
}

// Polishes a boundary point x (x(1) > 0) by a safeguarded Newton solve on
// the ray ratio. Returns x unchanged if no better point is found.
inline Eigen::Vector3d exp_refine(const Eigen::Vector3d& v, const Eigen::Vector3d& x) {
  if (!(x(1) > 0.0)) return x;
  const double r0 = std::clamp(x(0) / x(1), -300.0, 300.0);
  double lo = r0, hi = r0, step = 1e-8 * std::max(1.0, std::abs(r0));
  int guard = 0;
  while (exp_ray_stationarity(v, lo, nullptr) <= 0.0 && guard++ < 80) {
    lo -= step;
    step *= 2.0;
  }
  step = 1e-8 * std::max(1.0, std::abs(r0));
  guard = 0;
  while (exp_ray_stationarity(v, hi, nullptr) >= 0.0 && guard++ < 80) {
    hi += step;
    step *= 2.0;
  }
  if (!(exp_ray_stationarity(v, lo, nullptr) > 0.0 && exp_ray_stationarity(v, hi, nullptr) < 0.0)) return x;
  double r = std::clamp(r0, lo, hi);
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(r)); ++it) {
    double dh = 0.0;
    const double h = exp_ray_stationarity(v, r, &dh);
    if (h > 0.0) lo = r; else if (h < 0.0) hi = r; else break;
    double next = dh != 0.0 ? r - h / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }
  const Eigen::Vector3d cand = exp_ray_projection(v, r);
  return (cand - v).squaredNorm() <= (x - v).squaredNorm() ? cand : x;
}

// Best boundary ray found by bracketing the stationarity sign change from r0
// outwards and a safeguarded Newton solve inside the bracket. Returns false
// when no bracket exists within |r| <= 200.
inline bool exp_ray_search(const Eigen::Vector3d& v, double r0, Eigen::Vector3d& out) {
  constexpr double kLimit = 200.0;
  double lo = r0, hi = r0;
  double step = 0.5;
  if (exp_ray_stationarity(v, r0, nullptr) > 0.0) {
    do {
      lo = hi;
      hi = std::min(hi + step, kLimit);
      step *= 2.0;
      if (exp_ray_stationarity(v, hi, nullptr) < 0.0) break;
      if (hi >= kLimit) return false;
    } while (true);
  } else {
    do {
      hi = lo;
      lo = std::max(lo - step, -kLimit);
      step *= 2.0;
      if (exp_ray_stationarity(v, lo, nullptr) > 0.0) break;
      if (lo <= -kLimit) return false;
    } while (true);
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(r)); ++it) {
    double dh = 0.0;
    const double h = exp_ray_stationarity(v, r, &dh);
    if (h > 0.0) lo = r; else if (h < 0.0) hi = r; else break;
    double next = dh != 0.0 ? r - h / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }
  out = exp_ray_projection(v, r);
  return out(1) > 0.0;
}

}  // namespace detail

/// Projection onto the closed exponential cone. The nearest point lies on a
/// boundary ray y (r, 1, e^r) or on the flat face {x <= 0, y = 0, z >= 0};
/// the ray ratio r comes from a one-dimensional root find. A bisection on
/// the multiplier of the boundary constraint covers the rare inputs where
/// the ray search finds no bracket.
inline Eigen::Vector3d project_exp(const Eigen::Vector3d& v) {
  const double r = v(0), s = v(1), t = v(2);
  if (in_exp_cone(v)) return v;
  // polar cone -K* maps to the origin
  if (in_exp_dual_cone(-v)) return Eigen::Vector3d::Zero();
  if (r <= 0.0 && s <= 0.0) return {r, 0.0, std::max(t, 0.0)};

  const Eigen::Vector3d face(std::min(r, 0.0), 0.0, std::max(t, 0.0));
  Eigen::Vector3d ray;
  const double r0 = s > 0.0 ? std::clamp(r / s, -50.0, 50.0) : (t > 0.0 ? std::clamp(std::log(t), -50.0, 50.0) : 0.0);
  if (detail::exp_ray_search(v, r0, ray)) {
    ray(2) = std::max(ray(2), ray(1) * std::exp(ray(0) / ray(1)));
    return (face - v).squaredNorm() < (ray - v).squaredNorm() ? face : ray;
  }

  double lb = 0.0, ub = 0.125;
  Eigen::Vector3d x = detail::exp_point_for_rho(v, ub);
  while (detail::exp_dual_gradient(x) > 0.0) {
    lb = ub;
    ub *= 2.0;
    x = detail::exp_point_for_rho(v, ub);
  }
  for (int it = 0; it < 400 && ub - lb > 1e-15 * std::max(1.0, ub); ++it) {
    const double rho = 0.5 * (lb + ub);
    x = detail::exp_point_for_rho(v, rho);
    if (detail::exp_dual_gradient(x) > 0.0) lb = rho; else ub = rho;
  }
  x = detail::exp_point_for_rho(v, 0.5 * (lb + ub));
  if (x(1) > 0.0) {
    x(2) = std::max(x(2), x(1) * std::exp(x(0) / x(1)));
    x = detail::exp_refine(v, x);
    // land exactly on the boundary
    if (x(1) > 0.0) x(2) = std::max(x(2), x(1) * std::exp(x(0) / x(1)));
  } else {
    x(1) = 0.0;
    x(0) = std::min(x(0), 0.0);
    x(2) = std::max(x(2), 0.0);
  }
  return (face - v).squaredNorm() < (x - v).squaredNorm() ? face : x;
}

/// Dual cone projection via Moreau: P_{K*}(v) = v + P_K(-v).
inline Eigen::Vector3d project_exp_dual(const Eigen::Vector3d& v) {
  return v + project_exp(-v);
}

}  // namespace irsopt::conic
