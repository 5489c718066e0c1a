#include "irsopt/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "irsopt/conic/cones.hpp"
#include "irsopt/errors.hpp"
#include "irsopt/metrics.hpp"

namespace irsopt {

namespace {

constexpr int kRetryIterations = 2000;

using conic::Affine;
using conic::Index;

constexpr double kLog2e = 1.4426950408889634;
constexpr double kRateMargin = 2e-4;

// Variable layout of one Hermitian n x n block starting at `base`.
struct HermitianVars {
  Index base;
  Index n;

  Index diag(Index j) const { return base + j; }
  Index pair(Index j, Index l) const {  // j < l, row-major over the upper triangle
    return j * n - j * (j + 1) / 2 + (l - j - 1);
  }
  Index re(Index j, Index l) const { return base + n + pair(j, l); }
  Index im(Index j, Index l) const { return base + n + n * (n - 1) / 2 + pair(j, l); }

  Affine real_part(Index j, Index l) const {
    if (j == l) return Affine::var(diag(j));
    return j < l ? Affine::var(re(j, l)) : Affine::var(re(l, j));
  }
  Affine imag_part(Index j, Index l) const {
    if (j == l) return Affine{};
    return j < l ? Affine::var(im(j, l)) : Affine::var(im(l, j), -1.0);
  }

  // Tr(W A) for Hermitian A.
  Affine trace_with(const CMat& a) const {
    Affine e;
    for (Index j = 0; j < n; ++j) e.add(diag(j), a(j, j).real());
    for (Index j = 0; j < n; ++j) {
      for (Index l = j + 1; l < n; ++l) {
        e.add(re(j, l), 2.0 * a(l, j).real());
        e.add(im(j, l), -2.0 * a(l, j).imag());
      }
    }
    return e;
  }

  Affine trace() const {
    Affine e;
    for (Index j = 0; j < n; ++j) e.add(diag(j), 1.0);
    return e;
  }

  // svec rows of [[Re W, -Im W], [Im W, Re W]].
  std::vector<Affine> embedded_rows() const {
    const Index m = 2 * n;
    std::vector<Affine> rows(static_cast<std::size_t>(conic::packed_size(m)));
    const double r2 = std::sqrt(2.0);
    for (Index c = 0; c < m; ++c) {
      for (Index r = 0; r <= c; ++r) {
        Affine e;
        if (r < n && c < n) {
          e = real_part(r, c);
        } else if (r < n) {
          e.add(imag_part(r, c - n), -1.0);
        } else {
          e = real_part(r - n, c - n);
        }
        if (r != c) {
          for (auto& t : e.terms) t.second *= r2;
        }
        rows[static_cast<std::size_t>(conic::packed_index(r, c))] = e;
      }
    }
    return rows;
  }

  CMat unpack(const Vec& x) const {
    CMat w(n, n);
    for (Index j = 0; j < n; ++j) w(j, j) = x(diag(j));
    for (Index j = 0; j < n; ++j) {
      for (Index l = j + 1; l < n; ++l) {
        w(j, l) = cplx(x(re(j, l)), x(im(j, l)));
        w(l, j) = std::conj(w(j, l));
      }
    }
    return w;
  }
};

double trace_product(const CMat& w, const CMat& a) { return (w.cwiseProduct(a.transpose())).sum().real(); }

// sum_i log2(1 + Tr(W_i A_i) / (sum_{k!=i} Tr(W_k A_i) + sigma_i^2)) and the per-user terms.
double relaxed_rate(const std::vector<CMat>& w, const std::vector<CMat>& a, const Vec& sigma2, Vec* per_user = nullptr) {
  const int k_users = static_cast<int>(a.size());
  double total = 0.0;
  if (per_user) per_user->resize(k_users);
  for (int i = 0; i < k_users; ++i) {
    double signal = std::max(0.0, trace_product(w[i], a[i]));
    double interference = 0.0;
    for (int k = 0; k < k_users; ++k) {
      if (k != i) interference += std::max(0.0, trace_product(w[k], a[i]));
    }
    const double r = std::log2(1.0 + signal / (interference + sigma2(i)));
    if (per_user) (*per_user)(i) = r;
    total += r;
  }
  return total;
}

void check_psd(const CMat& m, const char* what, double rel_tol) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " is not square");
  if (m.size() == 0) return;
  const double scale = std::max(m.norm(), 1e-300);
  if ((m - m.adjoint()).norm() > 1e-9 * scale) throw DomainError(std::string(what) + " is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < -rel_tol * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300)) {
    throw DomainError(std::string(what) + " is not positive semidefinite");
  }
}

CMat clamp_psd(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (m + m.adjoint()));
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().adjoint();
}

bool meets(const Vec& rates, const std::vector<double>& gamma, double slack) {
  for (Index i = 0; i < rates.size(); ++i) {
    if (rates(i) < gamma[static_cast<std::size_t>(i)] - slack) return false;
  }
  return true;
}

Vec rate_vector(const std::vector<CVec>& a, const std::vector<CVec>& w, const Vec& noise) {
  const auto r = user_rates(a, w, noise);
  return Eigen::Map<const Vec>(r.data(), static_cast<Index>(r.size()));
}

}  // namespace

conic::ConicProblem build_p5(const std::vector<CMat>& a_mats, const Vec& q_bar, const Vec& sigma2,
                             const std::vector<double>& gamma_bits, double power) {
  const int k_users = static_cast<int>(a_mats.size());
  if (k_users == 0) throw DimensionError("build_p5: no users");
  const Index n = a_mats.front().rows();
  if (q_bar.size() != k_users || sigma2.size() != k_users || static_cast<int>(gamma_bits.size()) != k_users) {
    throw DimensionError("build_p5: per-user vectors must have one entry per user");
  }
  for (const auto& a : a_mats) {
    if (a.rows() != n || a.cols() != n) throw DimensionError("build_p5: channel matrices differ in size");
    check_psd(a, "build_p5: channel matrix", 1e-9);
  }
  if (!q_bar.allFinite()) throw DomainError("build_p5: linearization point is not finite");
  if (!(power > 0.0)) throw DomainError("build_p5: power budget must be positive");

  conic::ProblemBuilder pb;
  std::vector<HermitianVars> w;
  for (int k = 0; k < k_users; ++k) w.push_back({pb.add_variables("W" + std::to_string(k), n * n), n});
  const Index p0 = pb.add_variables("p", k_users);
  const Index q0 = pb.add_variables("q", k_users);
  for (int i = 0; i < k_users; ++i) {
    pb.add_cost(p0 + i, -kLog2e);
    pb.add_cost(q0 + i, kLog2e);
  }

  std::vector<Affine> rate_rows;
  for (int i = 0; i < k_users; ++i) {
    Affine e(-gamma_bits[static_cast<std::size_t>(i)]);
    e.add(p0 + i, kLog2e).add(q0 + i, -kLog2e);
    rate_rows.push_back(e);
  }
  pb.add_nonneg(rate_rows);

  // e^p <= T  <=>  (p - c, 1, T e^-c) in K_exp. c = ln of the largest value T
  // can take keeps the cone entries O(1) at high SNR.
  for (int i = 0; i < k_users; ++i) {
    const double c = std::log(sigma2(i) + power * a_mats[i].real().trace());
    const double scale = std::exp(-c);
    Affine total(sigma2(i) * scale);
    for (int k = 0; k < k_users; ++k) total.add(w[k].trace_with(a_mats[i]), scale);
    Affine shifted(-c);
    shifted.add(p0 + i, 1.0);
    pb.add_exp(shifted, Affine(1.0), total);
  }

  std::vector<Affine> lin_rows;
  for (int i = 0; i < k_users; ++i) {
    const double eq = std::exp(q_bar(i));
    Affine e(eq * (1.0 - q_bar(i)) - sigma2(i));
    e.add(q0 + i, eq);
    for (int k = 0; k < k_users; ++k) {
      if (k != i) e.add(w[k].trace_with(a_mats[i]), -1.0);
    }
    lin_rows.push_back(e);
  }
  pb.add_nonneg(lin_rows);

  Affine budget(power);
  for (const auto& wk : w) budget.add(wk.trace(), -1.0);
  pb.add_nonneg(budget);

  for (const auto& wk : w) pb.add_psd(wk.embedded_rows(), 2 * n);

  std::vector<Affine> gain_rows;
  for (int k = 0; k < k_users; ++k) {
    for (int i = 0; i < k_users; ++i) gain_rows.push_back(w[k].trace_with(a_mats[i]));
  }
  pb.add_nonneg(gain_rows);

  return pb.build();
}

std::vector<CMat> unpack_covariances(const conic::ConicProblem& problem, const Vec& x, int n_users, int order) {
  std::vector<CMat> out;
  for (int k = 0; k < n_users; ++k) {
    const auto it = problem.variable_map.find("W" + std::to_string(k));
    if (it == problem.variable_map.end()) throw DimensionError("unpack_covariances: missing covariance block");
    out.push_back(HermitianVars{it->second.first, order}.unpack(x));
  }
  return out;
}

Vec update_q_bar(const std::vector<CMat>& covariances, const std::vector<CMat>& a_mats, const Vec& sigma2) {
  const int k_users = static_cast<int>(a_mats.size());
  if (static_cast<int>(covariances.size()) != k_users || sigma2.size() != k_users) {
    throw DimensionError("update_q_bar: user count mismatch");
  }
  Vec q(k_users);
  for (int i = 0; i < k_users; ++i) {
    double s = sigma2(i);
    for (int k = 0; k < k_users; ++k) {
      if (k != i) s += trace_product(covariances[k], a_mats[i]);
    }
    q(i) = std::log(s);
  }
  return q;
}

CVec extract_rank_one(const CMat& w, int user_index, const std::vector<CVec>& effective,
                      const std::vector<CVec>& current, const Vec& noise, Rng& rng, int trials,
                      const std::vector<double>& gamma_bits) {
  if (w.rows() != w.cols()) throw DimensionError("extract_rank_one: matrix is not square");
  const Index n = w.rows();
  if (w.norm() == 0.0) return CVec::Zero(n);
  check_psd(w, "extract_rank_one: covariance", 1e-6);

  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (w + w.adjoint()));
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  const CMat& u = eig.eigenvectors();
  const double l1 = lam(n - 1);
  const CVec principal = std::sqrt(l1) * u.col(n - 1);
  if (n == 1 || lam(n - 2) <= 1e-6 * l1) return principal;

  const double target = lam.sum();
  const CMat shape = u * lam.cwiseSqrt().asDiagonal();
  std::vector<CVec> trial_set = current;
  auto score = [&](const CVec& cand) {
    trial_set[static_cast<std::size_t>(user_index)] = cand;
    const Vec r = rate_vector(effective, trial_set, noise);
    // Infeasible candidates sit below every feasible one.
    const bool ok = gamma_bits.empty() || meets(r, gamma_bits, 0.0);
    return r.sum() - (ok ? 0.0 : 1e6);
  };

  CVec best = principal * std::sqrt(target / l1);
  double best_score = score(best);
  for (int t = 0; t < trials; ++t) {
    CVec z(n);
    for (Index i = 0; i < n; ++i) z(i) = complex_normal(rng);
    CVec cand = shape * z;
    const double nrm = cand.norm();
    if (nrm == 0.0) continue;
    cand *= std::sqrt(target) / nrm;
    const double s = score(cand);
    if (s > best_score) {
      best_score = s;
      best = cand;
    }
  }
  return best;
}

std::vector<CVec> initial_beamformers(const std::vector<CVec>& effective, const Vec& noise, double power,
                                      const std::vector<double>& gamma_bits) {
  const int k_users = static_cast<int>(effective.size());
  if (k_users == 0) throw DimensionError("initial_beamformers: no users");
  const Index n = effective.front().size();
  const double share = std::sqrt(power / k_users);

  std::vector<CVec> mrt;
  for (const auto& a : effective) {
    const double nrm = a.norm();
    mrt.push_back(nrm > 0.0 ? CVec(share * a / nrm) : CVec::Zero(n));
  }
  if (meets(rate_vector(effective, mrt, noise), gamma_bits, 0.0)) return mrt;

  // Regularized and plain zero-forcing on the noise-normalized channels.
  CMat h(n, k_users);
  for (int k = 0; k < k_users; ++k) h.col(k) = effective[k] * std::sqrt(power / noise(k));
  const CMat gram = h.adjoint() * h;
  for (double reg : {static_cast<double>(k_users), 1e-3, 0.0}) {
    const CMat sys = gram + reg * CMat::Identity(k_users, k_users);
    Eigen::FullPivLU<CMat> lu(sys);
    if (!lu.isInvertible()) continue;
    const CMat dirs = h * lu.inverse();
    std::vector<CVec> w;
    for (int k = 0; k < k_users; ++k) {
      const double nrm = dirs.col(k).norm();
      w.push_back(nrm > 0.0 ? CVec(share * dirs.col(k) / nrm) : CVec::Zero(n));
    }
    if (meets(rate_vector(effective, w, noise), gamma_bits, 0.0)) return w;
  }
  throw InfeasibleError("initial_beamformers: no starting point meets the rate thresholds");
}

ScaBeamState sca_beamforming(const ChannelSet& channels, const std::vector<CVec>& phases,
                             const SwitchVector& switches, const std::vector<CVec>& init, double power,
                             const std::vector<double>& gamma_bits, const BeamformingOptions& options) {
  return sca_beamforming(effective_channels(channels, phases, switches), channels.noise, init, power, gamma_bits,
                         options);
}

ScaBeamState sca_beamforming(const std::vector<CVec>& effective, const Vec& noise, const std::vector<CVec>& init,
                             double power, const std::vector<double>& gamma_bits, const BeamformingOptions& options) {
  const int k_users = static_cast<int>(effective.size());
  if (k_users == 0) throw DimensionError("sca_beamforming: no users");
  if (static_cast<int>(init.size()) != k_users || noise.size() != k_users ||
      static_cast<int>(gamma_bits.size()) != k_users) {
    throw DimensionError("sca_beamforming: per-user inputs differ in length");
  }
  const Index n_t = effective.front().size();
  for (int k = 0; k < k_users; ++k) {
    if (effective[k].size() != n_t || init[k].size() != n_t) {
      throw DimensionError("sca_beamforming: vector length differs from N_t");
    }
  }
  if (!(power > 0.0)) throw DomainError("sca_beamforming: power budget must be positive");
  if (transmit_power(init) > power * (1.0 + 1e-6)) throw InfeasibleError("sca_beamforming: init exceeds power");

  const Vec init_rates = rate_vector(effective, init, noise);
  if (!meets(init_rates, gamma_bits, kRateTolerance)) {
    throw InfeasibleError("sca_beamforming: init violates a rate threshold");
  }

  // Unit noise, unit budget: a~_k = a_k sqrt(P) / sigma_k, w~ = w / sqrt(P).
  std::vector<CVec> a_n;
  for (int k = 0; k < k_users; ++k) a_n.push_back(effective[k] * std::sqrt(power / noise(k)));
  const double wscale = 1.0 / std::sqrt(power);

  CMat basis;
  if (options.reduce_subspace) {
    CMat stack(n_t, k_users);
    for (int k = 0; k < k_users; ++k) stack.col(k) = a_n[k];
    Eigen::JacobiSVD<CMat> svd(stack, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * std::max(sv(0), 1e-300)) ++rank;
    if (sv.size() == 0 || sv(0) == 0.0) rank = 0;
    basis = svd.matrixU().leftCols(rank);
  } else {
    basis = CMat::Identity(n_t, n_t);
  }
  const Index r = basis.cols();

  ScaBeamState st;
  st.beamformers = init;
  const Vec ones = Vec::Ones(k_users);
  std::vector<CVec> a_r;
  std::vector<CMat> a_mats;
  for (const auto& a : a_n) {
    a_r.push_back(basis.adjoint() * a);
    a_mats.push_back(a_r.back() * a_r.back().adjoint());
  }
  std::vector<CMat> w;
  for (const auto& wk : init) {
    const CVec v = basis.adjoint() * (wk * wscale);
    w.push_back(v * v.adjoint());
  }
  auto lift = [&](const std::vector<CMat>& wr) {
    std::vector<CMat> out;
    for (const auto& m : wr) out.push_back(power * basis * m * basis.adjoint());
    return out;
  };

  Vec rates;
  st.objective_trace.push_back(relaxed_rate(w, a_mats, ones, &rates));
  st.q_bar = update_q_bar(w, a_mats, ones);
  st.q = st.q_bar;
  st.p = st.q_bar + rates / kLog2e;
  if (r == 0) {
    st.covariances = lift(w);
    return st;
  }

  std::optional<conic::WarmStart> warm;
  for (st.iteration = 0; st.iteration < options.max_outer;) {
    // Positive thresholds get a small margin so that an inexact step still
    // meets them; a start that only just meets one keeps the step feasible.
    std::vector<double> g(gamma_bits);
    for (int i = 0; i < k_users; ++i) {
      if (g[i] > 0.0) g[i] = std::min(g[i] + kRateMargin, rates(i));
    }
    const Vec q_bar = update_q_bar(w, a_mats, ones);
    const conic::ConicProblem prob = build_p5(a_mats, q_bar, ones, g, 1.0);
    const double prev = st.objective_trace.back();
    conic::ConicSolution sol;
    std::vector<CMat> next;
    Vec next_rates;
    double value = 0.0;
    bool accepted = false;
    // An inexact step can lose rate or miss a threshold by solver noise;
    // retry once at a tighter tolerance before keeping the incumbent.
    for (const double shrink : {1.0, 1e-2}) {
      conic::SolverOptions so = options.solver;
      so.tol *= shrink;
      // The retry only polishes a near-stationary step; cap its cost.
      if (shrink < 1.0) so.max_iter = std::min(so.max_iter, kRetryIterations);
      sol = conic::solve(prob, so, warm);
      st.solver_iterations += sol.iterations;
      if (sol.status == conic::SolveStatus::Infeasible || sol.status == conic::SolveStatus::Unbounded) {
        throw SolverError(std::string("sca_beamforming: step problem reported ") + conic::to_string(sol.status));
      }
      // An unconverged iterate is still a candidate: the exact acceptance
      // test below decides.
      if (!sol.x.allFinite()) throw SolverError("sca_beamforming: conic solver diverged");
      warm = conic::WarmStart{sol.x, sol.y, sol.s};

      next = unpack_covariances(prob, sol.x, k_users, static_cast<int>(r));
      double total = 0.0;
      for (auto& m : next) {
        m = clamp_psd(m);
        total += m.trace().real();
      }
      if (total > 1.0) {
        for (auto& m : next) m /= total;
      }
      value = relaxed_rate(next, a_mats, ones, &next_rates);
      if (value >= prev && meets(next_rates, gamma_bits, kRateTolerance)) {
        accepted = true;
        break;
      }
    }
    ++st.iteration;
    if (!accepted) break;
    w = std::move(next);
    rates = next_rates;
    st.q_bar = q_bar;
    st.p = sol.x.segment(prob.variable_map.at("p").first, k_users);
    st.q = sol.x.segment(prob.variable_map.at("q").first, k_users);
    st.objective_trace.push_back(value);
    if (std::abs(value - prev) <= options.tol * std::max(1.0, std::abs(prev))) break;
  }
  st.covariances = lift(w);

  // Rank-one recovery in the reduced coordinates, users in order. The scaled
  // principal components compete as a second candidate set.
  Rng rng(options.seed);
  std::vector<CVec> principal;
  for (const auto& m : w) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(m);
    const Index last = m.rows() - 1;
    const double l1 = std::max(0.0, eig.eigenvalues()(last));
    const double tr = std::max(0.0, m.trace().real());
    principal.push_back(l1 > 0.0 ? CVec(std::sqrt(tr) * eig.eigenvectors().col(last)) : CVec::Zero(m.rows()));
  }
  std::vector<CVec> randomized = principal;
  for (int k = 0; k < k_users; ++k) {
    randomized[k] = extract_rank_one(w[k], k, a_r, randomized, ones, rng, options.randomization_trials, gamma_bits);
  }
  double best = init_rates.sum();
  for (const auto* set : {&randomized, &principal}) {
    std::vector<CVec> full;
    for (const auto& c : *set) full.push_back(basis * c / wscale);
    const Vec full_rates = rate_vector(effective, full, noise);
    if (meets(full_rates, gamma_bits, kRateTolerance) && full_rates.sum() > best &&
        transmit_power(full) <= power * (1.0 + 1e-9)) {
      best = full_rates.sum();
      st.beamformers = std::move(full);
    }
  }
  return st;
}

}  // namespace irsopt
