#include "irsopt/phase.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "irsopt/errors.hpp"
#include "irsopt/metrics.hpp"

namespace irsopt {

namespace {

constexpr int kRetryIterations = 2000;

using conic::Affine;
using conic::Index;

constexpr double kLog2e = 1.4426950408889634;
constexpr double kRateMargin = 2e-4;
// SINRs below this are treated as zero when linearizing.
constexpr double kTinySinr = 1e-10;

// Re and Im of v^H u as affine forms in the stacked (Re u, Im u) variables.
std::pair<Affine, Affine> inner_forms(const CVec& v, Index u0) {
  const Index m = v.size();
  Affine re, im;
  for (Index n = 0; n < m; ++n) {
    const double a = v(n).real(), b = v(n).imag();
    re.add(u0 + n, a).add(u0 + m + n, b);
    im.add(u0 + m + n, a).add(u0 + n, -b);
  }
  return {re, im};
}

struct Sinrs {
  Vec sinr;
  Vec beta;  // 1 + interference, noise-normalized
  std::vector<cplx> signal;
};

Sinrs evaluate(const InterferenceVectors& v, const CVec& u) {
  const int k_users = static_cast<int>(v.size());
  Sinrs out{Vec(k_users), Vec(k_users), std::vector<cplx>(static_cast<std::size_t>(k_users))};
  for (int k = 0; k < k_users; ++k) {
    double interference = 0.0;
    for (int i = 0; i < k_users; ++i) {
      if (i != k) interference += std::norm(v[k][i].dot(u));
    }
    out.signal[k] = v[k][k].dot(u);
    out.beta(k) = 1.0 + interference;
    out.sinr(k) = std::norm(out.signal[k]) / out.beta(k);
  }
  return out;
}

double rate_sum(const Vec& sinr) {
  double s = 0.0;
  for (Index k = 0; k < sinr.size(); ++k) s += std::log2(1.0 + sinr(k));
  return s;
}

bool meets(const Vec& sinr, const std::vector<double>& gamma, double slack) {
  for (Index k = 0; k < sinr.size(); ++k) {
    if (std::log2(1.0 + sinr(k)) < gamma[static_cast<std::size_t>(k)] - slack) return false;
  }
  return true;
}

double penalized(const Vec& sinr, const CVec& u, double mu) {
  return rate_sum(sinr) + mu * (u.cwiseAbs2().array() - 1.0).sum();
}

}  // namespace

InterferenceVectors interference_vectors(const ChannelSet& channels, const SwitchVector& switches,
                                         const std::vector<CVec>& beamformers) {
  const int n_irs = channels.num_irs(), k_users = channels.num_users(), n_r = channels.n_r();
  if (switches.size() != n_irs) throw DimensionError("interference_vectors: switch count differs from L");
  if (static_cast<int>(beamformers.size()) != k_users) {
    throw DimensionError("interference_vectors: one beamformer per user required");
  }
  for (const auto& w : beamformers) {
    if (w.size() != channels.n_t()) throw DimensionError("interference_vectors: beamformer length differs from N_t");
  }
  InterferenceVectors v(static_cast<std::size_t>(k_users));
  for (int k = 0; k < k_users; ++k) {
    for (int i = 0; i < k_users; ++i) {
      CVec stacked = CVec::Zero(static_cast<Index>(n_irs) * n_r);
      for (int l = 0; l < n_irs; ++l) {
        if (!switches.on(l)) continue;
        // conj(diag(h^H) G w) = h .* conj(G w)
        stacked.segment(static_cast<Index>(l) * n_r, n_r) =
            channels.h[k][l].cwiseProduct((channels.g[l] * beamformers[i]).conjugate());
      }
      v[k].push_back(std::move(stacked));
    }
  }
  return v;
}

conic::ConicProblem build_p9(const InterferenceVectors& v, const Vec& lambda_t, const CVec& u_t, double mu,
                             const std::vector<double>& gamma_bits) {
  const int k_users = static_cast<int>(v.size());
  const Index m = u_t.size();
  if (k_users == 0) throw DimensionError("build_p9: no users");
  if (lambda_t.size() != k_users || static_cast<int>(gamma_bits.size()) != k_users) {
    throw DimensionError("build_p9: per-user vectors must have one entry per user");
  }
  for (const auto& row : v) {
    if (static_cast<int>(row.size()) != k_users) throw DimensionError("build_p9: v must be K x K");
    for (const auto& vec : row) {
      if (vec.size() != m) throw DimensionError("build_p9: v length differs from the phase vector");
    }
  }
  if (!(mu > 0.0)) throw DomainError("build_p9: penalty weight must be positive");
  if (u_t.cwiseAbs().maxCoeff() > 1.0 + 1e-8) throw DomainError("build_p9: |u_t| exceeds 1");
  const Sinrs at = evaluate(v, u_t);
  for (int k = 0; k < k_users; ++k) {
    const double floor = std::exp2(gamma_bits[k]) - 1.0;
    if (lambda_t(k) < floor - 1e-9 * std::max(1.0, floor)) throw DomainError("build_p9: lambda_t below threshold");
    if (lambda_t(k) > at.sinr(k) * (1.0 + 1e-9) + 1e-12) {
      throw DomainError("build_p9: lambda_t exceeds the SINR at u_t");
    }
  }

  conic::ProblemBuilder pb;
  const Index u0 = pb.add_variables("u", 2 * m);
  const Index l0 = pb.add_variables("lambda", k_users);
  const Index t0 = pb.add_variables("t", k_users);
  const Index b0 = pb.add_variables("beta", k_users);
  for (int k = 0; k < k_users; ++k) pb.add_cost(t0 + k, -kLog2e);
  for (Index n = 0; n < m; ++n) {
    pb.add_cost(u0 + n, -mu * u_t(n).real());
    pb.add_cost(u0 + m + n, -mu * u_t(n).imag());
  }

  for (Index n = 0; n < m; ++n) pb.add_soc({Affine(1.0), Affine::var(u0 + n), Affine::var(u0 + m + n)});

  for (int k = 0; k < k_users; ++k) {
    Affine one_plus(1.0);
    one_plus.add(l0 + k, 1.0);
    pb.add_exp(Affine::var(t0 + k), Affine(1.0), one_plus);
    Affine floor(-(std::exp2(gamma_bits[k]) - 1.0));
    floor.add(l0 + k, 1.0);
    pb.add_nonneg(floor);

    // beta_k >= 1 + sum_{i != k} |v_ki^H u|^2:  ||(2z, beta - 2)|| <= beta
    std::vector<Affine> epi{Affine::var(b0 + k)};
    for (int i = 0; i < k_users; ++i) {
      if (i == k) continue;
      auto [re, im] = inner_forms(v[k][i], u0);
      epi.push_back(Affine().add(re, 2.0));
      epi.push_back(Affine().add(im, 2.0));
    }
    epi.push_back(Affine(-2.0).add(b0 + k, 1.0));
    pb.add_soc(epi);

    // First-order lower bound of |v_kk^H u|^2 around u_t.
    const cplx s = at.signal[k];
    auto [re, im] = inner_forms(v[k][k], u0);
    Affine lin(-std::norm(s));
    lin.add(re, 2.0 * s.real()).add(im, 2.0 * s.imag());

    if (lambda_t(k) <= kTinySinr || std::norm(s) == 0.0) {
      pb.add_nonneg(Affine().add(l0 + k, -1.0));
    } else if (k_users == 1) {
      pb.add_nonneg(Affine(lin).add(l0 + k, -1.0));
    } else {
      // lambda beta <= a^2 lambda^2 + b^2 beta^2 <= lin, tight at (lambda_t, beta_t)
      const double a = std::sqrt(at.beta(k) / (2.0 * lambda_t(k)));
      const double b = std::sqrt(lambda_t(k) / (2.0 * at.beta(k)));
      pb.add_soc({Affine(lin) += 1.0, Affine::var(l0 + k, 2.0 * a), Affine::var(b0 + k, 2.0 * b),
                  Affine(lin) += -1.0});
    }
  }
  return pb.build();
}

CVec project_unit_modulus(const CVec& u) {
  CVec out(u.size());
  for (Index n = 0; n < u.size(); ++n) {
    const double r = std::abs(u(n));
    out(n) = r < 1e-12 ? cplx(1.0, 0.0) : u(n) / r;
  }
  return out;
}

CVec stack_phases(const std::vector<CVec>& phases) {
  Index total = 0;
  for (const auto& p : phases) total += p.size();
  CVec u(total);
  Index at = 0;
  for (const auto& p : phases) {
    u.segment(at, p.size()) = p;
    at += p.size();
  }
  return u;
}

std::vector<CVec> split_phases(const CVec& u, int n_irs) {
  if (n_irs <= 0 || u.size() % n_irs != 0) throw DimensionError("split_phases: length is not a multiple of L");
  const Index n_r = u.size() / n_irs;
  std::vector<CVec> out;
  for (int l = 0; l < n_irs; ++l) out.push_back(u.segment(static_cast<Index>(l) * n_r, n_r));
  return out;
}

PhaseScaState sca_phases(const ChannelSet& channels, const SwitchVector& switches,
                         const std::vector<CVec>& beamformers, const std::vector<CVec>& init_phases,
                         const std::vector<double>& gamma_bits, const PhaseOptions& options) {
  const int k_users = channels.num_users();
  if (static_cast<int>(init_phases.size()) != channels.num_irs()) {
    throw DimensionError("sca_phases: one phase vector per IRS required");
  }
  for (const auto& p : init_phases) {
    if (p.size() != channels.n_r()) throw DimensionError("sca_phases: phase vector length differs from N_r");
    if ((p.cwiseAbs().array() - 1.0).abs().maxCoeff() > 1e-9) {
      throw DomainError("sca_phases: initial phases are not unit modulus");
    }
  }
  if (static_cast<int>(gamma_bits.size()) != k_users) throw DimensionError("sca_phases: one threshold per user");

  InterferenceVectors v = interference_vectors(channels, switches, beamformers);
  for (int k = 0; k < k_users; ++k) {
    const double scale = 1.0 / std::sqrt(channels.noise(k));
    for (auto& vec : v[k]) vec *= scale;
  }

  const CVec u_init = stack_phases(init_phases);
  const Sinrs start = evaluate(v, u_init);
  if (!meets(start.sinr, gamma_bits, kRateTolerance)) {
    throw InfeasibleError("sca_phases: initial phases violate a rate threshold");
  }

  PhaseScaState st;
  st.mu = options.mu;
  CVec u = u_init;
  Sinrs cur = start;
  st.objective_trace.push_back(penalized(cur.sinr, u, options.mu));
  std::vector<CVec> accepted{u};

  std::optional<conic::WarmStart> warm;
  for (st.iteration = 0; st.iteration < options.max_outer;) {
    std::vector<double> g(gamma_bits);
    for (int k = 0; k < k_users; ++k) {
      if (g[k] > 0.0) g[k] = std::min(g[k] + kRateMargin, std::log2(1.0 + cur.sinr(k)));
    }
    const conic::ConicProblem prob = build_p9(v, cur.sinr, u, options.mu, g);
    const Index u0 = prob.variable_map.at("u").first;
    const Index m = u.size();
    const double prev = st.objective_trace.back();

    bool ok = false;
    CVec next(m);
    Sinrs ev;
    double value = 0.0;
    for (const double shrink : {1.0, 1e-2}) {
      conic::SolverOptions so = options.solver;
      so.tol *= shrink;
      // The retry only polishes a near-stationary step; cap its cost.
      if (shrink < 1.0) so.max_iter = std::min(so.max_iter, kRetryIterations);
      const conic::ConicSolution sol = conic::solve(prob, so, warm);
      st.solver_iterations += sol.iterations;
      if (sol.status == conic::SolveStatus::Infeasible || sol.status == conic::SolveStatus::Unbounded) {
        throw SolverError(std::string("sca_phases: step problem reported ") + conic::to_string(sol.status));
      }
      // An unconverged iterate is still a candidate: the exact acceptance
      // test below decides.
      if (!sol.x.allFinite()) throw SolverError("sca_phases: conic solver diverged");
      warm = conic::WarmStart{sol.x, sol.y, sol.s};
      for (Index n = 0; n < m; ++n) {
        next(n) = cplx(sol.x(u0 + n), sol.x(u0 + m + n));
        const double r = std::abs(next(n));
        if (r > 1.0) next(n) /= r;
      }
      ev = evaluate(v, next);
      value = penalized(ev.sinr, next, options.mu);
      if (value >= prev && meets(ev.sinr, gamma_bits, kRateTolerance)) {
        ok = true;
        break;
      }
    }
    ++st.iteration;
    if (!ok) break;
    u = next;
    cur = ev;
    accepted.push_back(u);
    st.objective_trace.push_back(value);
    if (std::abs(value - prev) <= options.tol * std::max(1.0, std::abs(prev))) break;
  }
  st.min_modulus = u.size() ? u.cwiseAbs().minCoeff() : 1.0;

  // Report exact unit-modulus phases: best projected iterate, else the start.
  st.u = u_init;
  double best = rate_sum(start.sinr);
  for (auto it = accepted.rbegin(); it != accepted.rend(); ++it) {
    const CVec proj = project_unit_modulus(*it);
    const Sinrs e = evaluate(v, proj);
    const double r = rate_sum(e.sinr);
    if (meets(e.sinr, gamma_bits, kRateTolerance) && r > best) {
      best = r;
      st.u = proj;
      st.improved = true;
    }
  }
  st.lambda = evaluate(v, st.u).sinr;
  return st;
}

}  // namespace irsopt
