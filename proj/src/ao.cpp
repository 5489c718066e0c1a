#include "irsopt/ao.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "irsopt/channel.hpp"
#include "irsopt/errors.hpp"
#include "irsopt/metrics.hpp"
#include "irsopt/switching.hpp"

namespace irsopt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// True when no (user, IRS) pair has a nonzero cascaded path.
bool all_paths_dead(const ChannelSet& ch) {
  for (int l = 0; l < ch.num_irs(); ++l) {
    if (ch.g[l].squaredNorm() == 0.0) continue;
    for (int k = 0; k < ch.num_users(); ++k) {
      if (ch.h[k][l].squaredNorm() > 0.0) return false;
    }
  }
  return true;
}

// Each IRS co-phased towards one user; users take turns, weakest total
// first, picking their strongest remaining IRS. Used when the all-ones start
// misses a rate threshold.
std::vector<CVec> serving_phases(const ChannelSet& ch) {
  const int l_irs = ch.num_irs();
  const int k_users = ch.num_users();
  // For rank-one G_l the per-element gain of user k is |h_kln| ||G_l row n||.
  std::vector<Vec> row_norm(l_irs);
  for (int l = 0; l < l_irs; ++l) row_norm[l] = ch.g[l].rowwise().norm();
  Mat gain(k_users, l_irs);
  for (int k = 0; k < k_users; ++k)
    for (int l = 0; l < l_irs; ++l) gain(k, l) = ch.h[k][l].cwiseAbs().dot(row_norm[l]);

  std::vector<int> owner(l_irs, -1);
  Vec total = Vec::Zero(k_users);
  for (int round = 0; round < l_irs; ++round) {
    int k = 0;
    for (int i = 1; i < k_users; ++i)
      if (total(i) < total(k)) k = i;
    int best = -1;
    for (int l = 0; l < l_irs; ++l)
      if (owner[l] < 0 && (best < 0 || gain(k, l) > gain(k, best))) best = l;
    owner[best] = k;
    total(k) += gain(k, best) * gain(k, best);
  }

  std::vector<CVec> phases;
  for (int l = 0; l < l_irs; ++l) {
    const CMat& g = ch.g[l];
    Eigen::Index col = 0;
    g.colwise().norm().maxCoeff(&col);
    const CVec z = ch.h[owner[l]][l].conjugate().cwiseProduct(g.col(col));
    CVec u(z.size());
    for (Eigen::Index n = 0; n < z.size(); ++n) u(n) = std::abs(z(n)) > 0.0 ? std::conj(z(n)) / std::abs(z(n)) : 1.0;
    phases.push_back(u);
  }
  return phases;
}

}  // namespace

const char* to_string(AoStatus status) {
  switch (status) {
    case AoStatus::Ok: return "ok";
    case AoStatus::Degenerate: return "degenerate";
    case AoStatus::Infeasible: return "infeasible";
    case AoStatus::SolverFail: return "solver_fail";
  }
  return "unknown";
}

AoReport alternating_optimize(const Scenario& scenario, const ChannelSet& channels, const AoOptions& options) {
  scenario.validate();
  const int l_irs = channels.num_irs();
  const int k_users = channels.num_users();
  if (l_irs != scenario.num_irs() || k_users != scenario.num_users() || channels.n_t() != scenario.n_t ||
      channels.n_r() != scenario.n_r) {
    throw DimensionError("alternating_optimize: channels do not match the scenario");
  }
  const double power = scenario.power_budget_watts();
  const std::vector<double> gamma = scenario.gammas();

  AoReport rep;
  DesignState& st = rep.state;
  st.phases.assign(l_irs, CVec::Ones(channels.n_r()));
  st.switches = SwitchVector::all_on(l_irs);
  st.beamformers.assign(k_users, CVec::Zero(channels.n_t()));

  const bool needs_rate = std::any_of(gamma.begin(), gamma.end(), [](double g) { return g > 0.0; });
  if (all_paths_dead(channels)) {
    rep.status = needs_rate ? AoStatus::Infeasible : AoStatus::Degenerate;
    rep.message = "all cascaded channels are zero";
    rep.objective_trace.push_back(0.0);
    return rep;
  }

  try {
    st.beamformers = initial_beamformers(effective_channels(channels, st.phases, st.switches), channels.noise,
                                         power, gamma);
  } catch (const InfeasibleError&) {
    try {
      st.phases = serving_phases(channels);
      st.beamformers = initial_beamformers(effective_channels(channels, st.phases, st.switches), channels.noise,
                                           power, gamma);
    } catch (const InfeasibleError& e) {
      st.phases.assign(l_irs, CVec::Ones(channels.n_r()));
      st.beamformers.assign(k_users, CVec::Zero(channels.n_t()));
      rep.status = AoStatus::Infeasible;
      rep.message = e.what();
      rep.objective_trace.push_back(0.0);
      return rep;
    }
  }
  rep.objective_trace.push_back(sum_rate(channels, st));

  PhaseOptions phase_opts = options.phase;
  for (rep.outer_iterations = 0; rep.outer_iterations < options.max_outer;) {
    const double prev = rep.objective_trace.back();
    try {
      auto t0 = Clock::now();
      const ScaBeamState bf = sca_beamforming(channels, st.phases, st.switches, st.beamformers, power, gamma,
                                              options.beamforming);
      st.beamformers = bf.beamformers;
      rep.beamforming_steps += bf.iteration;
      rep.beamforming_traces.push_back(bf.objective_trace);
      rep.solver_iterations += bf.solver_iterations;
      rep.times.beamforming_ms += elapsed_ms(t0);

      t0 = Clock::now();
      const PhaseScaState ph = sca_phases(channels, st.switches, st.beamformers, st.phases, gamma, phase_opts);
      st.phases = split_phases(ph.u, l_irs);
      rep.phase_steps += ph.iteration;
      rep.phase_traces.push_back(ph.objective_trace);
      rep.solver_iterations += ph.solver_iterations;
      if (ph.min_modulus < options.min_modulus_target) {
        phase_opts.mu = std::min(phase_opts.mu * options.mu_growth, options.mu_max);
      }
      rep.times.phase_ms += elapsed_ms(t0);
    } catch (const SolverError& e) {
      // The incumbent is still feasible; keep it and stop.
      ++rep.stage_failures;
      rep.message = e.what();
      break;
    }

    if (options.switching == SwitchMode::Greedy) {
      const auto t0 = Clock::now();
      const SwitchResult sw = greedy_switch(channels, st.phases, st.beamformers, gamma);
      // Greedy restarts from all-on; keep the current x unless it wins.
      if (sw.value > switch_value(channels, st.phases, st.beamformers, st.switches, gamma)) {
        st.switches = sw.switches;
      }
      rep.times.switch_ms += elapsed_ms(t0);
    }

    ++rep.outer_iterations;
    const double rate = sum_rate(channels, st);
    rep.objective_trace.push_back(rate);
    if (std::abs(rate - prev) <= options.tol) break;
  }
  return rep;
}

FeasibilityReport check_feasible(const ChannelSet& channels, const DesignState& state, const Scenario& scenario) {
  check_dimensions(channels, state.phases, state.switches);
  if (static_cast<int>(state.beamformers.size()) != channels.num_users()) {
    throw DimensionError("check_feasible: one beamformer per user required");
  }
  FeasibilityReport r;
  const std::vector<double> rates = user_rates(channels, state);
  for (int k = 0; k < channels.num_users(); ++k) r.rate = std::max(r.rate, scenario.gamma(k) - rates[k]);
  r.power = std::max(0.0, transmit_power(state) / scenario.power_budget_watts() - 1.0);
  for (const auto& u : state.phases) {
    if (u.size() > 0) r.modulus = std::max(r.modulus, (u.cwiseAbs().array() - 1.0).abs().maxCoeff());
  }
  for (auto f : state.switches.flags) {
    if (f != 0 && f != 1) r.binary = 1.0;
  }
  r.feasible = r.rate <= kFeasRateTol && r.power <= kFeasPowerTol && r.modulus <= kFeasModulusTol && r.binary == 0.0;
  return r;
}

}  // namespace irsopt
