#include "irsopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "irsopt/channel.hpp"
#include "irsopt/errors.hpp"
#include "irsopt/hybrid.hpp"
#include "irsopt/metrics.hpp"
#include "irsopt/profiles.hpp"

namespace irsopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + text + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
  return out;
}

Point3 to_point(const std::string& key, const std::string& text, char sep) {
  const auto parts = split(text, sep);
  if (parts.size() != 3) throw ConfigError("config: '" + key + "' expects three coordinates, got '" + text + "'");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
}

// "x,y,z; x,y,z"
std::vector<Point3> to_points(const std::string& key, const std::string& text) {
  std::vector<Point3> out;
  for (const auto& part : split(text, ';')) out.push_back(to_point(key, part, ','));
  return out;
}

// shortest text that reads back to the same double
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string num9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

std::string point_text(const Point3& p, const char* sep) { return num(p.x()) + sep + num(p.y()) + sep + num(p.z()); }

std::string join_points(const std::vector<Point3>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? "; " : "") + point_text(pts[i], ",");
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string Scheme::name() const {
  switch (kind) {
    case SchemeKind::DIrs: return "d-irs";
    case SchemeKind::DIrsHbf: return "d-irs-hbf";
    case SchemeKind::AllActive: return "all-active";
    case SchemeKind::SIrs: {
      char buf[96];
      std::snprintf(buf, sizeof buf, "s-irs@%g/%g/%g", position.x(), position.y(), position.z());
      return buf;
    }
  }
  return "unknown";
}

Scheme Scheme::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t == "d-irs") return {SchemeKind::DIrs, Point3::Zero()};
  if (t == "d-irs-hbf") return {SchemeKind::DIrsHbf, Point3::Zero()};
  if (t == "all-active") return {SchemeKind::AllActive, Point3::Zero()};
  if (t.rfind("s-irs@", 0) == 0) return {SchemeKind::SIrs, to_point("schemes", t.substr(6), '/')};
  throw ConfigError("config: unknown scheme '" + t + "'");
}

const char* to_string(SweepVar var) { return var == SweepVar::PowerDbm ? "power_dbm" : "n_r"; }

ExperimentConfig default_config(const std::string& profile) {
  ExperimentConfig c;
  c.profile = profile;
  if (profile == "paper") {
    c.scenario = paper_scenario();
    c.power = paper_power_model();
    c.sweep_values = {-10, -5, 0, 5, 10, 15, 20, 25};
  } else if (profile == "desk") {
    c.scenario = desk_scenario();
    c.power = desk_power_model();
    c.sweep_values = {-10, 0, 10, 20};
  } else {
    throw ConfigError("config: unknown profile '" + profile + "' (expected paper or desk)");
  }
  c.sweep_var = SweepVar::PowerDbm;
  c.schemes = {Scheme{SchemeKind::DIrs, Point3::Zero()}, Scheme{SchemeKind::DIrsHbf, Point3::Zero()},
               Scheme{SchemeKind::AllActive, Point3::Zero()}, Scheme{SchemeKind::SIrs, Point3(0, 60, 20)},
               Scheme{SchemeKind::SIrs, Point3(0, 90, 20)}};
  return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& profile_override) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string profile = "paper";
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen[key]++) throw ConfigError("config: duplicate key '" + key + "'");
    if (key == "profile") {
      profile = value;
    } else {
      entries.emplace_back(key, value);
    }
  }
  if (!profile_override.empty()) profile = profile_override;

  ExperimentConfig c = default_config(profile);
  Scenario& s = c.scenario;
  for (const auto& [key, value] : entries) {
    if (key == "n_t") s.n_t = static_cast<int>(to_int(key, value));
    else if (key == "n_r") s.n_r = static_cast<int>(to_int(key, value));
    else if (key == "n_paths") s.n_paths_irs_user = static_cast<int>(to_int(key, value));
    else if (key == "beta0_db") s.beta0_db = to_double(key, value);
    else if (key == "c_los") s.c_los = to_double(key, value);
    else if (key == "c_nlos") s.c_nlos = to_double(key, value);
    else if (key == "noise_power_dbm") s.noise_power_dbm = to_double(key, value);
    else if (key == "power_budget_dbm") s.power_budget_dbm = to_double(key, value);
    else if (key == "gamma_bits") s.gamma_bits = to_double(key, value);
    else if (key == "gamma_per_user") s.gamma_per_user = to_doubles(key, value);
    else if (key == "array_gain") s.array_gain = to_bool(key, value);
    else if (key == "bs_position") s.bs_position = to_point(key, value, ',');
    else if (key == "irs_positions") s.irs_positions = to_points(key, value);
    else if (key == "user_positions") s.user_positions = to_points(key, value);
    else if (key == "p_rf_mw") c.power.p_rf_watts = to_double(key, value) * 1e-3;
    else if (key == "p_irs_mw") c.power.p_irs_watts = to_double(key, value) * 1e-3;
    else if (key == "n_rf") c.power.n_rf = static_cast<int>(to_int(key, value));
    else if (key == "sweep_var") {
      if (value == "power_dbm") c.sweep_var = SweepVar::PowerDbm;
      else if (value == "n_r") c.sweep_var = SweepVar::NR;
      else throw ConfigError("config: sweep_var must be power_dbm or n_r, got '" + value + "'");
    } else if (key == "sweep_values") c.sweep_values = to_doubles(key, value);
    else if (key == "schemes") {
      c.schemes.clear();
      for (const auto& part : split(value, ',')) c.schemes.push_back(Scheme::parse(part));
    } else if (key == "monte_carlo_runs") c.monte_carlo_runs = static_cast<int>(to_int(key, value));
    else if (key == "base_seed") c.base_seed = to_u64(key, value);
    else if (key == "output_path") c.output_path = value;
    else if (key == "dictionary_factor") c.dictionary_factor = static_cast<int>(to_int(key, value));
    else if (key == "record_wall_time") c.record_wall_time = to_bool(key, value);
    else if (key == "ao_tol") c.ao.tol = to_double(key, value);
    else if (key == "ao_max_outer") c.ao.max_outer = static_cast<int>(to_int(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
  }

  if (c.sweep_values.empty()) throw ConfigError("config: sweep_values must not be empty");
  if (c.schemes.empty()) throw ConfigError("config: schemes must not be empty");
  if (c.monte_carlo_runs < 1) throw ConfigError("config: monte_carlo_runs must be >= 1");
  if (c.dictionary_factor < 1) throw ConfigError("config: dictionary_factor must be >= 1");
  if (c.power.n_rf < 1) throw ConfigError("config: n_rf must be >= 1");
  if (c.power.p_rf_watts < 0.0 || c.power.p_irs_watts < 0.0) throw ConfigError("config: powers must be >= 0");
  if (c.ao.tol < 0.0 || c.ao.max_outer < 1) throw ConfigError("config: ao_tol >= 0 and ao_max_outer >= 1 required");
  if (c.sweep_var == SweepVar::NR) {
    for (double v : c.sweep_values) {
      if (v < 1 || v != std::floor(v)) throw ConfigError("config: n_r sweep values must be positive integers");
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: invalid scenario: ") + e.what());
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  const Scenario& s = c.scenario;
  std::string schemes;
  for (std::size_t i = 0; i < c.schemes.size(); ++i) schemes += (i ? ", " : "") + c.schemes[i].name();
  std::ostringstream o;
  o << "profile = " << c.profile << "\n"
    << "n_t = " << s.n_t << "\n"
    << "n_r = " << s.n_r << "\n"
    << "n_paths = " << s.n_paths_irs_user << "\n"
    << "beta0_db = " << num(s.beta0_db) << "\n"
    << "c_los = " << num(s.c_los) << "\n"
    << "c_nlos = " << num(s.c_nlos) << "\n"
    << "noise_power_dbm = " << num(s.noise_power_dbm) << "\n"
    << "power_budget_dbm = " << num(s.power_budget_dbm) << "\n"
    << "gamma_bits = " << num(s.gamma_bits) << "\n"
    << "gamma_per_user = " << join_doubles(s.gamma_per_user) << "\n"
    << "array_gain = " << (s.array_gain ? "true" : "false") << "\n"
    << "bs_position = " << point_text(s.bs_position, ",") << "\n"
    << "irs_positions = " << join_points(s.irs_positions) << "\n"
    << "user_positions = " << join_points(s.user_positions) << "\n"
    << "p_rf_mw = " << num(c.power.p_rf_watts * 1e3) << "\n"
    << "p_irs_mw = " << num(c.power.p_irs_watts * 1e3) << "\n"
    << "n_rf = " << c.power.n_rf << "\n"
    << "sweep_var = " << to_string(c.sweep_var) << "\n"
    << "sweep_values = " << join_doubles(c.sweep_values) << "\n"
    << "schemes = " << schemes << "\n"
    << "monte_carlo_runs = " << c.monte_carlo_runs << "\n"
    << "base_seed = " << c.base_seed << "\n"
    << "output_path = " << c.output_path << "\n"
    << "dictionary_factor = " << c.dictionary_factor << "\n"
    << "record_wall_time = " << (c.record_wall_time ? "true" : "false") << "\n"
    << "ao_tol = " << num(c.ao.tol) << "\n"
    << "ao_max_outer = " << c.ao.max_outer << "\n";
  return o.str();
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t run_index) {
  return base_seed ^ splitmix64((static_cast<std::uint64_t>(value_index) << 32) | run_index);
}

Scenario scheme_scenario(const ExperimentConfig& config, const Scheme& scheme, double sweep_value,
                         std::uint64_t seed) {
  Scenario s = config.scenario;
  s.seed = seed;
  if (config.sweep_var == SweepVar::PowerDbm) {
    s.power_budget_dbm = sweep_value;
  } else {
    s.n_r = static_cast<int>(sweep_value);
  }
  if (scheme.kind == SchemeKind::SIrs) {
    s.n_r *= s.num_irs();
    s.irs_positions = {scheme.position};
  }
  return s;
}

namespace {

struct Outcome {
  AoReport report;
  ChannelSet channels;
  Scenario scenario;
  std::string status;
  double ms = 0.0;
};

Outcome run_ao(const Scenario& scenario, const AoOptions& options) {
  Outcome out;
  out.scenario = scenario;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.channels = sample_channels(scenario);
    out.report = alternating_optimize(scenario, out.channels, options);
    switch (out.report.status) {
      case AoStatus::Ok:
      case AoStatus::Degenerate:
        out.status = check_feasible(out.channels, out.report.state, scenario).feasible ? "ok" : "infeasible";
        break;
      case AoStatus::Infeasible: out.status = "infeasible"; break;
      case AoStatus::SolverFail: out.status = "solver_fail"; break;
    }
  } catch (const Error&) {
    out.status = "solver_fail";
  }
  out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunRecord base_record(const ExperimentConfig& config, const Scheme& scheme, double value, std::uint64_t seed) {
  RunRecord r;
  r.scheme = scheme.name();
  r.sweep_var = to_string(config.sweep_var);
  r.sweep_value = value;
  r.seed = seed;
  return r;
}

// Fills rate/EE from a design; runs that are not ok report zeros and no design.
void fill_from(RunRecord& r, const Outcome& o, const DesignState& state, int n_rf, const PowerModel& power) {
  r.outer_iterations = o.report.outer_iterations;
  r.status = o.status;
  if (o.status != "ok") return;
  r.design = state;
  PowerModel pm = power;
  pm.n_rf = n_rf;
  r.sum_rate = sum_rate(o.channels, state);
  r.energy_efficiency = energy_efficiency(o.channels, state, pm);
}

std::vector<RunRecord> run_job(const ExperimentConfig& config, std::size_t vi, std::size_t run) {
  const double value = config.sweep_values[vi];
  const std::uint64_t seed = derive_seed(config.base_seed, vi, run);
  std::vector<RunRecord> out;

  std::optional<Outcome> distributed;
  auto d_irs = [&]() -> const Outcome& {
    if (!distributed) {
      AoOptions opt = config.ao;
      opt.switching = SwitchMode::Greedy;
      distributed = run_ao(scheme_scenario(config, Scheme{}, value, seed), opt);
    }
    return *distributed;
  };

  for (const Scheme& scheme : config.schemes) {
    RunRecord r = base_record(config, scheme, value, seed);
    double ms = 0.0;
    switch (scheme.kind) {
      case SchemeKind::DIrs: {
        const Outcome& o = d_irs();
        fill_from(r, o, o.report.state, o.scenario.n_t, config.power);
        ms = o.ms;
        break;
      }
      case SchemeKind::DIrsHbf: {
        const Outcome& o = d_irs();
        ms = o.ms;
        if (o.status != "ok") {
          fill_from(r, o, o.report.state, o.scenario.n_t, config.power);
          break;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const int n_t = o.scenario.n_t;
        const int n_rf = std::min(config.power.n_rf, n_t);
        const HybridFactors f = omp_decompose(stack_beamformers(o.report.state.beamformers),
                                              steering_dictionary(n_t, config.dictionary_factor * n_t), n_rf);
        Outcome hybrid = o;
        hybrid.report.state.beamformers = split_beamformers(f.precoder());
        hybrid.status = check_feasible(o.channels, hybrid.report.state, o.scenario).feasible ? "ok" : "infeasible";
        fill_from(r, hybrid, hybrid.report.state, n_rf, config.power);
        ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        break;
      }
      case SchemeKind::AllActive:
      case SchemeKind::SIrs: {
        AoOptions opt = config.ao;
        opt.switching = scheme.kind == SchemeKind::AllActive ? SwitchMode::AllActive : SwitchMode::Greedy;
        const Outcome o = run_ao(scheme_scenario(config, scheme, value, seed), opt);
        fill_from(r, o, o.report.state, o.scenario.n_t, config.power);
        ms = o.ms;
        break;
      }
    }
    r.wall_time_ms = config.record_wall_time ? ms : 0.0;
    out.push_back(r);
  }
  return out;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("IRSOPT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int threads) {
  const std::size_t n_values = config.sweep_values.size();
  const std::size_t runs = static_cast<std::size_t>(config.monte_carlo_runs);
  const std::size_t jobs = n_values * runs;
  std::vector<std::vector<RunRecord>> results(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs; j = next++) results[j] = run_job(config, j / runs, j % runs);
  };
  const int n = std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::size_t>(jobs, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunRecord> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  return all;
}

std::string format_csv(std::vector<RunRecord> records) {
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    return a.seed < b.seed;
  });
  std::string out = "scheme,sweep_var,sweep_value,seed,sum_rate_bps_hz,ee,outer_iters,wall_time_ms,status\n";
  for (const auto& r : records) {
    out += r.scheme + "," + r.sweep_var + "," + num9(r.sweep_value) + "," + std::to_string(r.seed) + "," +
           num9(r.sum_rate) + "," + num9(r.energy_efficiency) + "," + std::to_string(r.outer_iterations) + "," +
           num9(r.wall_time_ms) + "," + r.status + "\n";
  }
  return out;
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("emit_csv: cannot open '" + path + "' for writing");
  f << format_csv(records);
  if (!f) throw Error("emit_csv: write to '" + path + "' failed");
}

}  // namespace irsopt
