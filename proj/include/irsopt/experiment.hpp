#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsopt/ao.hpp"
#include "irsopt/types.hpp"

namespace irsopt {

enum class SchemeKind {
  /// Distributed IRSs, digital beamforming, greedy switching.
  DIrs,
  /// D-IRS design with the precoder split into RF and baseband parts.
  DIrsHbf,
  /// Distributed IRSs, all switched on.
  AllActive,
  /// One IRS with all L N_r elements at a given position.
  SIrs,
};

struct Scheme {
  SchemeKind kind = SchemeKind::DIrs;
  Point3 position = Point3::Zero();  // S-IRS only

  /// "d-irs", "d-irs-hbf", "all-active", "s-irs@x/y/z".
  std::string name() const;
  static Scheme parse(const std::string& text);
  bool operator==(const Scheme& other) const { return kind == other.kind && position == other.position; }
};

enum class SweepVar { PowerDbm, NR };

const char* to_string(SweepVar var);

struct ExperimentConfig {
  /// "paper" or "desk": base deployment the other keys modify.
  std::string profile = "paper";
  Scenario scenario;
  PowerModel power;
  SweepVar sweep_var = SweepVar::PowerDbm;
  std::vector<double> sweep_values;
  std::vector<Scheme> schemes;
  int monte_carlo_runs = 20;
  std::uint64_t base_seed = 1;
  std::string output_path = "results.csv";
  /// OMP dictionary size per transmit antenna.
  int dictionary_factor = 4;
  /// Write measured run times; off by default so CSV output is reproducible.
  bool record_wall_time = false;
  AoOptions ao;
};

/// Defaults of a profile: scenario, power model, sweep and schemes.
ExperimentConfig default_config(const std::string& profile);

/// Strict "key = value" parser; '#' starts a comment. A `profile` key, or
/// `profile_override` when given, selects the defaults the other keys
/// modify. Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::string& profile_override = "");

/// Text that parse_config maps back to the same configuration.
std::string serialize_config(const ExperimentConfig& config);

struct RunRecord {
  std::string scheme;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  double energy_efficiency = 0.0;
  int outer_iterations = 0;
  double wall_time_ms = 0.0;
  std::string status = "ok";
  /// Design behind the numbers; empty unless status is "ok". Not written to CSV.
  DesignState design;
};

/// Channel seed of one (sweep point, run) pair; shared by all schemes.
std::uint64_t derive_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t run_index);

/// Scenario of one scheme at one sweep point.
Scenario scheme_scenario(const ExperimentConfig& config, const Scheme& scheme, double sweep_value,
                         std::uint64_t seed);

/// Every (scheme, sweep value, run). Failures become records; the sweep
/// never aborts. threads <= 0 picks IRSOPT_THREADS or the hardware count.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int threads = 1);

/// Header plus one row per record sorted by (scheme, value, seed); numbers
/// with 9 significant digits.
std::string format_csv(std::vector<RunRecord> records);
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);

}  // namespace irsopt
