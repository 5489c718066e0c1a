#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "irsopt/errors.hpp"
#include "irsopt/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw irsopt::ConfigError("cannot read config '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed-IRS sum-rate experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, profile;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run the sweep in a config file and write CSV");
  run->add_option("--config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--out", out_path, "CSV output path (overrides output_path)");
  run->add_option("--profile", profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--threads", threads, "Worker threads (default: IRSOPT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse a config file and print the resolved settings");
  validate->add_option("--config", config_path, "Config file")->required();
  validate->add_option("--profile", profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));

  CLI11_PARSE(app, argc, argv);

  irsopt::ExperimentConfig config;
  try {
    config = irsopt::parse_config(read_file(config_path), profile);
  } catch (const irsopt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  if (*validate) {
    std::fputs(irsopt::serialize_config(config).c_str(), stdout);
    return 0;
  }

  if (!out_path.empty()) config.output_path = out_path;
  const auto records = irsopt::run_experiment(config, threads);
  try {
    irsopt::emit_csv(records, config.output_path);
  } catch (const irsopt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  const auto bad = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.status != "ok"; });
  std::fprintf(stderr, "%zu records written to %s (%td not ok)\n", records.size(), config.output_path.c_str(), bad);
  return bad > 0 ? 2 : 0;
}
