#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdrepair/dataset/corpus.hpp"
#include "tdrepair/pipeline/pipeline.hpp"

namespace tdrepair::cli {

// Operator settings after layering defaults < config file < TDREPAIR_*
// environment < command-line flags.
struct CliConfig {
  std::filesystem::path corpus;
  dataset::CorpusSchema schema = dataset::CorpusSchema::kGeneric;
  std::filesystem::path external_tests;
  bool no_augment = false;

  std::string backend = "mock";
  std::filesystem::path mock_script;
  double rate_limit_rps = 0;  // 0 = unlimited

  std::filesystem::path runner_path = "tdrepair-runner";
  int process_slots = 0;  // 0 = one per worker
  bool resume = false;

  int num_tests = 5;
  std::filesystem::path output;
  std::string format = "table";
  std::string log_level = "info";

  pipeline::RunConfig run;

  CliConfig();
};

// Every settable key, in snake_case. The flag spelling is the same with
// dashes ("per_test_timeout_ms" <-> --per-test-timeout-ms), the environment
// variable is TDREPAIR_ + upper case.
const std::vector<std::string>& config_keys();

std::string flag_name(const std::string& key);
std::string env_name(const std::string& key);

// Applies one textual value. Throws ConfigError naming the key.
void set_value(CliConfig& c, const std::string& key, const std::string& value);

// Flat JSON object of keys; unknown keys are a ConfigError.
void apply_json(CliConfig& c, const nlohmann::json& j);
void apply_config_file(CliConfig& c, const std::filesystem::path& path);  // throws IoError, ConfigError

// getenv is injectable for tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();
void apply_env(CliConfig& c, const EnvLookup& env);

// Builds the layered config. `flags` holds only what was given on the
// command line.
CliConfig resolve_config(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env,
                         const std::map<std::string, std::string>& flags);

// Cross-field checks (limits, worker counts, provider names).
void validate(const CliConfig& c);

nlohmann::json config_to_json(const CliConfig& c);

}  // namespace tdrepair::cli
