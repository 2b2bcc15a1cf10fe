#include "tdrepair/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "tdrepair/agents/http_backend.hpp"
#include "tdrepair/errors.hpp"

namespace tdrepair::cli {

namespace fs = std::filesystem;
using Setter = std::function<void(CliConfig&, const std::string&)>;

CliConfig::CliConfig() = default;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(key + ": invalid value '" + value + "' (expected " + expected + ")");
}

long long parse_int(const std::string& key, const std::string& v, long long min) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "an integer");
  if (out < min) bad(key, v, "an integer >= " + std::to_string(min));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) bad(key, v, "a number");
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad(key, v, "true or false");
}

std::chrono::milliseconds parse_ms(const std::string& key, const std::string& v) {
  return std::chrono::milliseconds(parse_int(key, v, 1));
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"corpus", [](CliConfig& c, const std::string& v) { c.corpus = v; }},
      {"schema", [](CliConfig& c, const std::string& v) { c.schema = dataset::schema_from_string(v); }},
      {"external_tests", [](CliConfig& c, const std::string& v) { c.external_tests = v; }},
      {"no_augment", [](CliConfig& c, const std::string& v) { c.no_augment = parse_bool("no_augment", v); }},
      {"backend", [](CliConfig& c, const std::string& v) {
         c.backend = v;
         for (auto* b : {&c.run.agents.coder, &c.run.agents.debugger, &c.run.agents.testgen}) b->provider_id = v;
       }},
      {"mock_script", [](CliConfig& c, const std::string& v) { c.mock_script = v; }},
      {"model", [](CliConfig& c, const std::string& v) {
         for (auto* b : {&c.run.agents.coder, &c.run.agents.debugger, &c.run.agents.testgen}) b->model_id = v;
       }},
      {"reasoning_effort_coder", [](CliConfig& c, const std::string& v) {
         c.run.agents.coder.reasoning_effort = agents::reasoning_effort_from_string(v);
       }},
      {"reasoning_effort_debugger", [](CliConfig& c, const std::string& v) {
         c.run.agents.debugger.reasoning_effort = agents::reasoning_effort_from_string(v);
       }},
      {"reasoning_effort_testgen", [](CliConfig& c, const std::string& v) {
         c.run.agents.testgen.reasoning_effort = agents::reasoning_effort_from_string(v);
       }},
      {"temperature", [](CliConfig& c, const std::string& v) {
         const double t = parse_double("temperature", v);
         for (auto* b : {&c.run.agents.coder, &c.run.agents.debugger, &c.run.agents.testgen}) b->temperature = t;
       }},
      {"max_retries", [](CliConfig& c, const std::string& v) {
         const int n = static_cast<int>(parse_int("max_retries", v, 0));
         for (auto* b : {&c.run.agents.coder, &c.run.agents.debugger, &c.run.agents.testgen}) b->max_retries = n;
       }},
      {"request_timeout_ms", [](CliConfig& c, const std::string& v) {
         const auto ms = parse_ms("request_timeout_ms", v);
         for (auto* b : {&c.run.agents.coder, &c.run.agents.debugger, &c.run.agents.testgen}) b->request_timeout = ms;
       }},
      {"rate_limit_rps", [](CliConfig& c, const std::string& v) {
         c.rate_limit_rps = parse_double("rate_limit_rps", v);
         if (c.rate_limit_rps < 0) bad("rate_limit_rps", v, "a number >= 0");
       }},
      {"max_attempts", [](CliConfig& c, const std::string& v) {
         c.run.max_stage1_attempts = static_cast<int>(parse_int("max_attempts", v, 1));
       }},
      {"max_repair_rounds", [](CliConfig& c, const std::string& v) {
         c.run.max_repair_rounds = static_cast<int>(parse_int("max_repair_rounds", v, 1));
       }},
      {"per_test_timeout_ms", [](CliConfig& c, const std::string& v) {
         c.run.limits.per_test_timeout = parse_ms("per_test_timeout_ms", v);
       }},
      {"total_timeout_ms", [](CliConfig& c, const std::string& v) {
         c.run.limits.total_timeout = parse_ms("total_timeout_ms", v);
       }},
      {"memory_limit_mib", [](CliConfig& c, const std::string& v) {
         c.run.limits.memory_limit_mib = static_cast<std::size_t>(parse_int("memory_limit_mib", v, 1));
       }},
      {"workdir", [](CliConfig& c, const std::string& v) { c.run.limits.workdir = v; }},
      {"trace_budget", [](CliConfig& c, const std::string& v) {
         c.run.trace_budget = static_cast<std::size_t>(parse_int("trace_budget", v, 1));
       }},
      {"failing_tests_only", [](CliConfig& c, const std::string& v) {
         c.run.agents.failing_tests_only = parse_bool("failing_tests_only", v);
       }},
      {"workers", [](CliConfig& c, const std::string& v) { c.run.worker_count = static_cast<int>(parse_int("workers", v, 1)); }},
      {"process_slots", [](CliConfig& c, const std::string& v) {
         c.process_slots = static_cast<int>(parse_int("process_slots", v, 0));
       }},
      {"run_dir", [](CliConfig& c, const std::string& v) { c.run.run_dir = v; }},
      {"resume", [](CliConfig& c, const std::string& v) { c.resume = parse_bool("resume", v); }},
      {"runner_path", [](CliConfig& c, const std::string& v) { c.runner_path = v; }},
      {"num_tests", [](CliConfig& c, const std::string& v) { c.num_tests = static_cast<int>(parse_int("num_tests", v, 1)); }},
      {"output", [](CliConfig& c, const std::string& v) { c.output = v; }},
      {"format", [](CliConfig& c, const std::string& v) {
         if (v != "table" && v != "machine") bad("format", v, "table or machine");
         c.format = v;
       }},
      {"log_level", [](CliConfig& c, const std::string& v) { c.log_level = v; }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

std::string env_name(const std::string& key) {
  std::string e = "TDREPAIR_" + key;
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::toupper(c); });
  return e;
}

void set_value(CliConfig& c, const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(c, value);
      return;
    }
  }
  throw ConfigError("unknown setting '" + key + "'");
}

void apply_json(CliConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      set_value(c, key, value.get<std::string>());
    } else if (value.is_boolean() || value.is_number()) {
      set_value(c, key, value.dump());
    } else {
      throw ConfigError(key + ": expected a string, number or boolean");
    }
  }
}

void apply_config_file(CliConfig& c, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  apply_json(c, j);
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(CliConfig& c, const EnvLookup& env) {
  for (const auto& key : config_keys()) {
    if (const auto v = env(env_name(key))) set_value(c, key, *v);
  }
}

CliConfig resolve_config(const std::optional<fs::path>& config_file, const EnvLookup& env,
                         const std::map<std::string, std::string>& flags) {
  CliConfig c;
  if (config_file) apply_config_file(c, *config_file);
  apply_env(c, env);
  for (const auto& key : config_keys()) {
    if (const auto it = flags.find(key); it != flags.end()) set_value(c, key, it->second);
  }
  for (const auto& [key, _] : flags) {
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
  return c;
}

void validate(const CliConfig& c) {
  if (c.backend != "mock" && !agents::http_provider_from_string(c.backend)) {
    throw ConfigError("unknown backend '" + c.backend + "' (expected mock, openai, anthropic or google)");
  }
  if (c.backend != "mock" && c.run.agents.coder.model_id.empty()) {
    throw ConfigError("backend '" + c.backend + "' needs --model");
  }
  c.run.validate();
}

nlohmann::json config_to_json(const CliConfig& c) {
  nlohmann::json j = pipeline::config_to_json(c.run);
  j["backend"] = c.backend;
  j["mock_script"] = c.mock_script.string();
  j["runner_path"] = c.runner_path.string();
  j["corpus"] = c.corpus.string();
  j["external_tests"] = c.external_tests.string();
  j["no_augment"] = c.no_augment;
  return j;
}

}  // namespace tdrepair::cli
