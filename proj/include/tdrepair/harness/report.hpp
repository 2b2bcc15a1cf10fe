#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tdrepair::harness {

enum class TestStatus { kPass, kAssertionFail, kRuntimeError, kTimeout, kCollectError };

const char* to_string(TestStatus s);
std::optional<TestStatus> status_from_string(std::string_view s);

struct ExecutionLimits {
  std::chrono::milliseconds per_test_timeout{5000};
  std::chrono::milliseconds total_timeout{60000};
  std::size_t memory_limit_mib = 512;
  std::filesystem::path workdir;  // parent for per-run scratch dirs; empty = system temp

  // Throws ConfigError.
  void validate() const;
};

struct TestOutcome {
  std::size_t test_index = 0;
  TestStatus status = TestStatus::kPass;
  std::optional<std::string> exception_type;
  std::optional<std::string> message;
  std::optional<std::string> traceback;  // as reported by the runner
  std::int64_t duration_ms = 0;

  bool operator==(const TestOutcome&) const = default;
};

struct ExecutionReport {
  std::vector<TestOutcome> outcomes;

  // True iff every outcome passed (and there is at least one).
  bool passed() const;
  std::vector<TestStatus> statuses() const;
  std::size_t count(TestStatus s) const;

  bool operator==(const ExecutionReport&) const = default;
};

nlohmann::json outcome_to_json(const TestOutcome& o);
TestOutcome outcome_from_json(const nlohmann::json& j);  // throws nlohmann::json::exception

// {"overall": "PASS"|"FAIL", "outcomes": [...]}
nlohmann::json report_to_json(const ExecutionReport& r);
ExecutionReport report_from_json(const nlohmann::json& j);

}  // namespace tdrepair::harness
