#include "tdrepair/harness/report.hpp"

#include <algorithm>

#include "tdrepair/errors.hpp"

namespace tdrepair::harness {

using nlohmann::json;

const char* to_string(TestStatus s) {
  switch (s) {
    case TestStatus::kPass: return "pass";
    case TestStatus::kAssertionFail: return "assertion_fail";
    case TestStatus::kRuntimeError: return "runtime_error";
    case TestStatus::kTimeout: return "timeout";
    case TestStatus::kCollectError: return "collect_error";
  }
  return "runtime_error";
}

std::optional<TestStatus> status_from_string(std::string_view s) {
  for (TestStatus t : {TestStatus::kPass, TestStatus::kAssertionFail, TestStatus::kRuntimeError,
                       TestStatus::kTimeout, TestStatus::kCollectError}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

void ExecutionLimits::validate() const {
  if (per_test_timeout.count() <= 0) throw ConfigError("per-test timeout must be positive");
  if (total_timeout.count() <= 0) throw ConfigError("total timeout must be positive");
  if (per_test_timeout > total_timeout) throw ConfigError("per-test timeout exceeds total timeout");
  if (memory_limit_mib == 0) throw ConfigError("memory limit must be positive");
}

bool ExecutionReport::passed() const {
  return !outcomes.empty() &&
         std::all_of(outcomes.begin(), outcomes.end(), [](const TestOutcome& o) { return o.status == TestStatus::kPass; });
}

std::vector<TestStatus> ExecutionReport::statuses() const {
  std::vector<TestStatus> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.status);
  return out;
}

std::size_t ExecutionReport::count(TestStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [s](const TestOutcome& o) { return o.status == s; }));
}

namespace {

json optional_string(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<std::string> read_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

json outcome_to_json(const TestOutcome& o) {
  return {{"test_index", o.test_index},
          {"status", to_string(o.status)},
          {"exception_type", optional_string(o.exception_type)},
          {"message", optional_string(o.message)},
          {"traceback", optional_string(o.traceback)},
          {"duration_ms", o.duration_ms}};
}

TestOutcome outcome_from_json(const json& j) {
  TestOutcome o;
  o.test_index = j.at("test_index").get<std::size_t>();
  const auto status = status_from_string(j.at("status").get<std::string>());
  if (!status) throw std::invalid_argument("unknown status " + j.at("status").dump());
  o.status = *status;
  o.exception_type = read_optional(j, "exception_type");
  o.message = read_optional(j, "message");
  o.traceback = read_optional(j, "traceback");
  o.duration_ms = j.value("duration_ms", std::int64_t{0});
  return o;
}

json report_to_json(const ExecutionReport& r) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(outcome_to_json(o));
  return {{"overall", r.passed() ? "PASS" : "FAIL"}, {"outcomes", std::move(outcomes)}};
}

ExecutionReport report_from_json(const json& j) {
  ExecutionReport r;
  for (const auto& o : j.at("outcomes")) r.outcomes.push_back(outcome_from_json(o));
  return r;
}

}  // namespace tdrepair::harness
