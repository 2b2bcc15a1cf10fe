#include "tdrepair/harness/protocol.hpp"

#include <stdexcept>

#include "tdrepair/errors.hpp"

namespace tdrepair::harness::protocol {

using nlohmann::json;

json encode_job(const Job& job) {
  return {{"protocol", kVersion},
          {"program", job.program},
          {"tests", job.tests},
          {"per_test_timeout_ms", job.per_test_timeout_ms}};
}

Job decode_job(std::string_view payload) {
  const json j = json::parse(payload, nullptr, false);
  if (!j.is_object()) throw std::invalid_argument("job is not a JSON object");
  if (j.value("protocol", "") != kVersion) throw std::invalid_argument("unsupported protocol version");
  if (!j.contains("program") || !j["program"].is_string()) throw std::invalid_argument("program must be a string");
  if (!j.contains("tests") || !j["tests"].is_array()) throw std::invalid_argument("tests must be an array");
  if (!j.contains("per_test_timeout_ms") || !j["per_test_timeout_ms"].is_number_integer() ||
      j["per_test_timeout_ms"].get<std::int64_t>() <= 0) {
    throw std::invalid_argument("per_test_timeout_ms must be a positive integer");
  }
  Job job;
  job.program = j["program"].get<std::string>();
  for (const auto& t : j["tests"]) {
    if (!t.is_string()) throw std::invalid_argument("tests must be strings");
    job.tests.push_back(t.get<std::string>());
  }
  job.per_test_timeout_ms = j["per_test_timeout_ms"].get<std::int64_t>();
  return job;
}

json encode_result(const std::vector<TestOutcome>& outcomes) {
  json results = json::array();
  for (const auto& o : outcomes) results.push_back(outcome_to_json(o));
  return {{"protocol", kVersion}, {"results", std::move(results)}};
}

namespace {

[[noreturn]] void violation(const std::string& what, std::string_view payload) {
  throw InfrastructureError(InfrastructureError::Kind::kProtocolViolation, "runner protocol violation: " + what,
                            std::string(payload));
}

std::optional<std::string> nullable_string(const json& r, const char* key, std::size_t i, std::string_view payload) {
  auto it = r.find(key);
  if (it == r.end()) violation("result " + std::to_string(i) + " lacks " + key, payload);
  if (it->is_null()) return std::nullopt;
  if (!it->is_string()) violation("result " + std::to_string(i) + " field " + key + " is not a string", payload);
  return it->get<std::string>();
}

}  // namespace

std::vector<TestOutcome> decode_result(std::string_view payload, std::size_t expected_tests) {
  const json j = json::parse(payload, nullptr, false);
  if (j.is_discarded()) violation("output is not a single JSON document", payload);
  if (!j.is_object()) violation("result is not an object", payload);
  if (!j.contains("protocol") || j["protocol"] != kVersion) violation("protocol field is not \"v1\"", payload);
  if (!j.contains("results") || !j["results"].is_array()) violation("results is not an array", payload);
  const json& results = j["results"];
  if (results.size() != expected_tests) {
    violation("expected " + std::to_string(expected_tests) + " results, got " + std::to_string(results.size()),
              payload);
  }

  std::vector<TestOutcome> out;
  out.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const json& r = results[i];
    if (!r.is_object()) violation("result " + std::to_string(i) + " is not an object", payload);
    TestOutcome o;
    if (!r.contains("test_index") || !r["test_index"].is_number_unsigned() || r["test_index"].get<std::size_t>() != i) {
      violation("result " + std::to_string(i) + " has wrong test_index", payload);
    }
    o.test_index = i;
    if (!r.contains("status") || !r["status"].is_string()) violation("result " + std::to_string(i) + " lacks status", payload);
    const auto status = status_from_string(r["status"].get<std::string>());
    if (!status) violation("result " + std::to_string(i) + " has unknown status " + r["status"].dump(), payload);
    o.status = *status;
    o.exception_type = nullable_string(r, "exception_type", i, payload);
    o.message = nullable_string(r, "message", i, payload);
    o.traceback = nullable_string(r, "traceback", i, payload);
    if (!r.contains("duration_ms") || !r["duration_ms"].is_number_integer() || r["duration_ms"].get<std::int64_t>() < 0) {
      violation("result " + std::to_string(i) + " has invalid duration_ms", payload);
    }
    o.duration_ms = r["duration_ms"].get<std::int64_t>();

    if (o.status == TestStatus::kPass && (o.exception_type || o.message)) {
      violation("passing result " + std::to_string(i) + " carries exception fields", payload);
    }
    if (o.status != TestStatus::kPass && !o.exception_type && !o.message) {
      violation("failing result " + std::to_string(i) + " has neither exception_type nor message", payload);
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace tdrepair::harness::protocol
