#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tdrepair/harness/report.hpp"

namespace tdrepair::harness::protocol {

inline constexpr std::string_view kVersion = "v1";

struct Job {
  std::string program;
  std::vector<std::string> tests;
  std::int64_t per_test_timeout_ms = 0;
};

nlohmann::json encode_job(const Job& job);

// Strict decoding of a job object. Throws std::invalid_argument.
Job decode_job(std::string_view payload);

nlohmann::json encode_result(const std::vector<TestOutcome>& outcomes);

// Strict decoding of a runner's stdout. Exactly one object, protocol "v1",
// one result per test in order, known statuses, and outcome fields
// consistent with the status. Throws InfrastructureError
// (kProtocolViolation) carrying the raw payload.
std::vector<TestOutcome> decode_result(std::string_view payload, std::size_t expected_tests);

}  // namespace tdrepair::harness::protocol
