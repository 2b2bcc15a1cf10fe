#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tdrepair/harness/report.hpp"

namespace tdrepair::harness {

inline constexpr std::size_t kDefaultTraceBudget = 4000;
inline constexpr std::size_t kMinTraceBudget = 128;
inline constexpr std::size_t kTracebackFrames = 3;

struct TraceEntry {
  std::size_t test_index = 0;
  std::string assert_source;
  TestStatus status = TestStatus::kRuntimeError;
  std::string exception_type;
  std::string message;
  std::string traceback_excerpt;

  bool operator==(const TraceEntry&) const = default;
};

// Budgeted digest of a failing run. `text` is what the debugger sees;
// total_chars is its size in bytes.
struct DistilledTrace {
  std::vector<TraceEntry> entries;            // rendered entries, suite order
  std::vector<std::size_t> failing_indices;   // every non-passing test
  std::string text;
  std::size_t total_chars = 0;
  bool truncated = false;

  bool operator==(const DistilledTrace&) const = default;
};

// Keeps the innermost `frames` frames of a Python-style traceback plus the
// closing exception lines.
std::string traceback_excerpt(std::string_view traceback, std::size_t frames = kTracebackFrames);

// Throws ContractViolation on a passing report, a size mismatch between
// report and suite, or a budget below kMinTraceBudget.
DistilledTrace distill_trace(const ExecutionReport& report, const std::vector<std::string>& suite,
                             std::size_t budget = kDefaultTraceBudget);

nlohmann::json trace_to_json(const DistilledTrace& t);

}  // namespace tdrepair::harness
