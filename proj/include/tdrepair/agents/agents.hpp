#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tdrepair/agents/backend.hpp"
#include "tdrepair/agents/templates.hpp"
#include "tdrepair/dataset/types.hpp"
#include "tdrepair/harness/trace.hpp"

namespace tdrepair::agents {

inline constexpr std::string_view kCoderAgent = "coder";
inline constexpr std::string_view kDebuggerAgent = "debugger";
inline constexpr std::string_view kTestgenAgent = "testgen";

// Bound to {status} on every coder call after the first.
inline constexpr std::string_view kFailureNotice =
    "Your previous solution failed the unit tests. Generate a corrected implementation.";

enum class StatusFlag { kFirstAttempt, kPreviousFailed };

enum class ProgramStatus { kUntested, kPassed, kFailed };

const char* to_string(ProgramStatus s);
ProgramStatus program_status_from_string(std::string_view s);  // throws ConfigError

// "stage1_attempt<k>", "stage2" for the first repair round, "stage2_round<k>" after.
std::string stage1_tag(int attempt);
std::string stage2_tag(int round);

struct CandidateProgram {
  std::string instance_id;
  std::string source;
  std::string stage;
  ProgramStatus status = ProgramStatus::kUntested;

  // untested -> passed/failed only. Throws ContractViolation otherwise.
  void mark(bool passed);

  bool operator==(const CandidateProgram&) const = default;
};

nlohmann::json program_to_json(const CandidateProgram& p);
CandidateProgram program_from_json(const nlohmann::json& j);  // throws nlohmann::json::exception, ConfigError

// Per-agent backend settings.
struct AgentSettings {
  BackendConfig coder;
  BackendConfig debugger;
  BackendConfig testgen;
  bool failing_tests_only = false;  // debugger sees only the failing asserts

  AgentSettings();
};

Bindings coder_bindings(const dataset::TaskInstance& instance, StatusFlag flag);

// One coder call. attempt defaults to 1 for kFirstAttempt and 2 otherwise.
CandidateProgram generate_code(const dataset::TaskInstance& instance, StatusFlag flag, Backend& backend,
                               const BackendConfig& config, int attempt = 0);

// Suite rendering for {failing_tests}: one assert per line, failing ones
// suffixed with "  # FAILED" (or only the failing ones when failing_only).
std::string render_failing_tests(const std::vector<std::string>& suite, const std::vector<std::size_t>& failing,
                                 bool failing_only);

// Throws ContractViolation unless program.status is failed and the trace has
// at least one entry.
CandidateProgram debug_code(const dataset::TaskInstance& instance, const CandidateProgram& program,
                            const harness::DistilledTrace& trace, Backend& backend, const BackendConfig& config,
                            bool failing_only = false, int round = 1);

struct TestgenResult {
  std::size_t returned = 0;  // items in the model's list
  std::size_t valid = 0;     // single assert, allowed constructs, calls the target
  std::vector<dataset::TestCase> retained;  // valid and not already present
};

// Accepts a list literal of strings, or one assert per line. Throws
// TestgenFormatError when neither reading yields anything.
std::vector<std::string> parse_testgen_payload(std::string_view text);

TestgenResult generate_unit_tests(const dataset::TaskInstance& instance, const dataset::TestCase& sample_assert,
                                  int n, Backend& backend, const BackendConfig& config);

}  // namespace tdrepair::agents
