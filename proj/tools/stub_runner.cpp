// Scripted stand-in for the Python runner shim. Speaks protocol v1 but never
// executes anything; outcomes come from comment directives.
//
// In the program text:
//   # stub-status: <status>[:<ExceptionType>]   default outcome for every test
//   # stub-runner: crash|garbage|noisy|wrong-count|bad-version|hang|segv
// In a test:
//   # expect: <status>[:<ExceptionType>]        overrides the program default
//   # stub-hang                                 never answer while this test is in the job
//   # duration: <ms>                            reported duration_ms (nothing sleeps)
//
// Without directives every test passes.

#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>

#include "tdrepair/harness/protocol.hpp"

namespace {

using tdrepair::harness::TestOutcome;
using tdrepair::harness::TestStatus;
namespace protocol = tdrepair::harness::protocol;

std::optional<std::string> directive(const std::string& text, const std::string& key) {
  const auto pos = text.find("# " + key + ":");
  if (pos == std::string::npos) return std::nullopt;
  auto begin = text.find_first_not_of(' ', pos + key.size() + 3);
  if (begin == std::string::npos) return std::string();
  const auto end = text.find_first_of(" \t\r\n", begin);
  return text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

std::string default_type(TestStatus s) {
  switch (s) {
    case TestStatus::kAssertionFail: return "AssertionError";
    case TestStatus::kRuntimeError: return "RuntimeError";
    case TestStatus::kCollectError: return "SyntaxError";
    case TestStatus::kTimeout: return "TimeoutError";
    case TestStatus::kPass: break;
  }
  return "";
}

TestOutcome outcome_for(std::size_t index, const std::string& spec) {
  TestOutcome o;
  o.test_index = index;
  const auto colon = spec.find(':');
  const auto status = tdrepair::harness::status_from_string(spec.substr(0, colon));
  if (!status) {
    std::cerr << "stub: unknown status '" << spec << "'\n";
    std::exit(2);
  }
  o.status = *status;
  if (o.status == TestStatus::kPass) return o;
  const std::string type = colon == std::string::npos ? default_type(o.status) : spec.substr(colon + 1);
  o.exception_type = type;
  o.message = o.status == TestStatus::kTimeout ? "test exceeded the per-test timeout" : "scripted " + spec;
  o.traceback = "Traceback (most recent call last):\n"
                "  File \"<test>\", line 1, in <module>\n"
                "  File \"<candidate>\", line 2, in stub\n"
                "    raise " + type + "\n" + type + ": " + *o.message + "\n";
  return o;
}

}  // namespace

int main() {
  const std::string input((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
  protocol::Job job;
  try {
    job = protocol::decode_job(input);
  } catch (const std::exception& e) {
    std::cerr << "stub: malformed job: " << e.what() << "\n";
    return 2;
  }

  const std::string mode = directive(job.program, "stub-runner").value_or("");
  if (mode == "crash") {
    std::cerr << "stub: scripted crash\n";
    return 3;
  }
  if (mode == "garbage") {
    std::cout << "this is not a protocol object\n";
    return 0;
  }
  if (mode == "hang") {
    for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
  }
  if (mode == "segv") ::raise(SIGSEGV);
  for (const auto& t : job.tests) {
    if (t.find("# stub-hang") != std::string::npos) {
      for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    }
  }

  const std::string program_default = directive(job.program, "stub-status").value_or("pass");
  std::vector<TestOutcome> outcomes;
  for (std::size_t i = 0; i < job.tests.size(); ++i) {
    outcomes.push_back(outcome_for(i, directive(job.tests[i], "expect").value_or(program_default)));
    if (const auto d = directive(job.tests[i], "duration")) outcomes.back().duration_ms = std::stoll(*d);
  }
  if (mode == "wrong-count" && !outcomes.empty()) outcomes.pop_back();

  auto result = protocol::encode_result(outcomes);
  if (mode == "bad-version") result["protocol"] = "v0";
  if (mode == "noisy") std::cout << "debug output from candidate\n";
  std::cout << result.dump() << std::flush;
  return 0;
}
