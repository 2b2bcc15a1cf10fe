#include "tdrepair/harness/executor.hpp"

#include <signal.h>
#include <stdlib.h>
#include <string.h>

#include <algorithm>
#include <optional>
#include <system_error>

#include "tdrepair/errors.hpp"
#include "tdrepair/harness/protocol.hpp"
#include "tdrepair/harness/subprocess.hpp"

namespace tdrepair::harness {
namespace {

using std::chrono::milliseconds;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kStderrTail = 2000;

class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& root) {
    const auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    std::string tmpl = (base / "run-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) {
      throw InfrastructureError(InfrastructureError::Kind::kSpawnFailure,
                                "cannot create workdir under " + base.string() + ": " + ::strerror(errno));
    }
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string signal_name(int sig) {
  const char* abbrev = ::sigabbrev_np(sig);
  return abbrev ? std::string("SIG") + abbrev : "signal " + std::to_string(sig);
}

std::string tail(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

TestOutcome timeout_outcome(std::size_t index, milliseconds per_test, std::int64_t elapsed_ms) {
  TestOutcome o;
  o.test_index = index;
  o.status = TestStatus::kTimeout;
  o.message = "test exceeded the per-test timeout of " + std::to_string(per_test.count()) + " ms";
  o.duration_ms = elapsed_ms;
  return o;
}

TestOutcome budget_outcome(std::size_t index, milliseconds total) {
  TestOutcome o;
  o.test_index = index;
  o.status = TestStatus::kTimeout;
  o.message = "suite time budget of " + std::to_string(total.count()) + " ms exhausted before this test ran";
  return o;
}

TestOutcome signal_outcome(std::size_t index, int sig, std::int64_t elapsed_ms) {
  TestOutcome o;
  o.test_index = index;
  o.status = TestStatus::kRuntimeError;
  o.exception_type = signal_name(sig);
  o.message = "runner process terminated by " + signal_name(sig);
  o.duration_ms = elapsed_ms;
  return o;
}

// The runner's own alarm is only a second line of defence.
void enforce_per_test(TestOutcome& o, milliseconds per_test) {
  if (o.status != TestStatus::kTimeout && o.duration_ms > per_test.count()) {
    o = timeout_outcome(o.test_index, per_test, o.duration_ms);
  }
}

}  // namespace

Executor::Executor(std::string runner, std::shared_ptr<ProcessSlots> slots)
    : runner_(resolve_executable(runner)), slots_(std::move(slots)) {}

ExecutionReport Executor::run_tests(const std::string& program, const std::vector<std::string>& suite,
                                    const ExecutionLimits& limits) const {
  limits.validate();
  if (suite.empty()) throw ContractViolation("run_tests called with an empty suite");

  const auto start = Clock::now();
  auto spawn = [&](std::vector<std::string> tests, milliseconds deadline) {
    const protocol::Job job{program, std::move(tests), limits.per_test_timeout.count()};
    ScratchDir scratch(limits.workdir);
    SpawnOptions opts;
    opts.executable = runner_;
    opts.workdir = scratch.path();
    opts.stdin_data = protocol::encode_job(job).dump();
    opts.deadline = deadline;
    opts.memory_limit_mib = limits.memory_limit_mib;
    std::optional<ProcessSlots::Lease> lease;
    if (slots_) lease.emplace(*slots_);
    return run_confined(opts);
  };
  auto check_exit = [&](const SpawnResult& r) {
    if (r.exit_code != 0) {
      throw InfrastructureError(InfrastructureError::Kind::kRunnerFailure,
                                "runner exited with status " + std::to_string(r.exit_code) + ": " +
                                    tail(r.err, kStderrTail),
                                r.out);
    }
    if (r.stdout_truncated) {
      throw InfrastructureError(InfrastructureError::Kind::kProtocolViolation, "runner output exceeded the size cap",
                                r.out);
    }
  };

  const std::size_t n = suite.size();
  const milliseconds batch_budget =
      std::min(limits.total_timeout, limits.per_test_timeout * static_cast<long>(n) + kStartupGrace);
  const SpawnResult batch = spawn(suite, batch_budget);
  ExecutionReport report;
  if (!batch.signaled) {
    check_exit(batch);
    report.outcomes = protocol::decode_result(batch.out, n);
    for (auto& o : report.outcomes) enforce_per_test(o, limits.per_test_timeout);
    return report;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto used = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    const milliseconds remaining = limits.total_timeout - used;
    if (remaining.count() <= 0) {
      report.outcomes.push_back(budget_outcome(i, limits.total_timeout));
      continue;
    }
    const SpawnResult r = spawn({suite[i]}, std::min(limits.per_test_timeout + kStartupGrace, remaining));
    if (r.deadline_hit) {
      report.outcomes.push_back(timeout_outcome(i, limits.per_test_timeout, r.elapsed.count()));
    } else if (r.signaled) {
      report.outcomes.push_back(signal_outcome(i, r.term_signal, r.elapsed.count()));
    } else {
      check_exit(r);
      TestOutcome o = protocol::decode_result(r.out, 1).front();
      o.test_index = i;
      enforce_per_test(o, limits.per_test_timeout);
      report.outcomes.push_back(std::move(o));
    }
  }
  return report;
}

}  // namespace tdrepair::harness
