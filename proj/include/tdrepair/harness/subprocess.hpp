#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace tdrepair::harness {

struct SpawnOptions {
  std::filesystem::path executable;
  std::vector<std::string> args;
  std::filesystem::path workdir;   // must exist; becomes cwd, HOME and TMPDIR
  std::string stdin_data;
  std::chrono::milliseconds deadline{60000};
  std::size_t memory_limit_mib = 512;
  std::size_t output_cap = 16u << 20;  // per stream; excess is discarded
  bool isolate_network = true;         // best effort, needs user namespaces
};

struct SpawnResult {
  int exit_code = -1;       // valid when !signaled
  int term_signal = 0;      // valid when signaled
  bool signaled = false;
  bool deadline_hit = false;  // killed by us
  bool stdout_truncated = false;
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};
};

// Runs one confined child process to completion or deadline. The child gets
// its own process group, a scrubbed environment, and rlimits on address
// space, CPU, file size, open files and core dumps. The whole group is
// SIGKILLed on deadline. Throws InfrastructureError(kSpawnFailure) when the
// executable cannot be started.
SpawnResult run_confined(const SpawnOptions& opts);

// Looks up a bare command name on PATH; returns the input if it already
// contains a slash or nothing matches.
std::filesystem::path resolve_executable(const std::string& name);

}  // namespace tdrepair::harness
