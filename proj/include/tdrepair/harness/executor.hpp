#pragma once

#include <filesystem>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "tdrepair/harness/report.hpp"

namespace tdrepair::harness {

// Global cap on concurrently running runner processes.
class ProcessSlots {
 public:
  explicit ProcessSlots(std::ptrdiff_t slots) : sem_(slots) {}

  class Lease {
   public:
    explicit Lease(ProcessSlots& s) : s_(s) { s_.sem_.acquire(); }
    ~Lease() { s_.sem_.release(); }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;

   private:
    ProcessSlots& s_;
  };

 private:
  std::counting_semaphore<4096> sem_;
};

class Executor {
 public:
  // runner is a path or a bare name looked up on PATH.
  explicit Executor(std::string runner, std::shared_ptr<ProcessSlots> slots = nullptr);

  // Loads the program once per runner process and evaluates every test in
  // suite order. A runner that must be killed (or dies on a signal) triggers
  // a per-test rerun so the offending test can be pinned down.
  //
  // Throws InfrastructureError when the runner cannot be started, exits
  // nonzero or answers outside the protocol; ContractViolation for an empty
  // suite; ConfigError for invalid limits.
  ExecutionReport run_tests(const std::string& program, const std::vector<std::string>& suite,
                            const ExecutionLimits& limits) const;

  const std::filesystem::path& runner_path() const { return runner_; }

  // Extra wall-clock allowance per runner process for interpreter start-up.
  static constexpr std::chrono::milliseconds kStartupGrace{1000};

 private:
  std::filesystem::path runner_;
  std::shared_ptr<ProcessSlots> slots_;
};

}  // namespace tdrepair::harness
