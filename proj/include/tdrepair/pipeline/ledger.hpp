#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdrepair/agents/agents.hpp"
#include "tdrepair/harness/report.hpp"

namespace tdrepair::pipeline {

// Ledger record types, one JSON object per line:
//   attempt      {instance_id, stage, program, report}
//   infra_error  {instance_id, stage, kind, message}
//   recheck      {instance_id, stage, report}   suite re-run before repair
//   stage1_done  {instance_id, final_status}
//   stage2_done  {instance_id, final_status}
//   reset        {instance_id, scope: "all" | "stage2", reason}
inline constexpr const char* kAttempt = "attempt";
inline constexpr const char* kInfraError = "infra_error";
inline constexpr const char* kRecheck = "recheck";
inline constexpr const char* kStage1Done = "stage1_done";
inline constexpr const char* kStage2Done = "stage2_done";
inline constexpr const char* kReset = "reset";

// Append-only, line-delimited sink shared by all workers. Every append is
// flushed before it returns.
class Ledger {
 public:
  explicit Ledger(const std::filesystem::path& path);  // throws IoError

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

struct Attempt {
  agents::CandidateProgram program;
  harness::ExecutionReport report;

  bool operator==(const Attempt&) const = default;
};

// What the ledger says about one instance, after resets are applied.
struct InstanceHistory {
  std::vector<Attempt> attempts;
  bool stage1_done = false;
  bool stage2_done = false;
  std::string stage1_infra_error;
  std::string stage2_infra_error;
  std::size_t rechecks = 0;
};

struct LedgerScan {
  std::map<std::string, InstanceHistory> instances;
  std::vector<std::string> corrupt_instances;  // restarted from scratch
  std::size_t records = 0;
  std::size_t unreadable_lines = 0;            // no instance id recoverable
};

// Folds a ledger file. Missing file = empty scan. A record that cannot be
// interpreted discards everything known about its instance.
LedgerScan scan_ledger(const std::filesystem::path& path);

}  // namespace tdrepair::pipeline
