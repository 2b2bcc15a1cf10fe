#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdrepair/agents/agents.hpp"
#include "tdrepair/dataset/types.hpp"
#include "tdrepair/harness/executor.hpp"
#include "tdrepair/harness/trace.hpp"
#include "tdrepair/pipeline/ledger.hpp"

namespace tdrepair::pipeline {

enum class FinalStatus { kPassed, kFailed };

const char* to_string(FinalStatus s);

struct PipelineRecord {
  std::string instance_id;
  std::vector<Attempt> attempts;
  FinalStatus final_status = FinalStatus::kFailed;
  bool stage2_invoked = false;
  std::string infra_error;  // nonempty when a backend or runner failure cut the instance short
  bool stage1_complete = false;
  bool stage2_complete = false;

  // Last attempt's program; null when no program was ever produced.
  const agents::CandidateProgram* final_program() const;
  // "none", "stage1" or "stage2".
  std::string stage_reached() const;
  bool has_infra_error() const { return !infra_error.empty(); }

  bool operator==(const PipelineRecord&) const = default;
};

// Row of results.jsonl.
nlohmann::json record_to_json(const PipelineRecord& r);

struct RunConfig {
  int max_stage1_attempts = 2;
  int max_repair_rounds = 1;
  harness::ExecutionLimits limits;
  std::size_t trace_budget = harness::kDefaultTraceBudget;
  agents::AgentSettings agents;
  int worker_count = 1;
  std::filesystem::path run_dir;

  void validate() const;  // throws ConfigError
};

nlohmann::json config_to_json(const RunConfig& c);

struct AgentBackends {
  std::shared_ptr<agents::Backend> coder;
  std::shared_ptr<agents::Backend> debugger;

  static AgentBackends shared(std::shared_ptr<agents::Backend> b) { return {b, b}; }
};

// Per-instance state machine. Every attempt is in the ledger before the
// next one starts.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, AgentBackends backends, const harness::Executor& executor, Ledger& ledger);

  // Generate, test, and regenerate with the failure notice while attempts
  // remain. Backend or runner failures end the stage with infra_error set.
  PipelineRecord run_stage1(const dataset::TaskInstance& instance) const;

  // Re-runs the suite on the failed program, distills the trace, asks the
  // debugger once per round and tests the result. Throws ContractViolation
  // for a record that passed or has no program.
  PipelineRecord run_stage2(const dataset::TaskInstance& instance, PipelineRecord record) const;

  const RunConfig& config() const { return cfg_; }

 private:
  harness::ExecutionReport test(const agents::CandidateProgram& p, const dataset::TaskInstance& instance) const;

  RunConfig cfg_;
  AgentBackends backends_;
  const harness::Executor& executor_;
  Ledger& ledger_;
};

// Whether a Stage-1 record is handed to the debugger.
bool needs_stage2(const PipelineRecord& r);

// Rebuilds records from a ledger scan, in corpus order. Instances the ledger
// knows nothing about come back with no attempts.
std::vector<PipelineRecord> records_from_scan(const std::vector<dataset::TaskInstance>& corpus,
                                              const LedgerScan& scan);

enum class StageSelection { kStage1, kStage2, kBoth };

struct RunStats {
  std::size_t stage1_run = 0;   // instances that went through Stage 1 this call
  std::size_t stage2_run = 0;
  std::size_t skipped = 0;      // already complete in the ledger
  std::size_t restarted = 0;    // corrupt or partial history discarded
  std::size_t infra_errors = 0;
  bool interrupted = false;
};

struct RunResult {
  std::vector<PipelineRecord> records;  // corpus order
  RunStats stats;
};

// File names inside a run directory.
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kLedgerFile = "ledger.jsonl";
inline constexpr const char* kCallsFile = "calls.jsonl";
inline constexpr const char* kResultsFile = "results.jsonl";
inline constexpr const char* kSummaryFile = "summary.json";

// Drives the selected stages over the corpus with cfg.worker_count workers,
// resuming from whatever cfg.run_dir/ledger.jsonl already holds. Instances
// already past a stage are skipped; partial ones restart at their last stage
// boundary. Polling `stop` between steps ends the run early with the ledger
// intact. Writes results.jsonl in corpus order when done.
RunResult run_pipeline(const std::vector<dataset::TaskInstance>& corpus, const RunConfig& cfg,
                       const AgentBackends& backends, const harness::Executor& executor,
                       StageSelection stages = StageSelection::kBoth, const std::atomic<bool>* stop = nullptr);

void write_results(const std::filesystem::path& path, const std::vector<PipelineRecord>& records);

}  // namespace tdrepair::pipeline
