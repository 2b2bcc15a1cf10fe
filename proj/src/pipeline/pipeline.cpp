#include "tdrepair/pipeline/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

#include "tdrepair/dataset/corpus.hpp"
#include "tdrepair/errors.hpp"

namespace tdrepair::pipeline {

namespace fs = std::filesystem;
using agents::CandidateProgram;
using agents::ProgramStatus;
using dataset::TaskInstance;

const char* to_string(FinalStatus s) { return s == FinalStatus::kPassed ? "passed" : "failed"; }

const CandidateProgram* PipelineRecord::final_program() const {
  return attempts.empty() ? nullptr : &attempts.back().program;
}

std::string PipelineRecord::stage_reached() const {
  if (stage2_invoked) return "stage2";
  if (!attempts.empty() || stage1_complete) return "stage1";
  return "none";
}

nlohmann::json record_to_json(const PipelineRecord& r) {
  const CandidateProgram* p = r.final_program();
  nlohmann::json j = {{"id", r.instance_id},
                      {"final_status", to_string(r.final_status)},
                      {"stage_reached", r.stage_reached()},
                      {"final_stage", p ? nlohmann::json(p->stage) : nlohmann::json(nullptr)},
                      {"final_source", p ? nlohmann::json(p->source) : nlohmann::json(nullptr)},
                      {"attempts", r.attempts.size()},
                      {"stage2_invoked", r.stage2_invoked},
                      {"infra_error", r.has_infra_error() ? nlohmann::json(r.infra_error) : nlohmann::json(nullptr)}};
  return j;
}

void RunConfig::validate() const {
  if (max_stage1_attempts < 1) throw ConfigError("max_stage1_attempts must be >= 1");
  if (max_repair_rounds < 1) throw ConfigError("max_repair_rounds must be >= 1");
  if (worker_count < 1) throw ConfigError("worker_count must be >= 1");
  if (trace_budget < harness::kMinTraceBudget) {
    throw ConfigError("trace_budget must be >= " + std::to_string(harness::kMinTraceBudget));
  }
  limits.validate();
  agents.coder.validate();
  agents.debugger.validate();
  agents.testgen.validate();
}

namespace {

nlohmann::json backend_to_json(const agents::BackendConfig& b) {
  return {{"provider", b.provider_id},
          {"model", b.model_id},
          {"reasoning_effort", agents::to_string(b.reasoning_effort)},
          {"temperature", b.temperature ? nlohmann::json(*b.temperature) : nlohmann::json(nullptr)},
          {"max_retries", b.max_retries},
          {"request_timeout_ms", b.request_timeout.count()}};
}

}  // namespace

nlohmann::json config_to_json(const RunConfig& c) {
  return {{"max_stage1_attempts", c.max_stage1_attempts},
          {"max_repair_rounds", c.max_repair_rounds},
          {"per_test_timeout_ms", c.limits.per_test_timeout.count()},
          {"total_timeout_ms", c.limits.total_timeout.count()},
          {"memory_limit_mib", c.limits.memory_limit_mib},
          {"trace_budget", c.trace_budget},
          {"failing_tests_only", c.agents.failing_tests_only},
          {"workers", c.worker_count},
          {"coder", backend_to_json(c.agents.coder)},
          {"debugger", backend_to_json(c.agents.debugger)},
          {"testgen", backend_to_json(c.agents.testgen)}};
}

Pipeline::Pipeline(RunConfig cfg, AgentBackends backends, const harness::Executor& executor, Ledger& ledger)
    : cfg_(std::move(cfg)), backends_(std::move(backends)), executor_(executor), ledger_(ledger) {
  cfg_.validate();
  if (!backends_.coder || !backends_.debugger) throw ConfigError("pipeline needs coder and debugger backends");
}

harness::ExecutionReport Pipeline::test(const CandidateProgram& p, const TaskInstance& instance) const {
  return executor_.run_tests(p.source, instance.tests.sources(), cfg_.limits);
}

namespace {

nlohmann::json attempt_record(const Attempt& a) {
  return {{"type", kAttempt},
          {"instance_id", a.program.instance_id},
          {"stage", a.program.stage},
          {"program", agents::program_to_json(a.program)},
          {"report", harness::report_to_json(a.report)}};
}

nlohmann::json infra_record(const std::string& id, const std::string& stage, const char* kind,
                            const std::string& message) {
  return {{"type", kInfraError}, {"instance_id", id}, {"stage", stage}, {"kind", kind}, {"message", message}};
}

}  // namespace

PipelineRecord Pipeline::run_stage1(const TaskInstance& instance) const {
  PipelineRecord rec;
  rec.instance_id = instance.id;
  for (int k = 1; k <= cfg_.max_stage1_attempts; ++k) {
    const std::string stage = agents::stage1_tag(k);
    auto fail = [&](const char* kind, const std::string& msg) {
      rec.infra_error = std::string(kind) + ": " + msg;
      ledger_.append(infra_record(instance.id, stage, kind, msg));
    };
    CandidateProgram program;
    try {
      program = agents::generate_code(instance,
                                      k == 1 ? agents::StatusFlag::kFirstAttempt : agents::StatusFlag::kPreviousFailed,
                                      *backends_.coder, cfg_.agents.coder, k);
    } catch (const BackendError& e) {
      fail("backend", e.what());
      break;
    } catch (const EmptyGenerationError& e) {
      fail("empty_generation", e.what());
      break;
    }
    harness::ExecutionReport report;
    try {
      report = test(program, instance);
    } catch (const InfrastructureError& e) {
      fail("runner", e.what());
      break;
    }
    program.mark(report.passed());
    Attempt a{std::move(program), std::move(report)};
    ledger_.append(attempt_record(a));
    rec.attempts.push_back(std::move(a));
    if (rec.attempts.back().report.passed()) break;
  }
  rec.final_status = !rec.attempts.empty() && rec.attempts.back().program.status == ProgramStatus::kPassed
                         ? FinalStatus::kPassed
                         : FinalStatus::kFailed;
  rec.stage1_complete = true;
  ledger_.append({{"type", kStage1Done}, {"instance_id", instance.id}, {"final_status", to_string(rec.final_status)}});
  return rec;
}

bool needs_stage2(const PipelineRecord& r) {
  return r.stage1_complete && !r.stage2_complete && r.final_status == FinalStatus::kFailed &&
         r.final_program() != nullptr;
}

PipelineRecord Pipeline::run_stage2(const TaskInstance& instance, PipelineRecord rec) const {
  if (rec.instance_id != instance.id) throw ContractViolation("record and instance ids differ");
  if (!needs_stage2(rec)) {
    throw ContractViolation("instance " + rec.instance_id + " is not a failed Stage-1 record with a program");
  }
  rec.stage2_invoked = true;
  rec.infra_error.clear();

  CandidateProgram current = *rec.final_program();
  harness::ExecutionReport report = rec.attempts.back().report;
  const std::string stage = agents::stage2_tag(1);
  auto fail = [&](const std::string& at, const char* kind, const std::string& msg) {
    rec.infra_error = std::string(kind) + ": " + msg;
    ledger_.append(infra_record(instance.id, at, kind, msg));
  };

  bool ok = true;
  try {
    harness::ExecutionReport recheck = test(current, instance);
    ledger_.append({{"type", kRecheck},
                    {"instance_id", instance.id},
                    {"stage", stage},
                    {"report", harness::report_to_json(recheck)}});
    if (recheck.passed()) {
      spdlog::warn("{}: failed program passed on re-execution; keeping the Stage-1 trace", instance.id);
    } else {
      report = std::move(recheck);
    }
  } catch (const InfrastructureError& e) {
    fail(stage, "runner", e.what());
    ok = false;
  }

  for (int round = 1; ok && round <= cfg_.max_repair_rounds; ++round) {
    const std::string at = agents::stage2_tag(round);
    const harness::DistilledTrace trace = harness::distill_trace(report, instance.tests.sources(), cfg_.trace_budget);
    CandidateProgram fixed;
    try {
      fixed = agents::debug_code(instance, current, trace, *backends_.debugger, cfg_.agents.debugger,
                                 cfg_.agents.failing_tests_only, round);
    } catch (const BackendError& e) {
      fail(at, "backend", e.what());
      break;
    } catch (const EmptyGenerationError& e) {
      fail(at, "empty_generation", e.what());
      break;
    }
    try {
      report = test(fixed, instance);
    } catch (const InfrastructureError& e) {
      fail(at, "runner", e.what());
      break;
    }
    fixed.mark(report.passed());
    Attempt a{fixed, report};
    ledger_.append(attempt_record(a));
    rec.attempts.push_back(std::move(a));
    current = std::move(fixed);
    if (report.passed()) break;
  }
  rec.final_status =
      rec.attempts.back().program.status == ProgramStatus::kPassed ? FinalStatus::kPassed : FinalStatus::kFailed;
  rec.stage2_complete = true;
  ledger_.append({{"type", kStage2Done}, {"instance_id", instance.id}, {"final_status", to_string(rec.final_status)}});
  return rec;
}

std::vector<PipelineRecord> records_from_scan(const std::vector<TaskInstance>& corpus, const LedgerScan& scan) {
  std::vector<PipelineRecord> out;
  out.reserve(corpus.size());
  for (const auto& inst : corpus) {
    PipelineRecord r;
    r.instance_id = inst.id;
    if (const auto it = scan.instances.find(inst.id); it != scan.instances.end()) {
      const InstanceHistory& h = it->second;
      r.attempts = h.attempts;
      r.stage1_complete = h.stage1_done;
      r.stage2_complete = h.stage2_done;
      r.stage2_invoked = h.stage2_done || h.rechecks > 0 || !h.stage2_infra_error.empty() ||
                         std::any_of(h.attempts.begin(), h.attempts.end(),
                                     [](const Attempt& a) { return a.program.stage.rfind("stage2", 0) == 0; });
      r.infra_error = r.stage2_invoked ? h.stage2_infra_error : h.stage1_infra_error;
      if (!r.attempts.empty() && r.attempts.back().program.status == ProgramStatus::kPassed) {
        r.final_status = FinalStatus::kPassed;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_results(const fs::path& path, const std::vector<PipelineRecord>& records) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out.flush()) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

// Runs fn(i) for each task index on up to `workers` threads. Tasks not yet
// started when `stop` turns true are skipped.
template <typename Fn>
bool run_pool(const std::vector<std::size_t>& tasks, int workers, const std::atomic<bool>* stop, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stopped{false};
  auto work = [&] {
    for (;;) {
      if (stop && stop->load()) {
        stopped = true;
        return;
      }
      const std::size_t k = next++;
      if (k >= tasks.size()) return;
      fn(tasks[k]);
    }
  };
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(work);
  if (n > 0) work();
  for (auto& t : threads) t.join();
  return stopped || (stop && stop->load() && next < tasks.size());
}

}  // namespace

RunResult run_pipeline(const std::vector<TaskInstance>& corpus, const RunConfig& cfg, const AgentBackends& backends,
                       const harness::Executor& executor, StageSelection stages, const std::atomic<bool>* stop) {
  if (corpus.empty()) throw EmptyCorpusError("nothing to run: the corpus is empty");
  cfg.validate();
  if (cfg.run_dir.empty()) throw ConfigError("run directory not set");
  fs::create_directories(cfg.run_dir);

  if (!fs::exists(cfg.run_dir / kConfigFile)) {
    std::ofstream(cfg.run_dir / kConfigFile) << config_to_json(cfg).dump(2) << '\n';
  }
  if (!fs::exists(cfg.run_dir / kCorpusFile)) dataset::save_instances(cfg.run_dir / kCorpusFile, corpus);

  auto call_log = std::make_shared<agents::CallLog>(cfg.run_dir / kCallsFile);
  backends.coder->set_call_log(call_log);
  backends.debugger->set_call_log(call_log);

  const LedgerScan scan = scan_ledger(cfg.run_dir / kLedgerFile);
  Ledger ledger(cfg.run_dir / kLedgerFile);
  RunResult result;
  if (scan.unreadable_lines > 0) spdlog::warn("ledger: skipped {} unreadable line(s)", scan.unreadable_lines);
  for (const auto& id : scan.corrupt_instances) {
    spdlog::warn("ledger: corrupt record for {}; restarting it from scratch", id);
    ledger.append({{"type", kReset}, {"instance_id", id}, {"scope", "all"}, {"reason", "corrupt record"}});
    ++result.stats.restarted;
  }
  result.records = records_from_scan(corpus, scan);
  auto& records = result.records;

  Pipeline pipeline(cfg, backends, executor, ledger);
  std::vector<char> touched(corpus.size(), 0);
  std::atomic<std::size_t> stage1_run{0}, stage2_run{0};

  auto guarded = [&](std::size_t i, const char* stage, auto&& step) {
    try {
      records[i] = step();
    } catch (const std::exception& e) {
      // Anything unexpected stays confined to its instance.
      spdlog::error("{}: {} aborted: {}", corpus[i].id, stage, e.what());
      records[i].infra_error = std::string("internal: ") + e.what();
      ledger.append(infra_record(corpus[i].id, stage, "internal", e.what()));
    }
    touched[i] = 1;
  };

  if (stages != StageSelection::kStage2) {
    std::vector<std::size_t> tasks;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (records[i].stage1_complete) continue;
      if (scan.instances.count(corpus[i].id)) {
        ledger.append({{"type", kReset}, {"instance_id", corpus[i].id}, {"scope", "all"}, {"reason", "incomplete stage 1"}});
        ++result.stats.restarted;
      }
      records[i] = PipelineRecord{};
      records[i].instance_id = corpus[i].id;
      tasks.push_back(i);
    }
    result.stats.interrupted = run_pool(tasks, cfg.worker_count, stop, [&](std::size_t i) {
      guarded(i, "stage1", [&] { return pipeline.run_stage1(corpus[i]); });
      ++stage1_run;
    });
  }

  if (stages != StageSelection::kStage1 && !result.stats.interrupted) {
    std::vector<std::size_t> tasks;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      PipelineRecord& r = records[i];
      if (!r.stage1_complete && stages == StageSelection::kStage2) {
        spdlog::warn("{}: Stage 1 has not finished; skipping Stage 2", corpus[i].id);
        continue;
      }
      if (r.stage2_invoked && !r.stage2_complete) {
        ledger.append({{"type", kReset}, {"instance_id", r.instance_id}, {"scope", "stage2"}, {"reason", "incomplete stage 2"}});
        std::erase_if(r.attempts, [](const Attempt& a) { return a.program.stage.rfind("stage2", 0) == 0; });
        r.stage2_invoked = false;
        r.final_status = FinalStatus::kFailed;
        ++result.stats.restarted;
      }
      if (needs_stage2(r)) tasks.push_back(i);
    }
    // Run in a copy so the shared vector is only written through `guarded`.
    result.stats.interrupted |= run_pool(tasks, cfg.worker_count, stop, [&](std::size_t i) {
      PipelineRecord input = records[i];
      guarded(i, "stage2", [&] { return pipeline.run_stage2(corpus[i], std::move(input)); });
      ++stage2_run;
    });
  }

  result.stats.stage1_run = stage1_run;
  result.stats.stage2_run = stage2_run;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!touched[i] && records[i].stage1_complete) ++result.stats.skipped;
    if (records[i].has_infra_error() && records[i].final_status == FinalStatus::kFailed) ++result.stats.infra_errors;
  }
  if (result.stats.infra_errors > 0) {
    spdlog::warn("{} instance(s) ended with an infrastructure error (counted as failures)", result.stats.infra_errors);
  }
  write_results(cfg.run_dir / kResultsFile, records);
  return result;
}

}  // namespace tdrepair::pipeline
