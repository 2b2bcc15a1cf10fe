#include "tdrepair/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <ostream>

#include "tdrepair/agents/agents.hpp"
#include "tdrepair/dataset/augment.hpp"
#include "tdrepair/errors.hpp"
#include "tdrepair/eval/eval.hpp"

namespace tdrepair::cli {

namespace fs = std::filesystem;
using pipeline::StageSelection;

namespace {

std::shared_ptr<agents::Backend> make_backend(const CliConfig& c, const agents::BackendConfig& bc) {
  auto b = agents::make_backend(bc, c.mock_script);
  if (c.rate_limit_rps > 0) b->set_rate_limiter(std::make_shared<agents::RateLimiter>(c.rate_limit_rps, c.rate_limit_rps));
  return b;
}

harness::Executor make_executor(const CliConfig& c) {
  const int slots = c.process_slots > 0 ? c.process_slots : c.run.worker_count;
  return harness::Executor(c.runner_path.string(), std::make_shared<harness::ProcessSlots>(slots));
}

std::vector<dataset::TaskInstance> load_corpus(const CliConfig& c, bool allow_augment) {
  if (c.corpus.empty()) throw ConfigError("no corpus given (--corpus)");
  auto corpus = dataset::load_instances(c.corpus, c.schema);
  spdlog::info("loaded {} instance(s) from {}", corpus.size(), c.corpus.string());
  if (!allow_augment || c.no_augment || c.external_tests.empty()) return corpus;

  dataset::LoadReport report;
  const auto ext = dataset::load_external_tests(c.external_tests, &report);
  spdlog::info("external tests: {}", report.to_json().dump());
  dataset::AugmentStats stats;
  corpus = dataset::augment(corpus, ext, &stats);
  spdlog::info("augmentation: {}", stats.to_json().dump());
  return corpus;
}

std::vector<dataset::TaskInstance> snapshot_corpus(const fs::path& run_dir) {
  const fs::path p = run_dir / pipeline::kCorpusFile;
  if (run_dir.empty() || !fs::exists(p)) {
    throw EmptyCorpusError("run directory '" + run_dir.string() + "' holds no corpus snapshot");
  }
  return dataset::load_instances(p);
}

bool has_ledger(const fs::path& run_dir) {
  const fs::path p = run_dir / pipeline::kLedgerFile;
  return fs::exists(p) && fs::file_size(p) > 0;
}

void write_summary(const fs::path& path, const eval::EvaluationSummary& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << eval::summary_to_json(s).dump(2) << '\n';
}

std::vector<pipeline::PipelineRecord> ledger_records(const fs::path& run_dir,
                                                     const std::vector<dataset::TaskInstance>& corpus) {
  const auto scan = pipeline::scan_ledger(run_dir / pipeline::kLedgerFile);
  if (scan.instances.empty()) throw EmptyCorpusError("run directory '" + run_dir.string() + "' has an empty ledger");
  for (const auto& id : scan.corrupt_instances) spdlog::warn("ledger: corrupt record for {}", id);
  return pipeline::records_from_scan(corpus, scan);
}

}  // namespace

int cmd_run(const CliConfig& c, std::ostream& out, StageSelection stages, const std::atomic<bool>* stop) {
  validate(c);
  const fs::path run_dir = c.run.run_dir;
  if (run_dir.empty()) throw ConfigError("no run directory given (--run-dir)");

  std::vector<dataset::TaskInstance> corpus;
  if (stages == StageSelection::kStage2) {
    if (!has_ledger(run_dir)) throw ConfigError("stage2 needs a run directory with a Stage-1 ledger");
    corpus = snapshot_corpus(run_dir);
  } else if (has_ledger(run_dir)) {
    if (!c.resume) {
      throw ConfigError("run directory '" + run_dir.string() + "' already holds a ledger; pass --resume to continue it");
    }
    if (!c.corpus.empty()) spdlog::warn("resuming: using the corpus snapshot in the run directory, not --corpus");
    corpus = snapshot_corpus(run_dir);
  } else {
    corpus = load_corpus(c, true);
  }

  // Backends are built (and credentials checked) before any call goes out.
  auto coder = make_backend(c, c.run.agents.coder);
  const pipeline::AgentBackends backends{coder, coder};
  const harness::Executor executor = make_executor(c);

  const auto result = pipeline::run_pipeline(corpus, c.run, backends, executor, stages, stop);
  const auto summary = eval::pass_at_1(result.records);
  write_summary(run_dir / pipeline::kSummaryFile, summary);
  eval::emit_report(summary, result.records, eval::ReportFormat::kTable, out);
  out << "run directory: " << run_dir.string() << '\n';
  spdlog::info("stage1 ran {}, stage2 ran {}, skipped {}, restarted {}, infrastructure errors {}",
               result.stats.stage1_run, result.stats.stage2_run, result.stats.skipped, result.stats.restarted,
               result.stats.infra_errors);

  if (result.stats.interrupted) {
    spdlog::warn("interrupted; continue with --resume");
    return kExitInterrupted;
  }
  if (result.stats.infra_errors == result.records.size()) {
    spdlog::error("every instance ended with an infrastructure error");
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_testgen(const CliConfig& c, std::ostream& out) {
  validate(c);
  if (c.output.empty()) throw ConfigError("testgen needs --output for the augmented corpus");
  auto corpus = load_corpus(c, false);
  auto backend = make_backend(c, c.run.agents.testgen);

  std::size_t returned = 0, valid = 0, retained = 0, failed_calls = 0, at_least_three = 0;
  for (auto& inst : corpus) {
    const dataset::TestCase sample = inst.tests[0];
    try {
      const auto r = agents::generate_unit_tests(inst, sample, c.num_tests, *backend, c.run.agents.testgen);
      returned += r.returned;
      valid += r.valid;
      for (const auto& tc : r.retained) retained += inst.tests.add(tc) ? 1 : 0;
    } catch (const TestgenFormatError& e) {
      ++failed_calls;
      spdlog::warn("{}: {}", inst.id, e.what());
    } catch (const BackendError& e) {
      ++failed_calls;
      spdlog::warn("{}: backend error: {}", inst.id, e.what());
    } catch (const EmptyGenerationError& e) {
      ++failed_calls;
      spdlog::warn("{}: {}", inst.id, e.what());
    }
    if (inst.tests.size() >= 3) ++at_least_three;
  }
  dataset::save_instances(c.output, corpus);

  const std::size_t requested = corpus.size() * static_cast<std::size_t>(c.num_tests);
  out << "instances:         " << corpus.size() << '\n'
      << "requested:         " << requested << '\n'
      << "returned:          " << returned << '\n'
      << "valid:             " << valid << '\n'
      << "retained:          " << retained << '\n'
      << "failed calls:      " << failed_calls << '\n'
      << "with >= 3 tests:   " << at_least_three << " of " << corpus.size() << '\n'
      << "written to:        " << c.output.string() << '\n';
  if (retained == 0) spdlog::warn("no generated test was retained; the corpus is unchanged");
  return kExitOk;
}

int cmd_augment(const CliConfig& c, std::ostream& out) {
  if (c.output.empty()) throw ConfigError("augment needs --output for the augmented corpus");
  if (c.external_tests.empty()) throw ConfigError("augment needs --external-tests");
  if (c.corpus.empty()) throw ConfigError("no corpus given (--corpus)");
  const auto corpus = dataset::load_instances(c.corpus, c.schema);
  dataset::LoadReport report;
  const auto ext = dataset::load_external_tests(c.external_tests, &report);
  dataset::AugmentStats stats;
  const auto augmented = dataset::augment(corpus, ext, &stats);
  dataset::save_instances(c.output, augmented);
  out << nlohmann::json{{"load_report", report.to_json()}, {"augment", stats.to_json()}}.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const CliConfig& c, std::ostream& out) {
  c.run.limits.validate();
  const fs::path run_dir = c.run.run_dir;
  const auto corpus = snapshot_corpus(run_dir);
  const auto records = ledger_records(run_dir, corpus);
  const harness::Executor executor = make_executor(c);
  const auto rc = eval::recount(corpus, records, executor, c.run.limits);

  eval::emit_report(rc.recorded, records, eval::ReportFormat::kTable, out);
  out << "recount: " << rc.recounted_passed << " of " << records.size() << " pass ("
      << eval::format_percent(rc.recounted_passed, records.size()) << ")\n";

  bool consistent = rc.consistent();
  const fs::path summary_path = run_dir / pipeline::kSummaryFile;
  if (fs::exists(summary_path)) {
    std::ifstream in(summary_path, std::ios::binary);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      out << "MISMATCH summary.json is not valid JSON\n";
      consistent = false;
    } else if (eval::summary_from_json(j) != rc.recorded) {
      out << "MISMATCH summary.json disagrees with the ledger: " << j.dump() << " vs "
          << eval::summary_to_json(rc.recorded).dump() << '\n';
      consistent = false;
    }
  }
  for (const auto& m : rc.mismatches) {
    out << "MISMATCH " << m.instance_id << ": ledger says " << (m.recorded_passed ? "passed" : "failed")
        << ", recount says " << (m.recounted_passed ? "passed" : "failed");
    if (!m.detail.empty()) out << " (" << m.detail << ")";
    out << '\n';
  }
  out << (consistent ? "consistent\n" : "inconsistent\n");
  return consistent ? kExitOk : kExitFailure;
}

int cmd_report(const CliConfig& c, std::ostream& out) {
  const fs::path run_dir = c.run.run_dir;
  const auto corpus = snapshot_corpus(run_dir);
  const auto records = ledger_records(run_dir, corpus);
  const auto summary = eval::pass_at_1(records);
  const auto format = eval::report_format_from_string(c.format);
  if (c.output.empty()) {
    eval::emit_report(summary, records, format, out);
  } else {
    eval::emit_report(summary, records, format, c.output);
    out << "report written to " << c.output.string() << '\n';
  }
  return kExitOk;
}

int run_command(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const CredentialError& e) {
    err << "credential error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "corpus error: " << e.what() << '\n';
    return kExitData;
  } catch (const EmptyCorpusError& e) {
    err << "empty corpus: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace tdrepair::cli
