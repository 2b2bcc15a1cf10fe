#include <gtest/gtest.h>

#include <sstream>

#include "pipeline_fixture.hpp"
#include "temp_dir.hpp"
#include "tdrepair/errors.hpp"
#include "tdrepair/pipeline/ledger.hpp"
#include "tdrepair/pipeline/pipeline.hpp"

namespace tdrepair::pipeline {
namespace {

using agents::MockBackend;
using dataset::TaskInstance;
using test_support::TempDir;

const harness::Executor& stub() {
  static const harness::Executor exec(TDREPAIR_STUB_RUNNER);
  return exec;
}

std::shared_ptr<MockBackend> mock(const std::string& script) {
  std::istringstream in(script);
  return std::make_shared<MockBackend>(MockBackend::parse(in));
}

std::shared_ptr<MockBackend> mock_file(const std::string& name) {
  return std::make_shared<MockBackend>(MockBackend::load(test_support::pipeline_fixture(name)));
}

std::vector<TaskInstance> fixture_corpus() { return dataset::load_instances(test_support::pipeline_fixture("corpus.jsonl")); }

TaskInstance add_instance() {
  TaskInstance t;
  t.id = "a1";
  t.instruction = "যোগ";
  t.function_name = "add";
  t.arg_names = {"a", "b"};
  t.tests.add(dataset::TestCase::make("assert add(1, 2) == 3", dataset::Provenance::kProvided));
  return t;
}

constexpr const char* kGood = R"j("def add(a, b):\n    return a + b\n")j";
constexpr const char* kBad = R"j("def add(a, b):\n    return a - b\n# stub-status: assertion_fail\n")j";

std::string entry(const std::string& agent, int attempt, const char* response) {
  return R"j({"template_id": ")j" + agent + R"j(", "attempt": )j" + std::to_string(attempt) +
         R"j(, "response": )j" + response + "}\n";
}

struct Harness {
  TempDir dir;
  RunConfig cfg = test_support::scripted_config(dir.path());
  Ledger ledger{dir / "ledger.jsonl"};
};

// ---- stage 1 ----

TEST(Stage1, PassOnFirstAttempt) {
  Harness h;
  auto m = mock(entry("coder", 0, kGood));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  EXPECT_EQ(r.attempts.size(), 1u);
  EXPECT_EQ(r.final_status, FinalStatus::kPassed);
  EXPECT_EQ(r.final_program()->stage, "stage1_attempt1");
  EXPECT_FALSE(needs_stage2(r));
  EXPECT_EQ(m->call_count("coder"), 1u);
}

TEST(Stage1, FailThenPass) {
  Harness h;
  auto m = mock(entry("coder", 1, kBad) + entry("coder", 2, kGood));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  ASSERT_EQ(r.attempts.size(), 2u);
  EXPECT_EQ(r.attempts[0].program.status, agents::ProgramStatus::kFailed);
  EXPECT_EQ(r.final_status, FinalStatus::kPassed);
  EXPECT_EQ(m->call_count("coder"), 2u);
  EXPECT_NE(m->calls()[1].user_prompt.find(agents::kFailureNotice), std::string::npos);
  EXPECT_EQ(test_support::ledger_attempts(h.dir / "ledger.jsonl", "stage1"), 2u);
}

TEST(Stage1, FailFailEntersStage2Set) {
  Harness h;
  auto m = mock(entry("coder", 0, kBad));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  EXPECT_EQ(r.attempts.size(), 2u);
  EXPECT_EQ(r.final_status, FinalStatus::kFailed);
  EXPECT_TRUE(needs_stage2(r));
  EXPECT_EQ(r.final_program()->stage, "stage1_attempt2");
}

TEST(Stage1, MaxAttemptsHonoured) {
  Harness h;
  h.cfg.max_stage1_attempts = 1;
  auto m = mock(entry("coder", 0, kBad));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  EXPECT_EQ(p.run_stage1(add_instance()).attempts.size(), 1u);
  EXPECT_EQ(m->call_count("coder"), 1u);
}

TEST(Stage1, BackendErrorIsInfraStatus) {
  Harness h;
  auto m = mock(R"j({"template_id": "coder", "error": "transient"})j");
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  EXPECT_TRUE(r.attempts.empty());
  EXPECT_TRUE(r.has_infra_error());
  EXPECT_EQ(r.final_status, FinalStatus::kFailed);
  EXPECT_FALSE(needs_stage2(r));  // nothing to debug
  const auto recs = test_support::read_jsonl(h.dir / "ledger.jsonl");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0]["type"], "infra_error");
  EXPECT_EQ(recs[0]["kind"], "backend");
}

TEST(Stage1, BackendErrorAfterFailedProgramStillForwarded) {
  Harness h;
  auto m = mock(entry("coder", 1, kBad) + R"j({"template_id": "coder", "attempt": 2, "error": "auth"})j");
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  EXPECT_EQ(r.attempts.size(), 1u);
  EXPECT_TRUE(r.has_infra_error());
  EXPECT_TRUE(needs_stage2(r));
}

TEST(Stage1, RunnerFailureIsInfraStatus) {
  Harness h;
  auto m = mock(entry("coder", 0, R"j("x = 1\n# stub-runner: crash\n")j"));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage1(add_instance());
  EXPECT_TRUE(r.attempts.empty());
  EXPECT_NE(r.infra_error.find("runner"), std::string::npos);
}

// ---- stage 2 ----

TEST(Stage2, DebuggerFixes) {
  Harness h;
  auto m = mock(entry("coder", 0, kBad) + entry("debugger", 0, kGood));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage2(add_instance(), p.run_stage1(add_instance()));
  EXPECT_EQ(r.attempts.size(), 3u);
  EXPECT_EQ(r.final_status, FinalStatus::kPassed);
  EXPECT_EQ(r.final_program()->stage, "stage2");
  EXPECT_TRUE(r.stage2_invoked);
  EXPECT_EQ(m->call_count("debugger"), 1u);

  const auto& prompt = m->calls().back().user_prompt;
  EXPECT_NE(prompt.find("assert add(1, 2) == 3  # FAILED"), std::string::npos);
  EXPECT_NE(prompt.find("return a - b"), std::string::npos);
  EXPECT_NE(prompt.find("AssertionError"), std::string::npos);

  std::vector<std::string> types;
  for (const auto& rec : test_support::read_jsonl(h.dir / "ledger.jsonl")) types.push_back(rec["type"]);
  EXPECT_EQ(types, (std::vector<std::string>{"attempt", "attempt", "stage1_done", "recheck", "attempt",
                                             "stage2_done"}));
}

TEST(Stage2, StillFailingKeepsDebuggerOutput) {
  Harness h;
  auto m = mock(entry("coder", 0, kBad) +
                entry("debugger", 0, R"j("def add(a, b):\n    return a * b\n# stub-status: assertion_fail\n")j"));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage2(add_instance(), p.run_stage1(add_instance()));
  EXPECT_EQ(r.final_status, FinalStatus::kFailed);
  EXPECT_EQ(r.final_program()->stage, "stage2");
  EXPECT_NE(r.final_program()->source.find("a * b"), std::string::npos);
  EXPECT_EQ(m->call_count("debugger"), 1u);  // one repair round by default
}

TEST(Stage2, ExtraRoundsWhenConfigured) {
  Harness h;
  h.cfg.max_repair_rounds = 2;
  auto m = mock(entry("coder", 0, kBad) + entry("debugger", 1, kBad) + entry("debugger", 2, kGood));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage2(add_instance(), p.run_stage1(add_instance()));
  EXPECT_EQ(r.final_status, FinalStatus::kPassed);
  EXPECT_EQ(r.final_program()->stage, "stage2_round2");
  EXPECT_EQ(m->call_count("debugger"), 2u);
}

TEST(Stage2, PassedRecordIsContractViolation) {
  Harness h;
  auto m = mock(entry("coder", 0, kGood));
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto passed = p.run_stage1(add_instance());
  EXPECT_THROW(p.run_stage2(add_instance(), passed), ContractViolation);
  EXPECT_EQ(m->call_count("debugger"), 0u);
}

TEST(Stage2, BackendErrorLeavesStage1Program) {
  Harness h;
  auto m = mock(entry("coder", 0, kBad) + R"j({"template_id": "debugger", "error": "transient"})j");
  h.cfg.agents.debugger.max_retries = 0;
  Pipeline p(h.cfg, AgentBackends::shared(m), stub(), h.ledger);
  const auto r = p.run_stage2(add_instance(), p.run_stage1(add_instance()));
  EXPECT_EQ(r.final_status, FinalStatus::kFailed);
  EXPECT_EQ(r.final_program()->stage, "stage1_attempt2");
  EXPECT_TRUE(r.has_infra_error());
  EXPECT_TRUE(r.stage2_complete);
}

// ---- whole runs ----

TEST(RunPipeline, OracleAllPassNoDebugger) {
  TempDir dir;
  auto m = mock_file("mock_oracle.jsonl");
  const auto res = run_pipeline(fixture_corpus(), test_support::scripted_config(dir.path()),
                                AgentBackends::shared(m), stub());
  ASSERT_EQ(res.records.size(), 10u);
  for (const auto& r : res.records) EXPECT_EQ(r.final_status, FinalStatus::kPassed) << r.instance_id;
  EXPECT_EQ(m->call_count("coder"), 10u);
  EXPECT_EQ(m->call_count("debugger"), 0u);
  for (const char* f : {kConfigFile, kCorpusFile, kLedgerFile, kCallsFile, kResultsFile}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(test_support::read_jsonl(dir / kCallsFile).size(), 10u);
  EXPECT_EQ(test_support::read_jsonl(dir / kResultsFile).size(), 10u);
}

TEST(RunPipeline, FailuresOnlyForwarding) {
  TempDir dir;
  auto m = mock_file("mock_mixed.jsonl");
  const auto res = run_pipeline(fixture_corpus(), test_support::scripted_config(dir.path()),
                                AgentBackends::shared(m), stub());
  EXPECT_EQ(m->call_count("coder"), 14u);
  EXPECT_EQ(m->call_count("debugger"), 4u);
  const auto ledger = dir / kLedgerFile;
  EXPECT_EQ(test_support::ledger_attempts(ledger, "stage1"), 14u);
  EXPECT_EQ(test_support::ledger_attempts(ledger, "stage2"), 4u);
  for (const char* id : {"t01", "t02", "t03", "t04"}) EXPECT_EQ(test_support::ledger_attempts(ledger, "stage2", id), 1u);
  for (const auto& r : res.records) {
    EXPECT_EQ(r.final_status, FinalStatus::kPassed);
    EXPECT_EQ(r.stage2_invoked, r.instance_id <= "t04") << r.instance_id;
  }
}

TEST(RunPipeline, StagesSeparately) {
  TempDir dir;
  auto m = mock_file("mock_mixed.jsonl");
  const auto cfg = test_support::scripted_config(dir.path());
  const auto s1 = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(m), stub(), StageSelection::kStage1);
  EXPECT_EQ(m->call_count("debugger"), 0u);
  EXPECT_EQ(s1.stats.stage1_run, 10u);
  const auto s2 = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(m), stub(), StageSelection::kStage2);
  EXPECT_EQ(m->call_count("coder"), 14u);
  EXPECT_EQ(m->call_count("debugger"), 4u);
  EXPECT_EQ(s2.stats.stage2_run, 4u);
  EXPECT_EQ(s2.stats.skipped, 6u);
}

TEST(RunPipeline, WorkerCountDoesNotChangeResults) {
  TempDir a, b;
  run_pipeline(fixture_corpus(), test_support::scripted_config(a.path(), 1), AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  run_pipeline(fixture_corpus(), test_support::scripted_config(b.path(), 4), AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  EXPECT_EQ(test_support::read_file(a / kResultsFile), test_support::read_file(b / kResultsFile));
}

TEST(RunPipeline, EmptyCorpus) {
  TempDir dir;
  EXPECT_THROW(run_pipeline({}, test_support::scripted_config(dir.path()), AgentBackends::shared(mock("")), stub()),
               EmptyCorpusError);
}

// ---- resume ----

TEST(Resume, CompleteLedgerMakesNoCalls) {
  TempDir dir;
  const auto cfg = test_support::scripted_config(dir.path());
  run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  const std::string before = test_support::read_file(dir / kResultsFile);
  auto m = mock_file("mock_mixed.jsonl");
  const auto res = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(m), stub());
  EXPECT_TRUE(m->calls().empty());
  EXPECT_EQ(res.stats.skipped, 10u);
  EXPECT_EQ(test_support::read_file(dir / kResultsFile), before);
}

TEST(Resume, MissingStage2RerunsOnlyThose) {
  TempDir dir;
  const auto cfg = test_support::scripted_config(dir.path());
  run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  std::vector<std::string> kept;
  for (const auto& line : test_support::read_lines(dir / kLedgerFile)) {
    const auto j = nlohmann::json::parse(line);
    const std::string id = j["instance_id"];
    const bool stage2_rec = j.value("stage", "").rfind("stage2", 0) == 0 || j["type"] == "stage2_done";
    if (stage2_rec && id != "t04") continue;
    kept.push_back(line);
  }
  test_support::write_lines(dir / kLedgerFile, kept);
  auto m = mock_file("mock_mixed.jsonl");
  const auto res = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(m), stub());
  EXPECT_EQ(m->call_count("debugger"), 3u);
  EXPECT_EQ(m->call_count("coder"), 0u);
  for (const auto& r : res.records) EXPECT_EQ(r.final_status, FinalStatus::kPassed);
}

TEST(Resume, EmptyRunDirIsFreshRun) {
  TempDir dir;
  auto m = mock_file("mock_oracle.jsonl");
  const auto res = run_pipeline(fixture_corpus(), test_support::scripted_config(dir / "new"), AgentBackends::shared(m), stub());
  EXPECT_EQ(res.stats.stage1_run, 10u);
  EXPECT_EQ(res.stats.restarted, 0u);
}

TEST(Resume, EveryLedgerPrefixConvergesToTheSameResults) {
  TempDir ref;
  run_pipeline(fixture_corpus(), test_support::scripted_config(ref.path()), AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  const std::string expected = test_support::read_file(ref / kResultsFile);
  const auto lines = test_support::read_lines(ref / kLedgerFile);
  ASSERT_GT(lines.size(), 20u);

  for (std::size_t cut = 0; cut <= lines.size(); cut += 3) {
    TempDir dir;
    test_support::write_lines(dir / kLedgerFile, {lines.begin(), lines.begin() + cut});
    auto m = mock_file("mock_mixed.jsonl");
    run_pipeline(fixture_corpus(), test_support::scripted_config(dir.path()), AgentBackends::shared(m), stub());
    EXPECT_EQ(test_support::read_file(dir / kResultsFile), expected) << "cut at " << cut;
    EXPECT_LE(m->call_count("coder"), 14u);
  }
}

TEST(Resume, InterruptedThenResumed) {
  TempDir ref, dir;
  run_pipeline(fixture_corpus(), test_support::scripted_config(ref.path()), AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());

  std::atomic<bool> stop{false};
  auto stopping = std::make_shared<test_support::StoppingBackend>(mock_file("mock_mixed.jsonl"), &stop, 5);
  const auto cfg = test_support::scripted_config(dir.path());
  const auto first = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(stopping), stub(), StageSelection::kBoth, &stop);
  EXPECT_TRUE(first.stats.interrupted);
  EXPECT_LT(first.stats.stage1_run, 10u);

  const auto second = run_pipeline(fixture_corpus(), cfg, AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  EXPECT_FALSE(second.stats.interrupted);
  EXPECT_EQ(test_support::read_file(dir / kResultsFile), test_support::read_file(ref / kResultsFile));
}

TEST(Resume, TornLastLineAndCorruptRecord) {
  TempDir ref, dir;
  const auto corpus = fixture_corpus();
  run_pipeline(corpus, test_support::scripted_config(ref.path()), AgentBackends::shared(mock_file("mock_mixed.jsonl")), stub());
  auto lines = test_support::read_lines(ref / kLedgerFile);

  // Corrupt t02's first attempt; tear the final line mid-record.
  for (auto& l : lines) {
    if (l.find("\"t02\"") != std::string::npos && l.find("\"attempt\"") != std::string::npos) {
      l = R"j({"type": "attempt", "instance_id": "t02", "program": 7})j";
      break;
    }
  }
  std::ofstream(dir / kLedgerFile, std::ios::binary) << [&] {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s.substr(0, s.size() - 20);
  }();

  auto m = mock_file("mock_mixed.jsonl");
  const auto res = run_pipeline(corpus, test_support::scripted_config(dir.path()), AgentBackends::shared(m), stub());
  EXPECT_GE(res.stats.restarted, 2u);  // t02 and the instance whose last record was torn
  EXPECT_EQ(test_support::read_file(dir / kResultsFile), test_support::read_file(ref / kResultsFile));
}

// ---- ledger scan ----

TEST(LedgerScan, ResetScopes) {
  TempDir dir;
  test_support::write_lines(dir / "l.jsonl", {
      R"j({"type": "infra_error", "instance_id": "x", "stage": "stage1_attempt1", "kind": "backend", "message": "m"})j",
      R"j({"type": "stage1_done", "instance_id": "x", "final_status": "failed"})j",
      R"j({"type": "reset", "instance_id": "x", "scope": "all"})j",
      R"j({"type": "stage1_done", "instance_id": "y", "final_status": "failed"})j",
      R"j({"type": "infra_error", "instance_id": "y", "stage": "stage2", "kind": "backend", "message": "m"})j",
      R"j({"type": "reset", "instance_id": "y", "scope": "stage2"})j",
      "garbage without id",
  });
  const auto scan = scan_ledger(dir / "l.jsonl");
  EXPECT_FALSE(scan.instances.at("x").stage1_done);
  EXPECT_TRUE(scan.instances.at("x").stage1_infra_error.empty());
  EXPECT_TRUE(scan.instances.at("y").stage1_done);
  EXPECT_TRUE(scan.instances.at("y").stage2_infra_error.empty());
  EXPECT_EQ(scan.unreadable_lines, 1u);
  EXPECT_TRUE(scan_ledger(dir / "missing.jsonl").instances.empty());
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.max_stage1_attempts = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.worker_count = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.trace_budget = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.limits.per_test_timeout = std::chrono::milliseconds(70000);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(RunConfig{}.validate());
}

}  // namespace
}  // namespace tdrepair::pipeline
