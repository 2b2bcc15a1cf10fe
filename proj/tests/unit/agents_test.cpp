#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "temp_dir.hpp"
#include "tdrepair/agents/agents.hpp"
#include "tdrepair/agents/http_backend.hpp"
#include "tdrepair/agents/mock_backend.hpp"
#include "tdrepair/agents/sanitize.hpp"
#include "tdrepair/agents/templates.hpp"
#include "tdrepair/errors.hpp"

namespace tdrepair::agents {
namespace {

using dataset::Provenance;
using dataset::TaskInstance;
using dataset::TestCase;
using test_support::TempDir;

BackendConfig fast_config(int retries = 3) {
  BackendConfig c;
  c.max_retries = retries;
  c.backoff_initial = std::chrono::milliseconds(0);
  return c;
}

MockBackend mock_from(const std::string& script) {
  std::istringstream in(script);
  return MockBackend::parse(in);
}

TaskInstance add_instance() {
  TaskInstance t;
  t.id = "t1";
  t.instruction = "দুটি সংখ্যা যোগ করুন";
  t.function_name = "add";
  t.arg_names = {"a", "b"};
  t.tests.add(TestCase::make("assert add(1, 2) == 3", Provenance::kProvided));
  t.tests.add(TestCase::make("assert add(0, 0) == 0", Provenance::kExternal));
  return t;
}

// ---- templates ----

TEST(Templates, ShippedSizes) {
  EXPECT_EQ(template_text(kCoderUser).size(), 776u);
  EXPECT_EQ(template_text(kDebuggerSystem).size(), 398u);
  EXPECT_EQ(template_text(kDebuggerUser).size(), 145u);
  EXPECT_EQ(template_text(kTestgenSystem).size(), 317u);
  EXPECT_EQ(template_text(kTestgenUser).size(), 197u);
  EXPECT_THROW(template_text("nope"), ConfigError);
  EXPECT_THROW(render_prompt("nope", {}), ConfigError);
}

TEST(Templates, PlaceholderNames) {
  std::vector<std::string> names;
  for (const auto& p : find_placeholders(template_text(kCoderUser))) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"status", "spec.name", "spec.args", "spec.instruction_bn"}));
  names.clear();
  for (const auto& p : find_placeholders(template_text(kDebuggerUser))) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"instruction", "code", "failing_tests", "error_text"}));
  names.clear();
  for (const auto& p : find_placeholders(template_text(kTestgenUser))) names.push_back(p.name);
  EXPECT_EQ(names, (std::vector<std::string>{"func_name", "sample_assert", "num_tests"}));
  EXPECT_TRUE(find_placeholders(template_text(kDebuggerSystem)).empty());
  EXPECT_TRUE(find_placeholders(template_text(kTestgenSystem)).empty());
  EXPECT_TRUE(find_placeholders("{} {1} {a b} {'x'.join(y}").empty());
}

TEST(Templates, SignatureLine) {
  const std::string out = render_prompt(kCoderUser, {{"status", ""},
                                                     {"spec.name", "min_cost"},
                                                     {"spec.args", "cost, m, n"},
                                                     {"spec.instruction_bn", "x"}});
  EXPECT_NE(out.find("def min_cost(cost, m, n):"), std::string::npos);
  EXPECT_TRUE(find_placeholders(out).empty());
}

TEST(Templates, MissingBindingNamed) {
  try {
    render_prompt(kCoderUser, {{"spec.name", "f"}, {"spec.args", ""}, {"spec.instruction_bn", ""}});
    FAIL() << "expected TemplateError";
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.placeholder(), "status");
  }
}

TEST(Templates, NoPlaceholdersIsIdentity) {
  EXPECT_EQ(render_prompt(kDebuggerSystem, {}), template_text(kDebuggerSystem));
  EXPECT_EQ(render_text("plain {text}", {{"text", "x"}, {"unused", "y"}}), "plain x");
}

TEST(Templates, BindingsInsertedVerbatim) {
  // Braces and placeholder-looking text in a binding are not re-expanded.
  const std::string out = render_text("[{a}] [{b}]", {{"a", "{b}"}, {"b", "$1 \\n"}});
  EXPECT_EQ(out, "[{b}] [$1 \\n]");
}

// ---- sanitize ----

TEST(Sanitize, Examples) {
  EXPECT_EQ(sanitize_model_output("```python\ndef f(): pass\n```"), "def f(): pass");
  EXPECT_EQ(sanitize_model_output("def f(): pass"), "def f(): pass");
  EXPECT_THROW(sanitize_model_output("```\n```"), EmptyGenerationError);
  EXPECT_THROW(sanitize_model_output("  \n"), EmptyGenerationError);
  EXPECT_EQ(sanitize_model_output("'''\ndef f():\n    return 1\n'''"), "def f():\n    return 1");
  EXPECT_EQ(sanitize_model_output("`x = 1`"), "x = 1");
  EXPECT_EQ(sanitize_model_output("\"```py\nx = 1\n```\""), "x = 1");
}

TEST(Sanitize, FenceFreeUnchangedAndIdempotent) {
  const std::vector<std::string> inputs = {
      "def f(s):\n    return s.strip('\"')\n",
      "  def f(): pass  ",
      "x = '''a'''\ny = 2",
      "'a' + 'b'",
      "```python\nclass A:\n    pass\n```\n",
      "\"\"\"doc\"\"\"",
  };
  for (const auto& in : inputs) {
    const std::string once = sanitize_model_output(in);
    EXPECT_EQ(sanitize_model_output(once), once) << in;
  }
  EXPECT_EQ(sanitize_model_output(inputs[0]), inputs[0]);
  EXPECT_EQ(sanitize_model_output(inputs[1]), inputs[1]);
  EXPECT_EQ(sanitize_model_output(inputs[2]), inputs[2]);
  EXPECT_EQ(sanitize_model_output(inputs[3]), inputs[3]);
}

// ---- backend retry contract ----

TEST(Backend, MockPassthrough) {
  auto mock = mock_from(R"j({"response": "def add(a,b): return a+b"})j");
  AgentRequest req{"", "hi", fast_config(), {"t1", "coder", 1}};
  const AgentResponse r = mock.complete(req);
  EXPECT_EQ(r.text, "def add(a,b): return a+b");
  EXPECT_EQ(r.attempt_count, 1);
}

TEST(Backend, RetriesTransientFailures) {
  auto mock = mock_from(R"j({"response": "ok", "fail_times": 2})j");
  AgentRequest req{"", "hi", fast_config(3), {"t1", "coder", 1}};
  const AgentResponse r = mock.complete(req);
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempt_count, 3);
}

TEST(Backend, ExhaustionCarriesLastStatus) {
  auto mock = mock_from(R"j({"response": "ok", "error": "transient"})j");
  AgentRequest req{"", "hi", fast_config(2), {"t1", "coder", 1}};
  try {
    mock.complete(req);
    FAIL() << "expected BackendError";
  } catch (const CredentialError&) {
    FAIL() << "wrong error kind";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.last_status(), 503);
  }
  EXPECT_EQ(mock.calls().size(), 3u);
}

TEST(Backend, AuthFailureNotRetried) {
  auto mock = mock_from(R"j({"response": "ok", "error": "auth"})j");
  AgentRequest req{"", "hi", fast_config(5), {"t1", "coder", 1}};
  EXPECT_THROW(mock.complete(req), CredentialError);
  EXPECT_EQ(mock.calls().size(), 1u);
}

TEST(Backend, EmptyCompletionRejected) {
  auto mock = mock_from(R"j({"response": ""})j");
  AgentRequest req{"", "hi", fast_config(), {"t1", "coder", 1}};
  EXPECT_THROW(mock.complete(req), EmptyGenerationError);
}

TEST(Backend, BackoffIsExponentialAndCapped) {
  auto mock = mock_from(R"j({"response": "ok", "fail_times": 3})j");
  BackendConfig c = fast_config(3);
  c.backoff_initial = std::chrono::milliseconds(20);
  c.backoff_max = std::chrono::milliseconds(40);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(mock.complete({"", "hi", c, {"t1", "coder", 1}}).attempt_count, 4);
  const auto waited = std::chrono::steady_clock::now() - start;
  EXPECT_GE(waited, std::chrono::milliseconds(20 + 40 + 40));
}

TEST(Backend, ConfigValidation) {
  BackendConfig c;
  c.max_retries = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = BackendConfig{};
  c.request_timeout = std::chrono::milliseconds(0);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(reasoning_effort_from_string("extreme"), ConfigError);
  EXPECT_EQ(reasoning_effort_from_string("high"), ReasoningEffort::kHigh);
}

TEST(Backend, CallLogRecords) {
  TempDir dir;
  auto mock = mock_from(R"j({"response": "x", "fail_times": 1})j" "\n" R"j({"instance_id": "t2", "error": "auth"})j");
  mock.set_call_log(std::make_shared<CallLog>(dir / "calls.jsonl"));
  mock.complete({"sys", "user", fast_config(), {"t1", "coder", 2}});
  EXPECT_THROW(mock.complete({"", "user", fast_config(), {"t2", "debugger", 1}}), CredentialError);

  std::istringstream lines(test_support::read_file(dir / "calls.jsonl"));
  std::string line;
  std::vector<nlohmann::json> recs;
  while (std::getline(lines, line)) recs.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0]["template_id"], "coder");
  EXPECT_EQ(recs[0]["instance_id"], "t1");
  EXPECT_EQ(recs[0]["attempt"], 2);
  EXPECT_EQ(recs[0]["attempt_count"], 2);
  EXPECT_EQ(recs[0]["ok"], true);
  EXPECT_EQ(recs[0]["user_prompt_sha256"].get<std::string>().size(), 16u);
  EXPECT_EQ(recs[0]["user_prompt_sha256"], short_hash("user"));
  EXPECT_TRUE(recs[0].contains("latency_ms"));
  EXPECT_EQ(recs[1]["ok"], false);
  EXPECT_EQ(recs[1]["last_status"], nullptr);
}

TEST(Backend, ShortHashKnownValue) {
  // sha256("abc") = ba7816bf8f01cfea...
  EXPECT_EQ(short_hash("abc"), "ba7816bf8f01cfea");
}

TEST(MockScript, SpecificityAndTies) {
  auto mock = mock_from(
      R"j({"response": "generic"})j"
      "\n"
      R"j({"template_id": "coder", "response": "coder-any"})j"
      "\n"
      R"j({"template_id": "coder", "response": "coder-any-later"})j"
      "\n"
      R"j({"instance_id": "t1", "template_id": "coder", "attempt": 2, "response": "t1-second"})j"
      "\n"
      R"j({"template_id": "debugger", "prompt_contains": "MARK", "response": "marked"})j");
  auto text = [&](const std::string& id, const std::string& agent, int attempt, const std::string& prompt = "p") {
    return mock.complete({"", prompt, fast_config(), {id, agent, attempt}}).text;
  };
  EXPECT_EQ(text("t1", "coder", 1), "coder-any");
  EXPECT_EQ(text("t1", "coder", 2), "t1-second");
  EXPECT_EQ(text("t9", "coder", 2), "coder-any");
  EXPECT_EQ(text("t1", "debugger", 1), "generic");
  EXPECT_EQ(text("t1", "debugger", 1, "has MARK inside"), "marked");
  EXPECT_EQ(mock.call_count("coder"), 3u);
}

TEST(MockScript, NoMatchIsNotRetried) {
  auto mock = mock_from(R"j({"instance_id": "other", "response": "x"})j");
  EXPECT_THROW(mock.complete({"", "p", fast_config(3), {"t1", "coder", 1}}), BackendError);
  EXPECT_EQ(mock.calls().size(), 1u);
}

TEST(MockScript, MalformedScript) {
  EXPECT_THROW(mock_from("not json"), ConfigError);
  EXPECT_THROW(mock_from(R"j({"error": "sometimes"})j"), ConfigError);
  EXPECT_THROW(mock_from(R"j({"attempt": "two"})j"), ConfigError);
  EXPECT_THROW(MockBackend::load("/nonexistent/script.jsonl"), IoError);
}

TEST(MakeBackend, ProviderSelection) {
  BackendConfig c;
  c.provider_id = "nonesuch";
  EXPECT_THROW(make_backend(c), ConfigError);
  c.provider_id = "mock";
  EXPECT_THROW(make_backend(c), ConfigError);
  TempDir dir;
  dir.write("m.jsonl", R"j({"response": "x"})j");
  EXPECT_EQ(make_backend(c, dir / "m.jsonl")->provider_id(), "mock");

  ::unsetenv("ANTHROPIC_API_KEY");
  c.provider_id = "anthropic";
  EXPECT_THROW(make_backend(c), CredentialError);
}

// ---- agents ----

TEST(GenerateCode, FirstAttempt) {
  auto mock = mock_from(R"j({"template_id": "coder", "response": "```python\ndef add(a, b):\n    return a + b\n```"})j");
  const auto p = generate_code(add_instance(), StatusFlag::kFirstAttempt, mock, fast_config());
  EXPECT_EQ(p.instance_id, "t1");
  EXPECT_EQ(p.source, "def add(a, b):\n    return a + b");
  EXPECT_EQ(p.stage, "stage1_attempt1");
  EXPECT_EQ(p.status, ProgramStatus::kUntested);

  const auto calls = mock.calls();
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_TRUE(calls[0].system_prompt.empty());
  EXPECT_NE(calls[0].user_prompt.find("def add(a, b):"), std::string::npos);
  EXPECT_NE(calls[0].user_prompt.find("দুটি সংখ্যা যোগ করুন"), std::string::npos);
  EXPECT_EQ(calls[0].user_prompt.find(kFailureNotice), std::string::npos);
  EXPECT_EQ(calls[0].user_prompt.find("assert"), std::string::npos);
}

TEST(GenerateCode, RetryCarriesFailureNotice) {
  auto mock = mock_from(R"j({"response": "def add(a, b): return a + b"})j");
  const auto p = generate_code(add_instance(), StatusFlag::kPreviousFailed, mock, fast_config());
  EXPECT_EQ(p.stage, "stage1_attempt2");
  const auto calls = mock.calls();
  EXPECT_NE(calls[0].user_prompt.find(kFailureNotice), std::string::npos);
  EXPECT_EQ(calls[0].tag.attempt, 2);
  EXPECT_THROW(generate_code(add_instance(), StatusFlag::kFirstAttempt, mock, fast_config(), 2), ContractViolation);
}

TEST(GenerateCode, PropagatesErrors) {
  auto empty = mock_from(R"j({"response": "```\n```"})j");
  EXPECT_THROW(generate_code(add_instance(), StatusFlag::kFirstAttempt, empty, fast_config()), EmptyGenerationError);
  auto down = mock_from(R"j({"error": "transient"})j");
  EXPECT_THROW(generate_code(add_instance(), StatusFlag::kFirstAttempt, down, fast_config(0)), BackendError);
}

harness::DistilledTrace trace_for(const TaskInstance& t, std::vector<std::size_t> failing) {
  harness::ExecutionReport rep;
  for (std::size_t i = 0; i < t.tests.size(); ++i) {
    harness::TestOutcome o;
    o.test_index = i;
    const bool f = std::find(failing.begin(), failing.end(), i) != failing.end();
    o.status = f ? harness::TestStatus::kAssertionFail : harness::TestStatus::kPass;
    if (f) o.exception_type = "AssertionError";
    rep.outcomes.push_back(o);
  }
  return harness::distill_trace(rep, t.tests.sources());
}

TEST(DebugCode, PromptCarriesSuiteAndTrace) {
  const TaskInstance t = add_instance();
  auto mock = mock_from(R"j({"template_id": "debugger", "prompt_contains": "return a - b", "response": "def add(a, b): return a + b"})j");
  CandidateProgram failed{"t1", "def add(a, b): return a - b", "stage1_attempt2", ProgramStatus::kFailed};
  const auto trace = trace_for(t, {0});
  const auto fixed = debug_code(t, failed, trace, mock, fast_config());
  EXPECT_EQ(fixed.stage, "stage2");
  EXPECT_EQ(fixed.status, ProgramStatus::kUntested);
  EXPECT_EQ(fixed.source, "def add(a, b): return a + b");

  const auto calls = mock.calls();
  EXPECT_EQ(calls[0].system_prompt, template_text(kDebuggerSystem));
  const std::string& u = calls[0].user_prompt;
  EXPECT_NE(u.find("assert add(1, 2) == 3  # FAILED\nassert add(0, 0) == 0\n"), std::string::npos);
  EXPECT_NE(u.find("Error trace: " + trace.text), std::string::npos);
  EXPECT_NE(u.find("Instruction (original): " + t.instruction), std::string::npos);
}

TEST(DebugCode, FailingOnlySwitch) {
  EXPECT_EQ(render_failing_tests({"assert a", "assert b", "assert c"}, {0, 2}, true), "assert a\nassert c");
  EXPECT_EQ(render_failing_tests({"assert a", "assert b"}, {1}, false), "assert a\nassert b  # FAILED");
}

TEST(DebugCode, Preconditions) {
  const TaskInstance t = add_instance();
  auto mock = mock_from(R"j({"response": "x = 1"})j");
  CandidateProgram passed{"t1", "def add(a, b): return a + b", "stage1_attempt1", ProgramStatus::kPassed};
  EXPECT_THROW(debug_code(t, passed, trace_for(t, {0}), mock, fast_config()), ContractViolation);
  CandidateProgram failed = passed;
  failed.status = ProgramStatus::kFailed;
  EXPECT_THROW(debug_code(t, failed, harness::DistilledTrace{}, mock, fast_config()), ContractViolation);
  EXPECT_TRUE(mock.calls().empty());
}

TEST(CandidateProgram, StatusTransitions) {
  CandidateProgram p{"t1", "x = 1", "stage1_attempt1", ProgramStatus::kUntested};
  p.mark(true);
  EXPECT_EQ(p.status, ProgramStatus::kPassed);
  EXPECT_THROW(p.mark(false), ContractViolation);
  EXPECT_EQ(program_from_json(program_to_json(p)), p);
  EXPECT_EQ(stage2_tag(1), "stage2");
  EXPECT_EQ(stage2_tag(2), "stage2_round2");
}

TEST(Testgen, FiveValid) {
  const TaskInstance t = add_instance();
  auto mock = mock_from(
      R"j({"template_id": "testgen", "response": "[\"assert add(2, 2) == 4\", \"assert add(-1, 1) == 0\", \"assert add(10, 5) == 15\", \"assert add(0, 7) == 7\", \"assert add(3, 4) == 7\"]"})j");
  const auto r = generate_unit_tests(t, t.tests[0], 5, mock, fast_config());
  EXPECT_EQ(r.returned, 5u);
  EXPECT_EQ(r.valid, 5u);
  ASSERT_EQ(r.retained.size(), 5u);
  for (const auto& tc : r.retained) EXPECT_EQ(tc.provenance, Provenance::kGenerated);

  const auto calls = mock.calls();
  EXPECT_EQ(calls[0].system_prompt, template_text(kTestgenSystem));
  EXPECT_NE(calls[0].user_prompt.find("Target function name: add\nSample assert: assert add(1, 2) == 3\n"),
            std::string::npos);
  EXPECT_NE(calls[0].user_prompt.find("Generate 5 new"), std::string::npos);
}

TEST(Testgen, MalformedDroppedAndDuplicatesFiltered) {
  const TaskInstance t = add_instance();
  auto mock = mock_from(
      R"j({"response": "['assert add(2, 2) == 4', 'assert add(2,', 'print(add(1, 2))', 'assert add(5, 5) == 10', 'assert add(7, 1) == 8']"})j"
      "\n"
      R"j({"instance_id": "t2", "response": "['assert add(1,2)==3', 'assert add(2, 2) == 4', 'assert add( 2,2 )==4', 'assert sub(1, 1) == 0', 'import os']"})j");
  const auto r = generate_unit_tests(t, t.tests[0], 5, mock, fast_config());
  EXPECT_EQ(r.returned, 5u);
  EXPECT_EQ(r.retained.size(), 3u);

  TaskInstance t2 = t;
  t2.id = "t2";
  const auto r2 = generate_unit_tests(t2, t2.tests[0], 5, mock, fast_config());
  EXPECT_EQ(r2.valid, 3u);  // sub() does not call the target, import is not an assert
  ASSERT_EQ(r2.retained.size(), 1u);
  EXPECT_EQ(r2.retained[0].assert_source, "assert add(2, 2) == 4");
}

TEST(Testgen, PayloadForms) {
  EXPECT_EQ(parse_testgen_payload("[\n  \"assert f(1) == 1\",\n  'assert f(2) == 2',\n]"),
            (std::vector<std::string>{"assert f(1) == 1", "assert f(2) == 2"}));
  EXPECT_EQ(parse_testgen_payload("assert f(1) == 1\nassert f(2) == 2,\nsome chatter"),
            (std::vector<std::string>{"assert f(1) == 1", "assert f(2) == 2"}));
  EXPECT_EQ(parse_testgen_payload("[]"), std::vector<std::string>{});
  EXPECT_THROW(parse_testgen_payload("I cannot help with that."), TestgenFormatError);
  EXPECT_THROW(parse_testgen_payload("[1, 2, 3]"), TestgenFormatError);
}

TEST(Testgen, GarbageIsFormatError) {
  const TaskInstance t = add_instance();
  auto mock = mock_from(R"j({"response": "Sure! Here are some tests."})j");
  EXPECT_THROW(generate_unit_tests(t, t.tests[0], 5, mock, fast_config()), TestgenFormatError);
  EXPECT_THROW(generate_unit_tests(t, t.tests[0], 0, mock, fast_config()), ContractViolation);
}

// ---- live provider wire format against a local server ----

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpBackend, OpenAIWireFormatAndRetry) {
  LocalServer srv;
  int hits = 0;
  nlohmann::json seen;
  std::string auth;
  srv.server().Post("/proxy/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 429;
      return;
    }
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"j({"choices": [{"message": {"content": "def f(): pass"}}]})j", "application/json");
  });
  HttpBackend backend(HttpProvider::kOpenAI, {"sk-test", srv.url() + "/proxy/"});
  BackendConfig c = fast_config(2);
  c.provider_id = "openai";
  c.model_id = "m1";
  c.reasoning_effort = ReasoningEffort::kLow;
  const auto r = backend.complete({"sys", "user", c, {"t1", "coder", 1}});
  EXPECT_EQ(r.text, "def f(): pass");
  EXPECT_EQ(r.attempt_count, 2);
  EXPECT_EQ(auth, "Bearer sk-test");
  EXPECT_EQ(seen["model"], "m1");
  EXPECT_EQ(seen["reasoning_effort"], "low");
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][1]["content"], "user");
}

TEST(HttpBackend, AnthropicAndGoogleShapes) {
  LocalServer srv;
  nlohmann::json anthropic_req;
  srv.server().Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
    anthropic_req = nlohmann::json::parse(req.body);
    EXPECT_EQ(req.get_header_value("x-api-key"), "k");
    res.set_content(R"j({"content": [{"type": "thinking", "thinking": "hmm"}, {"type": "text", "text": "x = 1"}]})j",
                    "application/json");
  });
  srv.server().Post(R"(/v1beta/models/gm:generateContent)", [&](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(req.get_header_value("x-goog-api-key"), "g");
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["contents"][0]["parts"][0]["text"], "user");
    res.set_content(R"j({"candidates": [{"content": {"parts": [{"text": "y = 2"}]}}]})j", "application/json");
  });
  BackendConfig c = fast_config(0);
  c.model_id = "am";
  c.reasoning_effort = ReasoningEffort::kHigh;
  HttpBackend anthropic(HttpProvider::kAnthropic, {"k", srv.url()});
  EXPECT_EQ(anthropic.complete({"sys", "user", c, {"t1", "debugger", 1}}).text, "x = 1");
  EXPECT_EQ(anthropic_req["system"], "sys");
  EXPECT_EQ(anthropic_req["thinking"]["budget_tokens"], 16384);

  c.model_id = "gm";
  HttpBackend google(HttpProvider::kGoogle, {"g", srv.url()});
  EXPECT_EQ(google.complete({"", "user", c, {"t1", "coder", 1}}).text, "y = 2");
}

TEST(HttpBackend, StatusClassification) {
  LocalServer srv;
  int hits = 0;
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const auto model = nlohmann::json::parse(req.body)["model"].get<std::string>();
    res.status = model == "auth" ? 401 : model == "bad" ? 400 : 503;
  });
  HttpBackend backend(HttpProvider::kOpenAI, {"k", srv.url()});
  BackendConfig c = fast_config(2);
  c.model_id = "auth";
  EXPECT_THROW(backend.complete({"", "u", c, {}}), CredentialError);
  EXPECT_EQ(hits, 1);
  c.model_id = "bad";
  EXPECT_THROW(backend.complete({"", "u", c, {}}), BackendError);
  EXPECT_EQ(hits, 2);
  c.model_id = "down";
  try {
    backend.complete({"", "u", c, {}});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.last_status(), 503);
  }
  EXPECT_EQ(hits, 5);
}

TEST(HttpBackend, ConnectionRefusedIsTransport) {
  int port;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  HttpBackend backend(HttpProvider::kOpenAI, {"k", "http://127.0.0.1:" + std::to_string(port)});
  BackendConfig c = fast_config(1);
  c.model_id = "m";
  c.request_timeout = std::chrono::milliseconds(300);
  try {
    backend.complete({"", "u", c, {}});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_FALSE(e.last_status().has_value());
  }
}

TEST(HttpBackend, CredentialsFromEnv) {
  ::setenv("GOOGLE_API_KEY", "", 1);
  ::setenv("GEMINI_API_KEY", "gem", 1);
  ::setenv("GOOGLE_BASE_URL", "http://localhost:1", 1);
  const auto c = HttpBackend::credentials_from_env(HttpProvider::kGoogle);
  EXPECT_EQ(c.api_key, "gem");
  EXPECT_EQ(c.base_url, "http://localhost:1");
  ::unsetenv("GEMINI_API_KEY");
  EXPECT_THROW(HttpBackend::credentials_from_env(HttpProvider::kGoogle), CredentialError);
  ::unsetenv("GOOGLE_API_KEY");
  ::unsetenv("GOOGLE_BASE_URL");
  EXPECT_THROW(HttpBackend(HttpProvider::kOpenAI, {"k", "localhost:80"}), ConfigError);
}

}  // namespace
}  // namespace tdrepair::agents
