#include "tdrepair/agents/agents.hpp"

#include <algorithm>
#include <set>

#include "tdrepair/agents/sanitize.hpp"
#include "tdrepair/errors.hpp"
#include "tdrepair/harness/assert_syntax.hpp"
#include "tdrepair/syntax/parser.hpp"
#include "tdrepair/syntax/tokenizer.hpp"

namespace tdrepair::agents {

using dataset::Provenance;
using dataset::TaskInstance;
using dataset::TestCase;

const char* to_string(ProgramStatus s) {
  switch (s) {
    case ProgramStatus::kUntested: return "untested";
    case ProgramStatus::kPassed: return "passed";
    case ProgramStatus::kFailed: return "failed";
  }
  return "untested";
}

ProgramStatus program_status_from_string(std::string_view s) {
  for (auto p : {ProgramStatus::kUntested, ProgramStatus::kPassed, ProgramStatus::kFailed}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown program status '" + std::string(s) + "'");
}

std::string stage1_tag(int attempt) { return "stage1_attempt" + std::to_string(attempt); }

std::string stage2_tag(int round) { return round <= 1 ? "stage2" : "stage2_round" + std::to_string(round); }

void CandidateProgram::mark(bool passed) {
  if (status != ProgramStatus::kUntested) {
    throw ContractViolation("program for " + instance_id + " at " + stage + " was already marked " +
                            to_string(status));
  }
  status = passed ? ProgramStatus::kPassed : ProgramStatus::kFailed;
}

nlohmann::json program_to_json(const CandidateProgram& p) {
  return {{"instance_id", p.instance_id}, {"stage", p.stage}, {"status", to_string(p.status)}, {"source", p.source}};
}

CandidateProgram program_from_json(const nlohmann::json& j) {
  CandidateProgram p;
  p.instance_id = j.at("instance_id").get<std::string>();
  p.stage = j.at("stage").get<std::string>();
  p.status = program_status_from_string(j.at("status").get<std::string>());
  p.source = j.at("source").get<std::string>();
  return p;
}

AgentSettings::AgentSettings() {
  coder.reasoning_effort = ReasoningEffort::kLow;
  debugger.reasoning_effort = ReasoningEffort::kHigh;
  testgen.reasoning_effort = ReasoningEffort::kHigh;
}

Bindings coder_bindings(const TaskInstance& instance, StatusFlag flag) {
  std::string args;
  for (const auto& a : instance.arg_names) {
    if (!args.empty()) args += ", ";
    args += a;
  }
  return {{"status", flag == StatusFlag::kFirstAttempt ? "" : std::string(kFailureNotice)},
          {"spec.name", instance.function_name},
          {"spec.args", args},
          {"spec.instruction_bn", instance.instruction}};
}

CandidateProgram generate_code(const TaskInstance& instance, StatusFlag flag, Backend& backend,
                               const BackendConfig& config, int attempt) {
  if (attempt == 0) attempt = flag == StatusFlag::kFirstAttempt ? 1 : 2;
  if ((attempt == 1) != (flag == StatusFlag::kFirstAttempt)) {
    throw ContractViolation("attempt " + std::to_string(attempt) + " does not match the status flag");
  }
  AgentRequest req;
  req.user_prompt = render_prompt(kCoderUser, coder_bindings(instance, flag));
  req.config = config;
  req.tag = {instance.id, std::string(kCoderAgent), attempt};
  const AgentResponse resp = backend.complete(req);
  return {instance.id, sanitize_model_output(resp.text), stage1_tag(attempt), ProgramStatus::kUntested};
}

std::string render_failing_tests(const std::vector<std::string>& suite, const std::vector<std::size_t>& failing,
                                 bool failing_only) {
  const std::set<std::size_t> failed(failing.begin(), failing.end());
  std::string out;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const bool f = failed.count(i) > 0;
    if (failing_only && !f) continue;
    if (!out.empty()) out += '\n';
    out += suite[i];
    if (f && !failing_only) out += "  # FAILED";
  }
  return out;
}

CandidateProgram debug_code(const TaskInstance& instance, const CandidateProgram& program,
                            const harness::DistilledTrace& trace, Backend& backend, const BackendConfig& config,
                            bool failing_only, int round) {
  if (program.status != ProgramStatus::kFailed) {
    throw ContractViolation("debug_code needs a failed program, got " + std::string(to_string(program.status)));
  }
  if (trace.failing_indices.empty() || trace.text.empty()) throw ContractViolation("debug_code needs a nonempty trace");

  const Bindings user = {{"instruction", instance.instruction},
                         {"code", program.source},
                         {"failing_tests", render_failing_tests(instance.tests.sources(), trace.failing_indices,
                                                                failing_only)},
                         {"error_text", trace.text}};
  AgentRequest req;
  req.system_prompt = render_prompt(kDebuggerSystem, {});
  req.user_prompt = render_prompt(kDebuggerUser, user);
  req.config = config;
  req.tag = {instance.id, std::string(kDebuggerAgent), round};
  const AgentResponse resp = backend.complete(req);
  return {instance.id, sanitize_model_output(resp.text), stage2_tag(round), ProgramStatus::kUntested};
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::optional<std::vector<std::string>> as_string_list(std::string_view text) {
  syntax::NodePtr node;
  try {
    node = syntax::parse_expression(text);
  } catch (const syntax::SyntaxError&) {
    return std::nullopt;
  }
  if (node->kind != syntax::NodeKind::kList && node->kind != syntax::NodeKind::kTuple) return std::nullopt;
  std::vector<std::string> items;
  for (const auto& child : node->children) {
    if (child->kind != syntax::NodeKind::kConstant || child->constant != syntax::ConstantKind::kString) {
      return std::nullopt;
    }
    items.push_back(child->value);
  }
  return items;
}

}  // namespace

std::vector<std::string> parse_testgen_payload(std::string_view text) {
  const std::string_view body = trim(text);
  if (auto items = as_string_list(body)) return *items;

  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const auto nl = body.find('\n', pos);
    std::string_view line = trim(body.substr(pos, nl == std::string_view::npos ? body.npos : nl - pos));
    pos = nl == std::string_view::npos ? body.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == ',') line = trim(line.substr(0, line.size() - 1));
    if (line.substr(0, 6) == "assert" && (line.size() == 6 || line[6] == ' ' || line[6] == '(')) {
      items.emplace_back(line);
    }
  }
  if (items.empty()) throw TestgenFormatError("test generator output is neither a list of strings nor assert lines");
  return items;
}

TestgenResult generate_unit_tests(const TaskInstance& instance, const TestCase& sample_assert, int n,
                                  Backend& backend, const BackendConfig& config) {
  if (n < 1) throw ContractViolation("generate_unit_tests needs n >= 1");
  harness::validate_assert_syntax(sample_assert.assert_source);

  const Bindings user = {{"func_name", instance.function_name},
                         {"sample_assert", sample_assert.assert_source},
                         {"num_tests", std::to_string(n)}};
  AgentRequest req;
  req.system_prompt = render_prompt(kTestgenSystem, {});
  req.user_prompt = render_prompt(kTestgenUser, user);
  req.config = config;
  req.tag = {instance.id, std::string(kTestgenAgent), 1};
  const AgentResponse resp = backend.complete(req);

  std::string cleaned;
  try {
    cleaned = sanitize_model_output(resp.text);
  } catch (const EmptyGenerationError&) {
    throw TestgenFormatError("test generator output is empty");
  }
  const std::vector<std::string> items = parse_testgen_payload(cleaned);

  TestgenResult result;
  result.returned = items.size();
  std::set<std::string> seen;
  for (const auto& tc : instance.tests.cases()) seen.insert(tc.normalized_form);
  seen.insert(sample_assert.normalized_form.empty() ? dataset::normalize_test(sample_assert.assert_source)
                                                    : sample_assert.normalized_form);
  for (const auto& item : items) {
    const harness::AssertCheck check = harness::check_assert_syntax(item);
    if (!check) continue;
    const auto& calls = check.accepted->called_functions;
    if (std::find(calls.begin(), calls.end(), instance.function_name) == calls.end()) continue;
    ++result.valid;
    if (!seen.insert(check.accepted->normalized).second) continue;
    result.retained.push_back({check.accepted->source, Provenance::kGenerated, check.accepted->normalized});
  }
  return result;
}

}  // namespace tdrepair::agents
