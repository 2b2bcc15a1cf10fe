#include "tdrepair/harness/assert_syntax.hpp"

#include <algorithm>
#include <array>

#include "tdrepair/syntax/parser.hpp"
#include "tdrepair/syntax/tokenizer.hpp"
#include "tdrepair/syntax/unparse.hpp"

namespace tdrepair {

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kParseError: return "parse_error";
    case RejectReason::kNotAssert: return "not_assert";
    case RejectReason::kMultipleStatements: return "multiple_statements";
    case RejectReason::kForbiddenConstruct: return "forbidden_construct";
  }
  return "unknown";
}

namespace harness {
namespace {

constexpr std::array<std::string_view, 11> kForbiddenNames = {
    "open", "print", "input", "exec", "eval", "compile", "__import__", "breakpoint", "exit", "quit", "help"};

bool is_dunder(std::string_view name) {
  return name.size() > 4 && name.substr(0, 2) == "__" && name.substr(name.size() - 2) == "__";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

AssertCheck reject(RejectReason reason, std::string detail) {
  AssertCheck c;
  c.reason = reason;
  c.detail = std::move(detail);
  return c;
}

}  // namespace

AssertCheck check_assert_syntax(std::string_view test_source) {
  const std::string_view src = trim(test_source);
  std::vector<syntax::Statement> statements;
  try {
    statements = syntax::parse_statements(src);
  } catch (const syntax::SyntaxError& e) {
    return reject(RejectReason::kParseError, e.what());
  }
  if (statements.empty()) return reject(RejectReason::kNotAssert, "no statement");
  if (statements.size() > 1) {
    return reject(RejectReason::kMultipleStatements, std::to_string(statements.size()) + " statements");
  }
  const syntax::Statement& st = statements.front();
  if (st.kind != syntax::StatementKind::kAssert) return reject(RejectReason::kNotAssert, "not an assert statement");

  ValidatedAssert ok;
  std::string forbidden;
  syntax::walk(*st.node, [&](const syntax::Node& n) {
    if (!forbidden.empty()) return;
    if (n.kind == syntax::NodeKind::kName) {
      if (std::find(kForbiddenNames.begin(), kForbiddenNames.end(), n.text) != kForbiddenNames.end() ||
          is_dunder(n.text)) {
        forbidden = "name '" + n.text + "'";
      }
    } else if (n.kind == syntax::NodeKind::kAttribute && is_dunder(n.text)) {
      forbidden = "attribute '" + n.text + "'";
    } else if (n.kind == syntax::NodeKind::kCall && n.children[0]->kind == syntax::NodeKind::kName) {
      const std::string& callee = n.children[0]->text;
      if (std::find(ok.called_functions.begin(), ok.called_functions.end(), callee) == ok.called_functions.end()) {
        ok.called_functions.push_back(callee);
      }
    }
  });
  if (!forbidden.empty()) return reject(RejectReason::kForbiddenConstruct, "uses " + forbidden);

  ok.source = std::string(src);
  ok.normalized = syntax::unparse(*st.node);
  AssertCheck c;
  c.accepted = std::move(ok);
  return c;
}

ValidatedAssert validate_assert_syntax(std::string_view test_source) {
  AssertCheck c = check_assert_syntax(test_source);
  if (!c) throw ValidationError(c.reason, c.detail);
  return std::move(*c.accepted);
}

}  // namespace harness
}  // namespace tdrepair
