#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdrepair/errors.hpp"

namespace tdrepair::harness {

// A single assert statement that parsed cleanly.
struct ValidatedAssert {
  std::string source;      // input with surrounding whitespace removed
  std::string normalized;  // canonical unparse, used for overlap checks
  std::vector<std::string> called_functions;  // plain-name call targets
};

struct AssertCheck {
  std::optional<ValidatedAssert> accepted;
  RejectReason reason = RejectReason::kParseError;
  std::string detail;

  explicit operator bool() const { return accepted.has_value(); }
};

// AST-level gate for test statements. Accepts iff the text is exactly one
// assert statement, free of I/O, imports, dynamic evaluation and dunder
// access. Never throws.
AssertCheck check_assert_syntax(std::string_view test_source);

// Throwing form of check_assert_syntax.
ValidatedAssert validate_assert_syntax(std::string_view test_source);

}  // namespace tdrepair::harness
