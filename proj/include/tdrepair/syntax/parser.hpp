#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "tdrepair/syntax/ast.hpp"

namespace tdrepair::syntax {

enum class StatementKind {
  kAssert,
  kExpression,
  kAssignment,
  // Keyword-led statements (import, def, for, ...). Only bracket balance and
  // lexical validity are checked for these.
  kOther,
};

struct Statement {
  StatementKind kind;
  NodePtr node;  // null for kOther
  std::size_t line = 1;
};

// Splits source into simple statements (on NEWLINE and `;`) and parses each.
// Throws SyntaxError on the first malformed statement.
std::vector<Statement> parse_statements(std::string_view source);

// Parses source consisting of exactly one expression (tuples allowed).
NodePtr parse_expression(std::string_view source);

}  // namespace tdrepair::syntax
