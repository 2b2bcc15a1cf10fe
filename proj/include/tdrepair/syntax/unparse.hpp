#pragma once

#include <string>

#include "tdrepair/syntax/ast.hpp"

namespace tdrepair::syntax {

// Canonical source for a node: single spaces around binary operators,
// minimal parentheses, literals in repr() form. Follows the conventions of
// CPython 3.10 ast.unparse with two differences: every BoolOp operand uses
// the same precedence, and a parameterless lambda prints as "lambda: x".
std::string unparse(const Node& node);

}  // namespace tdrepair::syntax
