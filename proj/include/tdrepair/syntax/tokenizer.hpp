#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tdrepair/errors.hpp"

namespace tdrepair::syntax {

// Raised for any lexical or grammatical error in candidate-language source.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class TokenKind { kName, kNumber, kString, kOp, kNewline, kEnd };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t line = 1;
};

// Python 3 lexical grammar restricted to what single statements need:
// no INDENT/DEDENT tokens, an indented logical line is an error.
// Comments and blank lines are dropped; NEWLINE separates logical lines.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word);

// True for a non-keyword identifier.
bool is_identifier(std::string_view word);

}  // namespace tdrepair::syntax
