#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace tdrepair::syntax {

// Canonical spellings follow CPython's repr(): integers in decimal, floats in
// shortest round-trip form, strings single-quoted unless that needs escapes.

std::string int_literal_repr(std::string_view token);
std::string float_repr(double value);
std::string float_literal_repr(std::string_view token);
std::string imaginary_literal_repr(std::string_view token);

struct StringLiteral {
  enum class Kind { kStr, kBytes, kFormatted };
  Kind kind = Kind::kStr;
  std::u32string text;   // decoded payload for kStr
  std::string bytes;     // decoded payload for kBytes
  std::string source;    // normalized source for kFormatted
};

// Decodes one STRING token (prefix and quotes included). Throws SyntaxError.
StringLiteral decode_string_literal(std::string_view token, std::size_t line);

std::string str_repr(std::u32string_view text);
std::string bytes_repr(std::string_view bytes);

}  // namespace tdrepair::syntax
