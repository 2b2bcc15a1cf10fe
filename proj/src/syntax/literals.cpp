#include "tdrepair/syntax/literals.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "tdrepair/syntax/tokenizer.hpp"
#include "tdrepair/syntax/utf8.hpp"

namespace tdrepair::syntax {
namespace {

int digit_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string strip_underscores(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c != '_') out.push_back(c);
  }
  return out;
}

// Code points CPython's str.isprintable() rejects, approximated for the
// ranges that plausibly appear in test data.
bool is_printable(char32_t c) {
  if (c < 0x20 || c == 0x7F) return false;
  if (c < 0x7F) return true;
  if (c <= 0xA0 || c == 0xAD) return false;
  if (c >= 0x0600 && c <= 0x0605) return false;
  if (c == 0x061C || c == 0x06DD || c == 0x070F || c == 0x180E || c == 0x1680) return false;
  if (c >= 0x2000 && c <= 0x200F) return false;
  if (c >= 0x2028 && c <= 0x202F) return false;
  if (c >= 0x205F && c <= 0x206F) return false;
  if (c == 0x3000 || c == 0xFEFF) return false;
  if (c >= 0xD800 && c <= 0xF8FF) return false;
  if (c >= 0xFFF9 && c <= 0xFFFB) return false;
  if (c == 0xFFFE || c == 0xFFFF) return false;
  if (c >= 0xE0000 && c <= 0xE007F) return false;
  if (c >= 0xF0000) return false;
  return true;
}

void append_hex(std::string& out, char prefix, std::uint32_t value, int width) {
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('\\');
  out.push_back(prefix);
  for (int shift = (width - 1) * 4; shift >= 0; shift -= 4) out.push_back(kHex[(value >> shift) & 0xF]);
}

char choose_quote(bool has_single, bool has_double) { return (has_single && !has_double) ? '"' : '\''; }

// Decodes escape sequences over code points. Bytes literals are ASCII so the
// same routine serves both; `is_bytes` disables \u, \U and \N.
std::u32string decode_escapes(const std::u32string& body, bool is_bytes, std::size_t line) {
  std::u32string out;
  std::size_t i = 0;
  auto hex_run = [&](std::size_t at, int count) -> std::uint32_t {
    std::uint32_t v = 0;
    for (int k = 0; k < count; ++k) {
      if (at + k >= body.size() || body[at + k] > 0x7F || digit_value(static_cast<char>(body[at + k])) < 0 ||
          digit_value(static_cast<char>(body[at + k])) > 15) {
        throw SyntaxError("truncated escape sequence in string literal", line);
      }
      v = v * 16 + static_cast<std::uint32_t>(digit_value(static_cast<char>(body[at + k])));
    }
    return v;
  };
  while (i < body.size()) {
    const char32_t c = body[i];
    if (c != U'\\' || i + 1 >= body.size()) {
      out.push_back(c);
      ++i;
      continue;
    }
    const char32_t e = body[i + 1];
    i += 2;
    switch (e) {
      case U'\n': break;
      case U'\r':
        if (i < body.size() && body[i] == U'\n') ++i;
        break;
      case U'\\': out.push_back(U'\\'); break;
      case U'\'': out.push_back(U'\''); break;
      case U'"': out.push_back(U'"'); break;
      case U'a': out.push_back(7); break;
      case U'b': out.push_back(8); break;
      case U'f': out.push_back(12); break;
      case U'n': out.push_back(10); break;
      case U'r': out.push_back(13); break;
      case U't': out.push_back(9); break;
      case U'v': out.push_back(11); break;
      case U'x':
        out.push_back(hex_run(i, 2));
        i += 2;
        break;
      default:
        if (e >= U'0' && e <= U'7') {
          std::uint32_t v = e - U'0';
          for (int k = 0; k < 2 && i < body.size() && body[i] >= U'0' && body[i] <= U'7'; ++k, ++i) {
            v = v * 8 + (body[i] - U'0');
          }
          out.push_back(is_bytes ? (v & 0xFF) : v);
        } else if (!is_bytes && e == U'u') {
          out.push_back(hex_run(i, 4));
          i += 4;
        } else if (!is_bytes && e == U'U') {
          const std::uint32_t v = hex_run(i, 8);
          if (v > 0x10FFFF) throw SyntaxError("illegal Unicode character in string literal", line);
          out.push_back(v);
          i += 8;
        } else {
          // Unknown escapes (and \N{...}, which needs the Unicode name
          // database) are kept verbatim.
          out.push_back(U'\\');
          out.push_back(e);
        }
    }
  }
  return out;
}

}  // namespace

std::string int_literal_repr(std::string_view token) {
  const std::string digits = strip_underscores(token);
  int base = 10;
  std::size_t start = 0;
  if (digits.size() > 1 && digits[0] == '0') {
    const char b = digits[1];
    if (b == 'x' || b == 'X') base = 16;
    if (b == 'o' || b == 'O') base = 8;
    if (b == 'b' || b == 'B') base = 2;
    if (base != 10) start = 2;
  }
  // Little-endian limbs in base 1e9.
  constexpr std::uint64_t kLimb = 1000000000ULL;
  std::vector<std::uint64_t> limbs{0};
  for (std::size_t i = start; i < digits.size(); ++i) {
    std::uint64_t carry = static_cast<std::uint64_t>(digit_value(digits[i]));
    for (auto& limb : limbs) {
      const std::uint64_t v = limb * static_cast<std::uint64_t>(base) + carry;
      limb = v % kLimb;
      carry = v / kLimb;
    }
    while (carry > 0) {
      limbs.push_back(carry % kLimb);
      carry /= kLimb;
    }
  }
  std::string out = std::to_string(limbs.back());
  for (std::size_t i = limbs.size() - 1; i-- > 0;) {
    std::string part = std::to_string(limbs[i]);
    out += std::string(9 - part.size(), '0') + part;
  }
  return out;
}

std::string float_repr(double value) {
  if (std::isinf(value)) return "1e309";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  const std::string sci(buf, res.ptr);
  const auto e_pos = sci.find('e');
  std::string digits;
  for (std::size_t i = 0; i < e_pos; ++i) {
    if (sci[i] != '.' && sci[i] != '-') digits.push_back(sci[i]);
  }
  const int exponent = std::atoi(sci.c_str() + e_pos + 1);
  const std::string sign = value < 0 ? "-" : "";
  const int n = static_cast<int>(digits.size());
  if (exponent >= -4 && exponent < 16) {
    const int point = exponent + 1;
    if (point <= 0) return sign + "0." + std::string(-point, '0') + digits;
    if (point >= n) return sign + digits + std::string(point - n, '0') + ".0";
    return sign + digits.substr(0, point) + "." + digits.substr(point);
  }
  std::string out = sign + digits.substr(0, 1);
  if (n > 1) out += "." + digits.substr(1);
  out += exponent < 0 ? "e-" : "e+";
  const int mag = std::abs(exponent);
  if (mag < 10) out += "0";
  return out + std::to_string(mag);
}

std::string float_literal_repr(std::string_view token) {
  const std::string clean = strip_underscores(token);
  return float_repr(std::strtod(clean.c_str(), nullptr));
}

std::string imaginary_literal_repr(std::string_view token) {
  std::string clean = strip_underscores(token);
  clean.pop_back();  // j / J
  std::string r = float_repr(std::strtod(clean.c_str(), nullptr));
  if (r.size() > 2 && r.compare(r.size() - 2, 2, ".0") == 0) r.resize(r.size() - 2);
  return r + "j";
}

StringLiteral decode_string_literal(std::string_view token, std::size_t line) {
  std::size_t p = 0;
  bool raw = false, bytes = false, formatted = false;
  std::string prefix;
  while (p < token.size() && token[p] != '\'' && token[p] != '"') {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(token[p])));
    raw |= c == 'r';
    bytes |= c == 'b';
    formatted |= c == 'f';
    prefix.push_back(c);
    ++p;
  }
  const char quote = token[p];
  const std::size_t qlen = token.substr(p, 3) == std::string(3, quote) && token.size() >= p + 6 ? 3 : 1;
  const std::string_view body = token.substr(p + qlen, token.size() - p - 2 * qlen);

  StringLiteral lit;
  if (formatted) {
    lit.kind = StringLiteral::Kind::kFormatted;
    lit.source = prefix + std::string(token.substr(p));
    return lit;
  }
  if (bytes) {
    for (char c : body) {
      if (static_cast<unsigned char>(c) >= 0x80) {
        throw SyntaxError("bytes can only contain ASCII literal characters", line);
      }
    }
  }
  std::u32string cps = decode_utf8(body);
  if (!raw) cps = decode_escapes(cps, bytes, line);
  if (bytes) {
    lit.kind = StringLiteral::Kind::kBytes;
    for (char32_t c : cps) lit.bytes.push_back(static_cast<char>(c & 0xFF));
  } else {
    lit.kind = StringLiteral::Kind::kStr;
    lit.text = std::move(cps);
  }
  return lit;
}

std::string str_repr(std::u32string_view text) {
  const bool has_single = text.find(U'\'') != std::u32string_view::npos;
  const bool has_double = text.find(U'"') != std::u32string_view::npos;
  const char quote = choose_quote(has_single, has_double);
  std::string out(1, quote);
  for (char32_t c : text) {
    if (c == static_cast<char32_t>(quote) || c == U'\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c == U'\t') {
      out += "\\t";
    } else if (c == U'\n') {
      out += "\\n";
    } else if (c == U'\r') {
      out += "\\r";
    } else if (is_printable(c)) {
      append_utf8(out, c);
    } else if (c <= 0xFF) {
      append_hex(out, 'x', c, 2);
    } else if (c <= 0xFFFF) {
      append_hex(out, 'u', c, 4);
    } else {
      append_hex(out, 'U', c, 8);
    }
  }
  out.push_back(quote);
  return out;
}

std::string bytes_repr(std::string_view bytes) {
  const bool has_single = bytes.find('\'') != std::string_view::npos;
  const bool has_double = bytes.find('"') != std::string_view::npos;
  const char quote = choose_quote(has_single, has_double);
  std::string out = "b";
  out.push_back(quote);
  for (char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == static_cast<unsigned char>(quote) || c == '\\') {
      out.push_back('\\');
      out.push_back(ch);
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else if (c < 0x20 || c >= 0x7F) {
      append_hex(out, 'x', c, 2);
    } else {
      out.push_back(ch);
    }
  }
  out.push_back(quote);
  return out;
}

}  // namespace tdrepair::syntax
