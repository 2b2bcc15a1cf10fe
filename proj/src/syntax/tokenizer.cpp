#include "tdrepair/syntax/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

#include "tdrepair/syntax/utf8.hpp"

namespace tdrepair::syntax {
namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

constexpr std::array<std::string_view, 23> kMultiCharOps = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^="};

constexpr std::string_view kSingleCharOps = "+-*/%@&|^~<>()[]{},:.;=";

// Non-ASCII code points we refuse inside identifiers. An approximation of
// the XID tables: punctuation, symbols, spaces and emoji.
bool is_non_identifier(char32_t c) {
  if (c >= 0x80 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c == 0x0964 || c == 0x0965) return true;  // danda
  if (c >= 0x2000 && c <= 0x206F) return true;
  if (c >= 0x2190 && c <= 0x2BFF) return true;
  if (c >= 0x3000 && c <= 0x3003) return true;
  if (c >= 0x3008 && c <= 0x3011) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  if (c == 0xFEFF) return true;
  if (c >= 0x1F000 && c <= 0x1FAFF) return true;
  return false;
}

bool is_non_start(char32_t c) {
  // Decimal digits of common scripts and Bengali combining marks.
  return (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9) ||
         (c >= 0x0966 && c <= 0x096F) || (c >= 0x09E6 && c <= 0x09EF) ||
         (c >= 0xFF10 && c <= 0xFF19) || (c >= 0x0981 && c <= 0x0983) || c == 0x09BC ||
         (c >= 0x09BE && c <= 0x09CD) || c == 0x09D7 || c == 0x09E2 || c == 0x09E3;
}

bool is_id_start(char32_t c) {
  if (c < 0x80) return std::isalpha(static_cast<int>(c)) || c == '_';
  return !is_non_identifier(c) && !is_non_start(c);
}

bool is_id_continue(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<int>(c)) || c == '_';
  return !is_non_identifier(c);
}

bool is_string_prefix(std::string_view p) {
  std::string lower;
  for (char c : p) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "f" || lower == "b" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    if (!is_valid_utf8(src_)) throw SyntaxError("source is not valid UTF-8", 1);
    bool at_line_start = true;
    while (pos_ < src_.size()) {
      if (at_line_start && stack_.empty()) {
        std::size_t j = pos_;
        while (j < src_.size() && (src_[j] == ' ' || src_[j] == '\t' || src_[j] == '\f')) ++j;
        if (j >= src_.size()) break;
        if (src_[j] == '#') {
          pos_ = j;
          skip_comment();
          continue;
        }
        if (src_[j] == '\n' || src_[j] == '\r') {
          pos_ = j;
          consume_newline();
          continue;
        }
        if (j > pos_) throw SyntaxError("unexpected indent", line_);
        at_line_start = false;
        continue;
      }
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else if (c == '\\') {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '\n' || src_[pos_] == '\r')) {
          consume_newline();
        } else {
          throw SyntaxError("unexpected character after line continuation character", line_);
        }
      } else if (c == '\n' || c == '\r') {
        consume_newline();
        if (stack_.empty()) {
          emit_newline();
          at_line_start = true;
        }
      } else if (c == '"' || c == '\'') {
        lex_string(pos_);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
      } else if (is_id_start(peek_code_point())) {
        lex_name_or_prefixed_string();
      } else {
        lex_operator();
      }
    }
    if (!stack_.empty()) {
      throw SyntaxError(std::string("'") + stack_.back() + "' was never closed", line_);
    }
    emit_newline();
    tokens_.push_back(Token{TokenKind::kEnd, "", line_});
    return std::move(tokens_);
  }

 private:
  char32_t peek_code_point() const {
    const auto lead = static_cast<unsigned char>(src_[pos_]);
    if (lead < 0x80) return lead;
    std::size_t len = (lead & 0xE0) == 0xC0 ? 2 : (lead & 0xF0) == 0xE0 ? 3 : 4;
    return decode_utf8(src_.substr(pos_, len)).front();
  }

  std::size_t code_point_length() const {
    const auto lead = static_cast<unsigned char>(src_[pos_]);
    if (lead < 0x80) return 1;
    return (lead & 0xE0) == 0xC0 ? 2 : (lead & 0xF0) == 0xE0 ? 3 : 4;
  }

  void skip_comment() {
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
  }

  void consume_newline() {
    if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
    ++line_;
  }

  void emit_newline() {
    if (!tokens_.empty() && tokens_.back().kind != TokenKind::kNewline) {
      tokens_.push_back(Token{TokenKind::kNewline, "", line_});
    }
  }

  void lex_name_or_prefixed_string() {
    const std::size_t start = pos_;
    std::size_t j = pos_;
    while (j < src_.size() && j - start < 2 && std::isalpha(static_cast<unsigned char>(src_[j]))) ++j;
    for (std::size_t k = start + 1; k <= j; ++k) {
      if (k < src_.size() && (src_[k] == '"' || src_[k] == '\'') &&
          is_string_prefix(src_.substr(start, k - start))) {
        pos_ = k;
        lex_string(start);
        return;
      }
    }
    while (pos_ < src_.size() && is_id_continue(peek_code_point())) pos_ += code_point_length();
    tokens_.push_back(Token{TokenKind::kName, std::string(src_.substr(start, pos_ - start)), line_});
  }

  // pos_ is at the opening quote; token text starts at `start` (prefix included).
  void lex_string(std::size_t start) {
    const std::size_t first_line = line_;
    const char quote = src_[pos_];
    const bool triple = src_.substr(pos_, 3) == std::string(3, quote);
    pos_ += triple ? 3 : 1;
    for (;;) {
      if (pos_ >= src_.size()) {
        throw SyntaxError(triple ? "unterminated triple-quoted string literal"
                                 : "unterminated string literal",
                          first_line);
      }
      const char c = src_[pos_];
      if (c == '\\') {
        ++pos_;
        if (pos_ < src_.size()) {
          if (src_[pos_] == '\n' || src_[pos_] == '\r') {
            consume_newline();
          } else {
            ++pos_;
          }
        }
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (!triple) throw SyntaxError("unterminated string literal", first_line);
        consume_newline();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (src_.substr(pos_, 3) == std::string(3, quote)) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    tokens_.push_back(Token{TokenKind::kString, std::string(src_.substr(start, pos_ - start)), first_line});
  }

  template <typename Pred>
  bool scan_digits(Pred is_digit) {
    bool any = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (is_digit(c)) {
        any = true;
        ++pos_;
      } else if (c == '_' && any && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])) {
        ++pos_;
      } else {
        break;
      }
    }
    return any;
  }

  void lex_number() {
    const std::size_t start = pos_;
    auto dec = [](char c) { return c >= '0' && c <= '9'; };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() && std::strchr("xXoObB", src_[pos_ + 1]) != nullptr) {
      const char base = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ + 1])));
      pos_ += 2;
      if (pos_ < src_.size() && src_[pos_] == '_') ++pos_;
      bool ok = false;
      if (base == 'x') ok = scan_digits([](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; });
      if (base == 'o') ok = scan_digits([](char c) { return c >= '0' && c <= '7'; });
      if (base == 'b') ok = scan_digits([](char c) { return c == '0' || c == '1'; });
      if (!ok) throw SyntaxError("invalid number literal", line_);
    } else {
      const bool int_part = scan_digits(dec);
      bool is_int = true;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        is_int = false;
        ++pos_;
        scan_digits(dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t j = pos_ + 1;
        if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
        if (j < src_.size() && dec(src_[j])) {
          is_int = false;
          pos_ = j;
          scan_digits(dec);
        } else {
          throw SyntaxError("invalid decimal literal", line_);
        }
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) {
        is_int = false;
        ++pos_;
      }
      if (is_int && int_part && src_[start] == '0') {
        for (std::size_t k = start; k < pos_; ++k) {
          if (src_[k] != '0' && src_[k] != '_') {
            throw SyntaxError("leading zeros in decimal integer literals are not permitted", line_);
          }
        }
      }
    }
    if (pos_ < src_.size() && is_id_continue(peek_code_point())) {
      throw SyntaxError("invalid decimal literal", line_);
    }
    tokens_.push_back(Token{TokenKind::kNumber, std::string(src_.substr(start, pos_ - start)), line_});
  }

  void lex_operator() {
    for (auto op : kMultiCharOps) {
      if (src_.substr(pos_, op.size()) == op) {
        tokens_.push_back(Token{TokenKind::kOp, std::string(op), line_});
        pos_ += op.size();
        return;
      }
    }
    const char c = src_[pos_];
    if (kSingleCharOps.find(c) == std::string_view::npos) {
      throw SyntaxError("invalid character '" + std::string(src_.substr(pos_, code_point_length())) + "'", line_);
    }
    if (c == '(' || c == '[' || c == '{') {
      stack_.push_back(c);
    } else if (c == ')' || c == ']' || c == '}') {
      const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (stack_.empty()) throw SyntaxError(std::string("unmatched '") + c + "'", line_);
      if (stack_.back() != open) {
        throw SyntaxError(std::string("closing parenthesis '") + c +
                              "' does not match opening parenthesis '" + stack_.back() + "'",
                          line_);
      }
      stack_.pop_back();
    }
    tokens_.push_back(Token{TokenKind::kOp, std::string(1, c), line_});
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::vector<char> stack_;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_identifier(std::string_view word) {
  if (word.empty() || is_keyword(word) || !is_valid_utf8(word)) return false;
  const std::u32string cps = decode_utf8(word);
  if (!is_id_start(cps.front())) return false;
  return std::all_of(cps.begin() + 1, cps.end(), is_id_continue);
}

}  // namespace tdrepair::syntax
