#include "tdrepair/syntax/parser.hpp"

#include <algorithm>
#include <array>

#include "tdrepair/syntax/literals.hpp"
#include "tdrepair/syntax/tokenizer.hpp"
#include "tdrepair/syntax/utf8.hpp"

namespace tdrepair::syntax {
namespace {

constexpr std::array<std::string_view, 18> kStatementKeywords = {
    "pass", "break", "continue", "return", "raise", "del",  "global", "nonlocal", "import",
    "from", "if",    "while",    "for",    "try",   "with", "def",    "class",    "async"};

constexpr std::array<std::string_view, 13> kAugmentedAssign = {
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};

NodePtr make(NodeKind kind) { return std::make_unique<Node>(kind); }

NodePtr make(NodeKind kind, std::string text) {
  auto n = make(kind);
  n->text = std::move(text);
  return n;
}

NodePtr make(NodeKind kind, std::string text, NodePtr a, NodePtr b = nullptr) {
  auto n = make(kind, std::move(text));
  n->children.push_back(std::move(a));
  if (b) n->children.push_back(std::move(b));
  return n;
}

bool is_number_imaginary(std::string_view t) { return t.back() == 'j' || t.back() == 'J'; }

bool is_number_float(std::string_view t) {
  if (t.size() > 1 && t[0] == '0' && std::string_view("xXoObB").find(t[1]) != std::string_view::npos) {
    return false;
  }
  return t.find_first_of(".eE") != std::string_view::npos;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Statement statement() {
    Statement st{StatementKind::kExpression, nullptr, peek().line};
    const Token& first = peek();
    if (first.kind == TokenKind::kName && first.text == "assert") {
      advance();
      auto node = make(NodeKind::kAssert);
      node->children.push_back(expression());
      if (accept_op(",")) node->children.push_back(expression());
      st.kind = StatementKind::kAssert;
      st.node = std::move(node);
    } else if (first.kind == TokenKind::kName &&
               std::find(kStatementKeywords.begin(), kStatementKeywords.end(), first.text) !=
                   kStatementKeywords.end()) {
      st.kind = StatementKind::kOther;
      i_ = toks_.size() - 1;
    } else if (first.kind == TokenKind::kName &&
               (first.text == "elif" || first.text == "else" || first.text == "except" ||
                first.text == "finally" || first.text == "yield")) {
      fail(first.text == "yield" ? "'yield' outside function" : "invalid syntax");
    } else {
      st.node = star_expressions();
      if (at_op("=")) {
        st.kind = StatementKind::kAssignment;
        while (accept_op("=")) star_expressions();
      } else if (peek().kind == TokenKind::kOp &&
                 std::find(kAugmentedAssign.begin(), kAugmentedAssign.end(), peek().text) !=
                     kAugmentedAssign.end()) {
        advance();
        st.kind = StatementKind::kAssignment;
        star_expressions();
      } else if (accept_op(":")) {
        st.kind = StatementKind::kAssignment;
        expression();
        if (accept_op("=")) star_expressions();
      }
    }
    expect_end();
    return st;
  }

  NodePtr whole_expression() {
    auto node = star_expressions();
    accept_newline();
    expect_end();
    return node;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  const Token& advance() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  bool at_op(std::string_view op, std::size_t k = 0) const {
    return peek(k).kind == TokenKind::kOp && peek(k).text == op;
  }
  bool at_kw(std::string_view kw, std::size_t k = 0) const {
    return peek(k).kind == TokenKind::kName && peek(k).text == kw;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  void accept_newline() {
    while (peek().kind == TokenKind::kNewline) advance();
  }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
  }
  void expect_end() {
    if (peek().kind != TokenKind::kEnd) fail("invalid syntax");
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string near = t.kind == TokenKind::kEnd ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(what + " near " + near, t.line);
  }

  bool at_for_clause() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

  // star_expressions: star_expression (',' star_expression)* [',']
  NodePtr star_expressions() {
    auto first = star_expression();
    if (!at_op(",")) return first;
    auto tuple = make(NodeKind::kTuple);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      tuple->children.push_back(star_expression());
    }
    return tuple;
  }

  NodePtr star_expression() {
    if (accept_op("*")) return make(NodeKind::kStarred, "", bitwise_or());
    return expression();
  }

  NodePtr star_named_expression() {
    if (accept_op("*")) return make(NodeKind::kStarred, "", bitwise_or());
    return named_expression();
  }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kName:
        return !is_keyword(t.text) || t.text == "True" || t.text == "False" || t.text == "None" ||
               t.text == "not" || t.text == "lambda" || t.text == "await";
      case TokenKind::kOp:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
               t.text == "~" || t.text == "..." || t.text == "*";
      default:
        return false;
    }
  }

  NodePtr named_expression() {
    if (peek().kind == TokenKind::kName && !is_keyword(peek().text) && at_op(":=", 1)) {
      auto target = make(NodeKind::kName, advance().text);
      advance();
      return make(NodeKind::kNamedExpr, "", std::move(target), expression());
    }
    auto e = expression();
    if (at_op(":=")) fail("cannot use assignment expressions with this target");
    return e;
  }

  NodePtr expression() {
    if (at_kw("lambda")) return lambda();
    auto body = disjunction();
    if (!accept_kw("if")) return body;
    auto test = disjunction();
    expect_kw("else");
    auto node = make(NodeKind::kIfExp);
    node->children.push_back(std::move(body));
    node->children.push_back(std::move(test));
    node->children.push_back(expression());
    return node;
  }

  NodePtr lambda() {
    expect_kw("lambda");
    auto node = make(NodeKind::kLambda);
    bool seen_default = false;
    bool seen_star = false;
    while (!at_op(":")) {
      Param p;
      if (accept_op("/")) {
        p.kind = Param::Kind::kPositionalOnlyMarker;
      } else if (accept_op("**")) {
        p.kind = Param::Kind::kKwArgs;
        p.name = identifier();
      } else if (accept_op("*")) {
        if (seen_star) fail("* argument may appear only once");
        seen_star = true;
        p.kind = Param::Kind::kVarArgs;
        if (peek().kind == TokenKind::kName && !is_keyword(peek().text)) p.name = identifier();
      } else {
        p.name = identifier();
        if (accept_op("=")) {
          p.default_value = expression();
          seen_default = true;
        } else if (seen_default && !seen_star) {
          fail("non-default argument follows default argument");
        }
      }
      node->params.push_back(std::move(p));
      if (node->params.back().kind == Param::Kind::kKwArgs) {
        accept_op(",");
        break;
      }
      if (!accept_op(",")) break;
    }
    expect_op(":");
    node->children.push_back(expression());
    return node;
  }

  std::string identifier() {
    if (peek().kind != TokenKind::kName || is_keyword(peek().text)) fail("expected identifier");
    return advance().text;
  }

  NodePtr disjunction() {
    auto first = conjunction();
    if (!at_kw("or")) return first;
    auto node = make(NodeKind::kBoolOp, "or");
    node->children.push_back(std::move(first));
    while (accept_kw("or")) node->children.push_back(conjunction());
    return node;
  }

  NodePtr conjunction() {
    auto first = inversion();
    if (!at_kw("and")) return first;
    auto node = make(NodeKind::kBoolOp, "and");
    node->children.push_back(std::move(first));
    while (accept_kw("and")) node->children.push_back(inversion());
    return node;
  }

  NodePtr inversion() {
    if (accept_kw("not")) return make(NodeKind::kUnaryOp, "not", inversion());
    return comparison();
  }

  std::string comparison_operator() {
    const Token& t = peek();
    if (t.kind == TokenKind::kOp &&
        (t.text == "==" || t.text == "!=" || t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=")) {
      return advance().text;
    }
    if (at_kw("in")) {
      advance();
      return "in";
    }
    if (at_kw("not") && at_kw("in", 1)) {
      advance();
      advance();
      return "not in";
    }
    if (at_kw("is")) {
      advance();
      return accept_kw("not") ? "is not" : "is";
    }
    return {};
  }

  NodePtr comparison() {
    auto left = bitwise_or();
    std::string op = comparison_operator();
    if (op.empty()) return left;
    auto node = make(NodeKind::kCompare);
    node->children.push_back(std::move(left));
    while (!op.empty()) {
      node->ops.push_back(op);
      node->children.push_back(bitwise_or());
      op = comparison_operator();
    }
    return node;
  }

  template <typename Next>
  NodePtr left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    auto left = (this->*next)();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::kOp || std::find(ops.begin(), ops.end(), t.text) == ops.end()) return left;
      std::string op = advance().text;
      left = make(NodeKind::kBinOp, op, std::move(left), (this->*next)());
    }
  }

  NodePtr bitwise_or() { return left_assoc({"|"}, &Parser::bitwise_xor); }
  NodePtr bitwise_xor() { return left_assoc({"^"}, &Parser::bitwise_and); }
  NodePtr bitwise_and() { return left_assoc({"&"}, &Parser::shift_expr); }
  NodePtr shift_expr() { return left_assoc({"<<", ">>"}, &Parser::sum); }
  NodePtr sum() { return left_assoc({"+", "-"}, &Parser::term); }
  NodePtr term() { return left_assoc({"*", "/", "//", "%", "@"}, &Parser::factor); }

  NodePtr factor() {
    if (at_op("-") || at_op("+") || at_op("~")) {
      std::string op = advance().text;
      return make(NodeKind::kUnaryOp, op, factor());
    }
    return power();
  }

  NodePtr power() {
    if (at_kw("await")) fail("'await' outside function");
    auto base = primary();
    if (!accept_op("**")) return base;
    return make(NodeKind::kBinOp, "**", std::move(base), factor());
  }

  NodePtr primary() {
    auto node = atom();
    for (;;) {
      if (accept_op(".")) {
        node = make(NodeKind::kAttribute, identifier(), std::move(node));
      } else if (accept_op("(")) {
        node = call(std::move(node));
      } else if (accept_op("[")) {
        auto slice = slices();
        expect_op("]");
        node = make(NodeKind::kSubscript, "", std::move(node), std::move(slice));
      } else {
        return node;
      }
    }
  }

  NodePtr call(NodePtr func) {
    auto node = make(NodeKind::kCall);
    node->children.push_back(std::move(func));
    std::vector<NodePtr> positional;
    std::vector<NodePtr> keywords;
    bool seen_keyword = false;
    bool seen_double_star = false;
    while (!at_op(")")) {
      if (accept_op("*")) {
        if (seen_double_star) fail("iterable argument unpacking follows keyword argument unpacking");
        positional.push_back(make(NodeKind::kStarred, "", expression()));
      } else if (accept_op("**")) {
        seen_double_star = true;
        keywords.push_back(make(NodeKind::kKeyword, "", expression()));
      } else if (peek().kind == TokenKind::kName && !is_keyword(peek().text) && at_op("=", 1)) {
        std::string name = advance().text;
        advance();
        seen_keyword = true;
        keywords.push_back(make(NodeKind::kKeyword, name, expression()));
      } else {
        if (seen_double_star) fail("positional argument follows keyword argument unpacking");
        if (seen_keyword) fail("positional argument follows keyword argument");
        auto arg = named_expression();
        if (at_for_clause()) {
          if (!positional.empty() || !keywords.empty()) fail("Generator expression must be parenthesized");
          auto gen = make(NodeKind::kGeneratorExp);
          gen->children.push_back(std::move(arg));
          comprehension_clauses(*gen);
          positional.push_back(std::move(gen));
          if (!at_op(")")) fail("Generator expression must be parenthesized");
          break;
        }
        positional.push_back(std::move(arg));
      }
      if (!accept_op(",")) break;
    }
    expect_op(")");
    for (auto& p : positional) node->children.push_back(std::move(p));
    for (auto& k : keywords) node->children.push_back(std::move(k));
    return node;
  }

  NodePtr slices() {
    auto first = slice_item();
    if (!at_op(",")) return first;
    auto tuple = make(NodeKind::kTuple);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      tuple->children.push_back(slice_item());
    }
    return tuple;
  }

  NodePtr slice_item() {
    NodePtr lower;
    if (!at_op(":")) {
      lower = named_expression();
      if (!at_op(":")) return lower;
    }
    auto node = make(NodeKind::kSlice);
    expect_op(":");
    NodePtr upper;
    NodePtr step;
    if (!at_op(":") && !at_op(",") && !at_op("]")) upper = expression();
    if (accept_op(":")) {
      if (!at_op(",") && !at_op("]")) step = expression();
    }
    node->children.push_back(std::move(lower));
    node->children.push_back(std::move(upper));
    node->children.push_back(std::move(step));
    return node;
  }

  void comprehension_clauses(Node& owner) {
    while (at_for_clause()) {
      auto clause = make(NodeKind::kComprehension);
      clause->is_async = accept_kw("async");
      expect_kw("for");
      clause->children.push_back(target_list());
      expect_kw("in");
      clause->children.push_back(disjunction());
      while (accept_kw("if")) clause->children.push_back(disjunction());
      owner.children.push_back(std::move(clause));
    }
  }

  NodePtr single_target() {
    NodePtr t = accept_op("*") ? make(NodeKind::kStarred, "", bitwise_or()) : bitwise_or();
    check_target(*t);
    return t;
  }

  NodePtr target_list() {
    auto first = single_target();
    if (!at_op(",")) return first;
    auto tuple = make(NodeKind::kTuple);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_kw("in")) break;
      tuple->children.push_back(single_target());
    }
    return tuple;
  }

  void check_target(const Node& t) const {
    switch (t.kind) {
      case NodeKind::kName:
      case NodeKind::kAttribute:
      case NodeKind::kSubscript:
        return;
      case NodeKind::kStarred:
        check_target(*t.children[0]);
        return;
      case NodeKind::kTuple:
      case NodeKind::kList:
        for (const auto& c : t.children) check_target(*c);
        return;
      default:
        fail("cannot assign to expression");
    }
  }

  NodePtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kName: return name_atom();
      case TokenKind::kNumber: return number_atom();
      case TokenKind::kString: return string_atom();
      case TokenKind::kOp:
        if (accept_op("...")) {
          auto n = make(NodeKind::kConstant, "...");
          n->constant = ConstantKind::kEllipsis;
          return n;
        }
        if (accept_op("(")) return paren_atom();
        if (accept_op("[")) return list_atom();
        if (accept_op("{")) return brace_atom();
        break;
      default:
        break;
    }
    fail("invalid syntax");
  }

  NodePtr name_atom() {
    const std::string text = advance().text;
    if (text == "True" || text == "False" || text == "None") {
      auto n = make(NodeKind::kConstant, text);
      n->constant = text == "True" ? ConstantKind::kTrue : text == "False" ? ConstantKind::kFalse : ConstantKind::kNoneValue;
      return n;
    }
    if (text == "yield") {
      --i_;
      fail("'yield' outside function");
    }
    if (is_keyword(text)) {
      --i_;
      fail("invalid syntax");
    }
    return make(NodeKind::kName, text);
  }

  NodePtr number_atom() {
    const std::string text = advance().text;
    auto n = make(NodeKind::kConstant);
    if (is_number_imaginary(text)) {
      n->constant = ConstantKind::kImaginary;
      n->text = imaginary_literal_repr(text);
    } else if (is_number_float(text)) {
      n->constant = ConstantKind::kFloat;
      n->text = float_literal_repr(text);
    } else {
      n->constant = ConstantKind::kInt;
      n->text = int_literal_repr(text);
    }
    return n;
  }

  NodePtr string_atom() {
    std::vector<StringLiteral> parts;
    const std::size_t line = peek().line;
    while (peek().kind == TokenKind::kString) parts.push_back(decode_string_literal(advance().text, line));
    const bool any_bytes = std::any_of(parts.begin(), parts.end(),
                                       [](const auto& p) { return p.kind == StringLiteral::Kind::kBytes; });
    const bool all_bytes = std::all_of(parts.begin(), parts.end(),
                                       [](const auto& p) { return p.kind == StringLiteral::Kind::kBytes; });
    if (any_bytes && !all_bytes) fail("cannot mix bytes and nonbytes literals");
    const bool any_formatted = std::any_of(parts.begin(), parts.end(),
                                           [](const auto& p) { return p.kind == StringLiteral::Kind::kFormatted; });
    if (any_formatted) {
      auto n = make(NodeKind::kFormattedString);
      for (const auto& p : parts) {
        if (!n->text.empty()) n->text += ' ';
        n->text += p.kind == StringLiteral::Kind::kFormatted ? p.source : str_repr(p.text);
      }
      return n;
    }
    auto n = make(NodeKind::kConstant);
    if (all_bytes) {
      std::string joined;
      for (const auto& p : parts) joined += p.bytes;
      n->constant = ConstantKind::kBytes;
      n->text = bytes_repr(joined);
      n->value = joined;
      return n;
    }
    std::u32string joined;
    for (const auto& p : parts) joined += p.text;
    n->constant = ConstantKind::kString;
    n->text = str_repr(joined);
    for (char32_t c : joined) append_utf8(n->value, c);
    return n;
  }

  NodePtr paren_atom() {
    if (accept_op(")")) return make(NodeKind::kTuple);
    if (at_kw("yield")) fail("'yield' outside function");
    auto first = star_named_expression();
    if (at_for_clause()) {
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      auto gen = make(NodeKind::kGeneratorExp);
      gen->children.push_back(std::move(first));
      comprehension_clauses(*gen);
      expect_op(")");
      return gen;
    }
    if (accept_op(")")) {
      if (first->kind == NodeKind::kStarred) fail("cannot use starred expression here");
      return first;
    }
    auto tuple = make(NodeKind::kTuple);
    tuple->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(")")) break;
      tuple->children.push_back(star_named_expression());
    }
    expect_op(")");
    return tuple;
  }

  NodePtr list_atom() {
    auto list = make(NodeKind::kList);
    if (accept_op("]")) return list;
    auto first = star_named_expression();
    if (at_for_clause()) {
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      auto comp = make(NodeKind::kListComp);
      comp->children.push_back(std::move(first));
      comprehension_clauses(*comp);
      expect_op("]");
      return comp;
    }
    list->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      list->children.push_back(star_named_expression());
    }
    expect_op("]");
    return list;
  }

  NodePtr brace_atom() {
    if (accept_op("}")) return make(NodeKind::kDict);
    if (at_op("**")) return dict_rest(make(NodeKind::kDict));
    if (at_op("*")) return set_rest(star_named_expression());
    auto first = named_expression();
    if (!accept_op(":")) return set_rest(std::move(first));
    auto value = expression();
    if (at_for_clause()) {
      auto comp = make(NodeKind::kDictComp);
      comp->children.push_back(std::move(first));
      comp->children.push_back(std::move(value));
      comprehension_clauses(*comp);
      expect_op("}");
      return comp;
    }
    auto dict = make(NodeKind::kDict);
    dict->children.push_back(std::move(first));
    dict->children.push_back(std::move(value));
    if (!accept_op(",")) {
      expect_op("}");
      return dict;
    }
    return dict_rest(std::move(dict));
  }

  NodePtr dict_rest(NodePtr dict) {
    while (!at_op("}")) {
      if (accept_op("**")) {
        dict->children.push_back(nullptr);
        dict->children.push_back(bitwise_or());
      } else {
        dict->children.push_back(expression());
        expect_op(":");
        dict->children.push_back(expression());
      }
      if (!accept_op(",")) break;
    }
    expect_op("}");
    return dict;
  }

  NodePtr set_rest(NodePtr first) {
    if (at_for_clause()) {
      if (first->kind == NodeKind::kStarred) fail("iterable unpacking cannot be used in comprehension");
      auto comp = make(NodeKind::kSetComp);
      comp->children.push_back(std::move(first));
      comprehension_clauses(*comp);
      expect_op("}");
      return comp;
    }
    auto set = make(NodeKind::kSet);
    set->children.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("}")) break;
      set->children.push_back(star_named_expression());
    }
    expect_op("}");
    return set;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<Statement> parse_statements(std::string_view source) {
  const std::vector<Token> tokens = tokenize(source);
  std::vector<Statement> out;
  std::vector<Token> current;
  int depth = 0;
  auto flush = [&](std::size_t line, bool require_nonempty) {
    if (current.empty()) {
      if (require_nonempty) throw SyntaxError("invalid syntax near ';'", line);
      return;
    }
    current.push_back(Token{TokenKind::kEnd, "", line});
    out.push_back(Parser(std::move(current)).statement());
    current.clear();
  };
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::kOp && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
    if (t.kind == TokenKind::kOp && (t.text == ")" || t.text == "]" || t.text == "}")) --depth;
    if (depth == 0 && t.kind == TokenKind::kOp && t.text == ";") {
      flush(t.line, true);
      continue;
    }
    if (t.kind == TokenKind::kNewline || t.kind == TokenKind::kEnd) {
      flush(t.line, false);
      continue;
    }
    current.push_back(t);
  }
  return out;
}

NodePtr parse_expression(std::string_view source) {
  std::vector<Token> tokens = tokenize(source);
  if (tokens.size() <= 1) throw SyntaxError("empty expression", 1);
  return Parser(std::move(tokens)).whole_expression();
}

}  // namespace tdrepair::syntax
