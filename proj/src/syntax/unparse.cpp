#include "tdrepair/syntax/unparse.hpp"

#include <map>

namespace tdrepair::syntax {
namespace {

enum Precedence : int {
  kNamedExpr = 0,
  kTuple,
  kYield,
  kTest,
  kOr,
  kAnd,
  kNot,
  kCmp,
  kExpr,
  kBor = kExpr,
  kBxor,
  kBand,
  kShift,
  kArith,
  kTerm,
  kFactor,
  kPower,
  kAwait,
  kAtom,
};

int binop_precedence(const std::string& op) {
  static const std::map<std::string, int> table = {
      {"|", kBor},    {"^", kBxor},  {"&", kBand},  {"<<", kShift}, {">>", kShift}, {"+", kArith}, {"-", kArith},
      {"*", kTerm},   {"/", kTerm},  {"//", kTerm}, {"%", kTerm},   {"@", kTerm},   {"**", kPower}};
  return table.at(op);
}

class Writer {
 public:
  std::string out;

  void write(const Node& n, int ctx) {
    switch (n.kind) {
      case NodeKind::kName:
      case NodeKind::kConstant:
      case NodeKind::kFormattedString:
        out += n.text;
        return;
      case NodeKind::kAssert:
        out += "assert ";
        write(*n.children[0], kTest);
        if (n.children.size() > 1) {
          out += ", ";
          write(*n.children[1], kTest);
        }
        return;
      case NodeKind::kTuple: {
        out += '(';
        items(n.children, kTest);
        if (n.children.size() == 1) out += ',';
        out += ')';
        return;
      }
      case NodeKind::kNamedExpr:
        paren_if(ctx > kTuple, [&] {
          write(*n.children[0], kAtom);
          out += " := ";
          write(*n.children[1], kAtom);
        });
        return;
      case NodeKind::kLambda:
        paren_if(ctx > kTest, [&] {
          out += "lambda";
          if (!n.params.empty()) out += ' ';
          params(n);
          out += ": ";
          write(*n.children[0], kTest);
        });
        return;
      case NodeKind::kIfExp:
        paren_if(ctx > kTest, [&] {
          write(*n.children[0], kOr);
          out += " if ";
          write(*n.children[1], kOr);
          out += " else ";
          write(*n.children[2], kTest);
        });
        return;
      case NodeKind::kBoolOp: {
        const int prec = n.text == "or" ? kOr : kAnd;
        paren_if(ctx > prec, [&] {
          for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i > 0) out += " " + n.text + " ";
            write(*n.children[i], prec + 1);
          }
        });
        return;
      }
      case NodeKind::kUnaryOp: {
        const int prec = n.text == "not" ? kNot : kFactor;
        paren_if(ctx > prec, [&] {
          out += n.text;
          if (prec != kFactor) out += ' ';
          write(*n.children[0], prec);
        });
        return;
      }
      case NodeKind::kBinOp: {
        const int prec = binop_precedence(n.text);
        const bool right_assoc = n.text == "**";
        paren_if(ctx > prec, [&] {
          write(*n.children[0], right_assoc ? prec + 1 : prec);
          out += " " + n.text + " ";
          write(*n.children[1], right_assoc ? prec : prec + 1);
        });
        return;
      }
      case NodeKind::kCompare:
        paren_if(ctx > kCmp, [&] {
          write(*n.children[0], kCmp + 1);
          for (std::size_t i = 0; i < n.ops.size(); ++i) {
            out += " " + n.ops[i] + " ";
            write(*n.children[i + 1], kCmp + 1);
          }
        });
        return;
      case NodeKind::kCall: {
        write(*n.children[0], kAtom);
        out += '(';
        bool first = true;
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          if (!first) out += ", ";
          first = false;
          write(*n.children[i], kTest);
        }
        out += ')';
        return;
      }
      case NodeKind::kKeyword:
        if (n.text.empty()) {
          out += "**";
        } else {
          out += n.text + "=";
        }
        write(*n.children[0], kTest);
        return;
      case NodeKind::kStarred:
        out += '*';
        write(*n.children[0], kExpr);
        return;
      case NodeKind::kAttribute: {
        const Node& value = *n.children[0];
        write(value, kAtom);
        if (value.kind == NodeKind::kConstant && value.constant == ConstantKind::kInt) out += ' ';
        out += "." + n.text;
        return;
      }
      case NodeKind::kSubscript: {
        write(*n.children[0], kAtom);
        out += '[';
        const Node& slice = *n.children[1];
        if (slice.kind == NodeKind::kTuple && !slice.children.empty()) {
          items(slice.children, kTest);
          if (slice.children.size() == 1) out += ',';
        } else {
          write(slice, kTest);
        }
        out += ']';
        return;
      }
      case NodeKind::kSlice:
        if (n.children[0]) write(*n.children[0], kTest);
        out += ':';
        if (n.children[1]) write(*n.children[1], kTest);
        if (n.children[2]) {
          out += ':';
          write(*n.children[2], kTest);
        }
        return;
      case NodeKind::kList:
        out += '[';
        items(n.children, kTest);
        out += ']';
        return;
      case NodeKind::kSet:
        out += '{';
        items(n.children, kTest);
        out += '}';
        return;
      case NodeKind::kDict:
        out += '{';
        for (std::size_t i = 0; i + 1 < n.children.size(); i += 2) {
          if (i > 0) out += ", ";
          if (n.children[i]) {
            write(*n.children[i], kTest);
            out += ": ";
            write(*n.children[i + 1], kTest);
          } else {
            out += "**";
            write(*n.children[i + 1], kExpr);
          }
        }
        out += '}';
        return;
      case NodeKind::kListComp:
        comprehension(n, "[", "]", 1);
        return;
      case NodeKind::kSetComp:
        comprehension(n, "{", "}", 1);
        return;
      case NodeKind::kGeneratorExp:
        comprehension(n, "(", ")", 1);
        return;
      case NodeKind::kDictComp:
        comprehension(n, "{", "}", 2);
        return;
      case NodeKind::kComprehension:
        out += n.is_async ? " async for " : " for ";
        write(*n.children[0], kTest);
        out += " in ";
        write(*n.children[1], kOr);
        for (std::size_t i = 2; i < n.children.size(); ++i) {
          out += " if ";
          write(*n.children[i], kOr);
        }
        return;
    }
  }

 private:
  template <typename Body>
  void paren_if(bool cond, Body body) {
    if (cond) out += '(';
    body();
    if (cond) out += ')';
  }

  void items(const std::vector<NodePtr>& nodes, int ctx) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0) out += ", ";
      write(*nodes[i], ctx);
    }
  }

  void comprehension(const Node& n, const char* open, const char* close, std::size_t head) {
    out += open;
    write(*n.children[0], kTest);
    if (head == 2) {
      out += ": ";
      write(*n.children[1], kTest);
    }
    for (std::size_t i = head; i < n.children.size(); ++i) write(*n.children[i], kTest);
    out += close;
  }

  void params(const Node& n) {
    for (std::size_t i = 0; i < n.params.size(); ++i) {
      const Param& p = n.params[i];
      if (i > 0) out += ", ";
      switch (p.kind) {
        case Param::Kind::kPositionalOnlyMarker: out += '/'; break;
        case Param::Kind::kVarArgs: out += "*" + p.name; break;
        case Param::Kind::kKwArgs: out += "**" + p.name; break;
        case Param::Kind::kPlain:
          out += p.name;
          if (p.default_value) {
            out += '=';
            write(*p.default_value, kTest);
          }
          break;
      }
    }
  }
};

}  // namespace

std::string unparse(const Node& node) {
  Writer w;
  w.write(node, kTest);
  return std::move(w.out);
}

}  // namespace tdrepair::syntax
