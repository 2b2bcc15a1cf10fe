#pragma once

#include <memory>
#include <string>
#include <vector>

namespace tdrepair::syntax {

enum class NodeKind {
  kName,
  kConstant,
  kFormattedString,
  kUnaryOp,
  kBinOp,
  kBoolOp,
  kCompare,
  kCall,
  kKeyword,
  kStarred,
  kAttribute,
  kSubscript,
  kSlice,
  kTuple,
  kList,
  kSet,
  kDict,
  kListComp,
  kSetComp,
  kDictComp,
  kGeneratorExp,
  kComprehension,
  kLambda,
  kIfExp,
  kNamedExpr,
  kAssert,
};

enum class ConstantKind { kNone, kInt, kFloat, kImaginary, kString, kBytes, kTrue, kFalse, kNoneValue, kEllipsis };

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Param {
  enum class Kind { kPlain, kPositionalOnlyMarker, kVarArgs, kKwArgs };
  Kind kind = Kind::kPlain;
  std::string name;  // empty for the bare `*` and `/` markers
  NodePtr default_value;
};

// Expression tree mirroring the shape of Python's `ast` module.
//
// Child layout by kind (nullable slots marked ?):
//   Name            text = identifier
//   Constant        text = canonical literal, value = decoded str payload
//   FormattedString text = f-string source with normalized prefixes
//   UnaryOp         text = operator; [operand]
//   BinOp           text = operator; [left, right]
//   BoolOp          text = "and" | "or"; [values...]
//   Compare         ops; [left, comparators...]
//   Call            [func, positional-or-starred..., keywords...]
//   Keyword         text = name ("" for **); [value]
//   Starred         [value]
//   Attribute       text = attribute; [value]
//   Subscript       [value, slice]
//   Slice           [lower?, upper?, step?]
//   Tuple/List/Set  [elements...]
//   Dict            [key?, value, key?, value, ...] (null key = ** unpack)
//   ListComp/SetComp/GeneratorExp  [element, comprehension...]
//   DictComp        [key, value, comprehension...]
//   Comprehension   is_async; [target, iter, conditions...]
//   Lambda          params; [body]
//   IfExp           [body, test, orelse]
//   NamedExpr       [target, value]
//   Assert          [test, message?]
struct Node {
  explicit Node(NodeKind k) : kind(k) {}

  NodeKind kind;
  ConstantKind constant = ConstantKind::kNone;
  std::string text;
  std::string value;
  std::vector<std::string> ops;
  std::vector<NodePtr> children;
  std::vector<Param> params;
  bool is_async = false;
};

// Pre-order traversal over every expression node, including lambda defaults.
template <typename Visitor>
void walk(const Node& node, Visitor&& visit) {
  visit(node);
  for (const auto& p : node.params) {
    if (p.default_value) walk(*p.default_value, visit);
  }
  for (const auto& child : node.children) {
    if (child) walk(*child, visit);
  }
}

}  // namespace tdrepair::syntax
