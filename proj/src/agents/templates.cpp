#include "tdrepair/agents/templates.hpp"

#include <cctype>

#include "tdrepair/errors.hpp"

namespace tdrepair::agents {

namespace embedded {
extern const std::string_view coder_user;
extern const std::string_view debugger_system;
extern const std::string_view debugger_user;
extern const std::string_view testgen_system;
extern const std::string_view testgen_user;
}  // namespace embedded

namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a dotted name at the start of s, or 0.
std::size_t dotted_name(std::string_view s) {
  std::size_t i = 0;
  for (;;) {
    if (i >= s.size() || !is_name_start(s[i])) return 0;
    while (i < s.size() && is_name_char(s[i])) ++i;
    if (i < s.size() && s[i] == '.') {
      ++i;
      continue;
    }
    return i;
  }
}

}  // namespace

const std::vector<std::string_view>& template_ids() {
  static const std::vector<std::string_view> ids = {kCoderUser, kDebuggerSystem, kDebuggerUser, kTestgenSystem,
                                                    kTestgenUser};
  return ids;
}

std::string_view template_text(std::string_view template_id) {
  if (template_id == kCoderUser) return embedded::coder_user;
  if (template_id == kDebuggerSystem) return embedded::debugger_system;
  if (template_id == kDebuggerUser) return embedded::debugger_user;
  if (template_id == kTestgenSystem) return embedded::testgen_system;
  if (template_id == kTestgenUser) return embedded::testgen_user;
  throw ConfigError("unknown prompt template '" + std::string(template_id) + "'");
}

std::vector<Placeholder> find_placeholders(std::string_view text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const std::string_view rest = text.substr(pos + 1);
    if (const std::size_t n = dotted_name(rest); n > 0 && n < rest.size() && rest[n] == '}') {
      out.push_back({pos, n + 2, std::string(rest.substr(0, n))});
      pos += n + 2;
      continue;
    }
    // {'<sep>'.join(<dotted>)}
    if (!rest.empty() && rest[0] == '\'') {
      const std::size_t close_quote = rest.find('\'', 1);
      constexpr std::string_view kJoin = ".join(";
      if (close_quote != std::string_view::npos && rest.substr(close_quote + 1, kJoin.size()) == kJoin) {
        const std::size_t name_at = close_quote + 1 + kJoin.size();
        const std::size_t n = dotted_name(rest.substr(name_at));
        if (n > 0 && rest.substr(name_at + n, 2) == ")}") {
          out.push_back({pos, name_at + n + 3, std::string(rest.substr(name_at, n))});
          pos += name_at + n + 3;
          continue;
        }
      }
    }
    ++pos;
  }
  return out;
}

std::string render_text(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const Placeholder& p : find_placeholders(text)) {
    auto it = bindings.find(p.name);
    if (it == bindings.end()) throw TemplateError(p.name, "no binding for placeholder '" + p.name + "'");
    out.append(text.substr(cursor, p.offset - cursor));
    out.append(it->second);
    cursor = p.offset + p.length;
  }
  out.append(text.substr(cursor));
  return out;
}

std::string render_prompt(std::string_view template_id, const Bindings& bindings) {
  return render_text(template_text(template_id), bindings);
}

}  // namespace tdrepair::agents
