#include "tdrepair/agents/sanitize.hpp"

#include <array>

#include "tdrepair/errors.hpp"

namespace tdrepair::agents {
namespace {

constexpr std::string_view kSpace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(kSpace) - b + 1);
}

// Drops blank leading lines but keeps the indentation of the first real one.
std::string_view trim_code(std::string_view s) {
  const auto last = s.find_last_not_of(kSpace);
  if (last == std::string_view::npos) return {};
  s = s.substr(0, last + 1);
  const auto first = s.find_first_not_of(kSpace);
  const auto line_start = s.rfind('\n', first);
  return line_start == std::string_view::npos ? s : s.substr(line_start + 1);
}

bool is_fence_line(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

bool strip_once(std::string& s) {
  const std::string_view t = trim(s);
  if (t.empty()) return false;

  bool changed = false;
  std::string_view body = t;
  const auto first_nl = body.find('\n');
  if (is_fence_line(body.substr(0, first_nl))) {
    body = first_nl == std::string_view::npos ? std::string_view{} : body.substr(first_nl + 1);
    changed = true;
  }
  const std::string_view trimmed = trim(body);
  const auto last_nl = trimmed.rfind('\n');
  const std::string_view last_line = last_nl == std::string_view::npos ? trimmed : trimmed.substr(last_nl + 1);
  if (!trimmed.empty() && trim(last_line).find_first_not_of('`') == std::string_view::npos &&
      trim(last_line).size() >= 3) {
    body = last_nl == std::string_view::npos ? std::string_view{} : trimmed.substr(0, last_nl);
    changed = true;
  }
  if (changed) {
    s = std::string(trim_code(body));
    return true;
  }

  static constexpr std::array<std::string_view, 5> kWrappers = {"\"\"\"", "'''", "`", "\"", "'"};
  for (const std::string_view q : kWrappers) {
    if (t.size() < 2 * q.size() + 1 || t.substr(0, q.size()) != q || t.substr(t.size() - q.size()) != q) continue;
    const std::string_view inner = t.substr(q.size(), t.size() - 2 * q.size());
    if (inner.find(q) != std::string_view::npos) continue;
    s = std::string(trim_code(inner));
    return true;
  }
  return false;
}

}  // namespace

std::string sanitize_model_output(std::string_view text) {
  std::string s(text);
  while (strip_once(s)) {
  }
  if (trim(s).empty()) throw EmptyGenerationError("model output is empty after removing code fences");
  return s;
}

}  // namespace tdrepair::agents
