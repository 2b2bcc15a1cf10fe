#include "tdrepair/harness/trace.hpp"

#include <algorithm>
#include <map>

#include "tdrepair/errors.hpp"
#include "tdrepair/syntax/utf8.hpp"

namespace tdrepair::harness {
namespace {

constexpr std::string_view kTracebackHeader = "Traceback (most recent call last):";
constexpr std::string_view kElision = "\n...\n";

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  while (!s.empty()) {
    const auto nl = s.find('\n');
    lines.push_back(s.substr(0, nl));
    if (nl == std::string_view::npos) break;
    s.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string_view::npos) lines.pop_back();
  return lines;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string_view utf8_suffix(std::string_view s, std::size_t n) {
  if (s.size() <= n) return s;
  std::size_t start = s.size() - n;
  while (start < s.size() && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) ++start;
  return s.substr(start);
}

std::string_view utf8_prefix(std::string_view s, std::size_t n) { return s.substr(0, syntax::utf8_floor(s, n)); }

std::string summary_line(const TraceEntry& e) {
  if (e.exception_type.empty()) return e.message;
  if (e.message.empty()) return e.exception_type;
  return e.exception_type + ": " + e.message;
}

std::string render(const TraceEntry& e, const std::string* same_as) {
  std::string out = "Test " + std::to_string(e.test_index + 1) + " (" + to_string(e.status) + ")\n";
  std::string_view body = e.traceback_excerpt;
  if (same_as) {
    out += ">>> " + e.assert_source + "\n" + *same_as;
  } else {
    out += body;
  }
  const std::string summary = summary_line(e);
  std::string_view tail = out;
  while (!tail.empty() && tail.back() == '\n') tail.remove_suffix(1);
  if (!summary.empty() && (tail.size() < summary.size() || tail.substr(tail.size() - summary.size()) != summary)) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += summary;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

// Keeps the opening lines (test header and assert) and as much of the end
// (innermost frames, exception) as fits.
std::string clip_block(std::string_view block, std::size_t allowed) {
  if (block.size() <= allowed) return std::string(block);
  if (allowed <= kElision.size() * 2) return std::string(utf8_prefix(block, allowed));
  std::size_t head = block.find('\n');
  if (head != std::string_view::npos) head = block.find('\n', head + 1);
  head = std::min(head == std::string_view::npos ? block.size() : head, allowed / 2);
  const std::string_view front = utf8_prefix(block, head);
  const std::string_view back = utf8_suffix(block, allowed - front.size() - kElision.size());
  return std::string(front) + std::string(kElision) + std::string(back);
}

std::string marker(std::size_t shown, std::size_t total) {
  return "\n[trace truncated: showing " + std::to_string(shown) + " of " + std::to_string(total) + " failing tests]";
}

}  // namespace

std::string traceback_excerpt(std::string_view traceback, std::size_t frames) {
  const auto lines = split_lines(traceback);
  std::size_t header = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (starts_with(lines[i], kTracebackHeader)) {
      header = i;
      break;
    }
  }
  std::string out;
  if (header == lines.size()) {
    for (const auto& l : lines) out.append(l).push_back('\n');
    if (!out.empty()) out.pop_back();
    return out;
  }

  std::vector<std::vector<std::string_view>> frame_lines;
  std::size_t i = header + 1;
  for (; i < lines.size(); ++i) {
    if (starts_with(lines[i], "  File ")) {
      frame_lines.emplace_back().push_back(lines[i]);
    } else if (starts_with(lines[i], " ") && !frame_lines.empty()) {
      frame_lines.back().push_back(lines[i]);
    } else {
      break;
    }
  }
  out.append(lines[header]).push_back('\n');
  const std::size_t keep = std::min(frames, frame_lines.size());
  if (keep < frame_lines.size()) {
    out += "  ... " + std::to_string(frame_lines.size() - keep) + " outer frame(s) omitted\n";
  }
  for (std::size_t f = frame_lines.size() - keep; f < frame_lines.size(); ++f) {
    for (const auto& l : frame_lines[f]) out.append(l).push_back('\n');
  }
  for (; i < lines.size(); ++i) out.append(lines[i]).push_back('\n');
  out.pop_back();
  return out;
}

DistilledTrace distill_trace(const ExecutionReport& report, const std::vector<std::string>& suite,
                             std::size_t budget) {
  if (report.passed()) throw ContractViolation("distill_trace called on a passing report");
  if (report.outcomes.size() != suite.size()) {
    throw ContractViolation("report has " + std::to_string(report.outcomes.size()) + " outcomes for " +
                            std::to_string(suite.size()) + " tests");
  }
  if (budget < kMinTraceBudget) {
    throw ContractViolation("trace budget must be at least " + std::to_string(kMinTraceBudget));
  }

  DistilledTrace trace;
  std::vector<TraceEntry> all;
  std::vector<std::string> blocks;
  std::map<std::string, std::size_t> seen_tracebacks;
  for (const auto& o : report.outcomes) {
    if (o.status == TestStatus::kPass) continue;
    TraceEntry e;
    e.test_index = o.test_index;
    e.assert_source = suite.at(o.test_index);
    e.status = o.status;
    e.exception_type = o.exception_type.value_or("");
    e.message = o.message.value_or("");
    e.traceback_excerpt = o.traceback ? traceback_excerpt(*o.traceback) : std::string();
    if (e.traceback_excerpt.find(e.assert_source) == std::string::npos) {
      e.traceback_excerpt = ">>> " + e.assert_source + (e.traceback_excerpt.empty() ? "" : "\n") + e.traceback_excerpt;
    }

    std::string same;
    if (o.traceback && !o.traceback->empty()) {
      auto [it, inserted] = seen_tracebacks.emplace(*o.traceback, o.test_index);
      if (!inserted) same = "(same traceback as test " + std::to_string(it->second + 1) + ")";
    }
    blocks.push_back(render(e, same.empty() ? nullptr : &same));
    trace.failing_indices.push_back(o.test_index);
    all.push_back(std::move(e));
  }

  std::string full;
  for (const auto& b : blocks) {
    if (!full.empty()) full += "\n\n";
    full += b;
  }
  if (full.size() <= budget) {
    trace.entries = std::move(all);
    trace.text = std::move(full);
    trace.total_chars = trace.text.size();
    return trace;
  }

  trace.truncated = true;
  const std::size_t reserve = marker(all.size(), all.size()).size();
  const std::size_t allowed = budget - reserve;
  std::string text;
  std::size_t shown = 0;
  for (const auto& b : blocks) {
    const std::size_t sep = text.empty() ? 0 : 2;
    if (text.size() + sep + b.size() > allowed) break;
    if (sep) text += "\n\n";
    text += b;
    ++shown;
  }
  if (shown == 0) {
    text = clip_block(blocks.front(), allowed);
    shown = 1;
  }
  text += marker(shown, all.size());
  all.resize(shown);
  trace.entries = std::move(all);
  trace.text = std::move(text);
  trace.total_chars = trace.text.size();
  return trace;
}

nlohmann::json trace_to_json(const DistilledTrace& t) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : t.entries) {
    entries.push_back({{"test_index", e.test_index},
                       {"assert_source", e.assert_source},
                       {"status", to_string(e.status)},
                       {"exception_type", e.exception_type},
                       {"message", e.message},
                       {"traceback_excerpt", e.traceback_excerpt}});
  }
  return {{"entries", std::move(entries)},
          {"failing_indices", t.failing_indices},
          {"total_chars", t.total_chars},
          {"truncated", t.truncated},
          {"text", t.text}};
}

}  // namespace tdrepair::harness
