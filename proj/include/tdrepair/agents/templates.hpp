#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tdrepair::agents {

// Shipped template ids, one per prompts/<id>.txt.
inline constexpr std::string_view kCoderUser = "coder_user";
inline constexpr std::string_view kDebuggerSystem = "debugger_system";
inline constexpr std::string_view kDebuggerUser = "debugger_user";
inline constexpr std::string_view kTestgenSystem = "testgen_system";
inline constexpr std::string_view kTestgenUser = "testgen_user";

using Bindings = std::map<std::string, std::string, std::less<>>;

const std::vector<std::string_view>& template_ids();

// Raw template bytes. Throws ConfigError for an unknown id.
std::string_view template_text(std::string_view template_id);

struct Placeholder {
  std::size_t offset = 0;  // position of the opening brace
  std::size_t length = 0;  // through the closing brace
  std::string name;        // binding key, e.g. "spec.args"
};

// Sites are "{dotted.name}" and "{'sep'.join(dotted.name)}"; the latter is
// keyed by the joined name and its binding is used already joined. Any other
// brace is literal text.
std::vector<Placeholder> find_placeholders(std::string_view text);

// Substitutes every site verbatim. Throws TemplateError naming the first
// placeholder without a binding. Extra bindings are ignored.
std::string render_text(std::string_view text, const Bindings& bindings);
std::string render_prompt(std::string_view template_id, const Bindings& bindings);

}  // namespace tdrepair::agents
