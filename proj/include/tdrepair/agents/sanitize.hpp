#pragma once

#include <string>
#include <string_view>

namespace tdrepair::agents {

// Removes Markdown fence lines at either end and whole-text quote or
// backtick wrappers, repeatedly, until nothing changes. Text without such
// wrappers is returned byte-for-byte. Throws EmptyGenerationError when
// nothing but whitespace remains.
std::string sanitize_model_output(std::string_view text);

}  // namespace tdrepair::agents
