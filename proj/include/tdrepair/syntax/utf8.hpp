#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace tdrepair::syntax {

bool is_valid_utf8(std::string_view text);

// Decodes text that already passed is_valid_utf8.
std::u32string decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t code_point);

// Largest prefix length <= limit that does not split a multi-byte sequence.
std::size_t utf8_floor(std::string_view text, std::size_t limit);

}  // namespace tdrepair::syntax
