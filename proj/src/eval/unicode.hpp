#pragma once

#include <string>
#include <string_view>

namespace nlpre::eval::detail {

// Strict UTF-8 decoding; throws std::invalid_argument on malformed input.
std::u32string decode_utf8(std::string_view text);

// Unicode general category Zs.
bool is_space_separator(char32_t c);

// Lowercase mapping of a whole string (full mapping for U+0130).
std::u32string to_lower(std::u32string_view text);

}  // namespace nlpre::eval::detail
