#pragma once

#include <string>
#include <string_view>

namespace crowdsent::text {

/// One decoded code point and the number of bytes it occupied.
/// Malformed sequences decode as U+FFFD with length 1 so scanning always
/// makes progress and never rewrites the underlying bytes.
struct CodePoint {
  char32_t value;
  std::size_t length;
};

CodePoint decode_utf8(std::string_view s, std::size_t pos);

/// Alphabetic test covering ASCII plus the major alphabetic scripts
/// (Latin supplements, Greek, Cyrillic, Armenian, Hebrew, Arabic, Indic,
/// Thai, Hangul, kana and CJK ideographs).
bool is_letter(char32_t c);

bool is_ascii_space(char c);

/// ASCII-only lowercasing; other bytes pass through untouched.
std::string ascii_lower(std::string_view s);

}  // namespace crowdsent::text
