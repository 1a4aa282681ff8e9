#include "crowdsent/text.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace crowdsent::text {

CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  constexpr CodePoint kInvalid{U'\uFFFD', 1};
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};

  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return kInvalid;
  }
  if (pos + len > s.size()) return kInvalid;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return kInvalid;
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

namespace {

// Closed ranges of alphabetic code points outside ASCII.
constexpr std::array<std::pair<char32_t, char32_t>, 24> kLetterRanges{{
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x024F},  // Latin
    {0x0250, 0x02AF},                                      // IPA
    {0x0370, 0x03FF},                                      // Greek
    {0x0400, 0x052F},                                      // Cyrillic
    {0x0531, 0x0587},                                      // Armenian
    {0x05D0, 0x05EA},                                      // Hebrew
    {0x0620, 0x064A}, {0x0671, 0x06D3},                    // Arabic
    {0x0900, 0x0DFF},                                      // Indic
    {0x0E01, 0x0E30},                                      // Thai
    {0x10A0, 0x10FF},                                      // Georgian
    {0x1E00, 0x1FFF},                                      // Latin/Greek ext
    {0x3041, 0x3096}, {0x30A1, 0x30FA},                    // kana
    {0x3400, 0x4DBF}, {0x4E00, 0x9FFF},                    // CJK
    {0xAC00, 0xD7A3},                                      // Hangul
    {0xF900, 0xFAFF},                                      // CJK compat
    {0xFF21, 0xFF3A}, {0xFF41, 0xFF5A},                    // fullwidth
    {0x20000, 0x2A6DF}, {0x2A700, 0x2EBEF},                // CJK ext
}};

}  // namespace

bool is_letter(char32_t c) {
  if (c < 0x80) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
  }
  return std::any_of(kLetterRanges.begin(), kLetterRanges.end(),
                     [c](const auto& r) { return c >= r.first && c <= r.second; });
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace crowdsent::text
