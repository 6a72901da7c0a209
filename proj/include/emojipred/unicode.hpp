#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace emojipred::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;
inline constexpr char32_t kZwj = 0x200D;

// Decodes one code point starting at `pos`; advances `pos`. Malformed bytes
// decode to U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

std::u32string to_u32(std::string_view s);

bool is_valid_utf8(std::string_view s);

// Code points that start an emoji cluster on their own (pictographs,
// dingbats, regional indicators).
bool is_emoji_base(char32_t cp);

// Code points that are emoji only when followed by VS16 or a keycap mark
// (e.g. digits, '#', '*', (c), (R), TM, arrows).
bool is_text_default_emoji(char32_t cp);

bool is_emoji_modifier(char32_t cp);

bool is_whitespace(char32_t cp);

// Punctuation and symbols removed by text normalization.
bool is_punctuation(char32_t cp);

// Byte span of an emoji grapheme cluster inside a UTF-8 string.
struct EmojiSpan {
  std::size_t begin;
  std::size_t end;
};

// Scans `text` for maximal emoji grapheme clusters: a base code point
// extended with variation selectors, skin-tone modifiers, keycap marks, tag
// sequences and ZWJ-joined further emojis. A regional-indicator pair forms a
// single flag.
std::vector<EmojiSpan> find_emojis(std::string_view text);

}  // namespace emojipred::unicode
