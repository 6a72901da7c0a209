#include "emojipred/unicode.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace emojipred::unicode {
namespace {

struct Range {
  char32_t lo;
  char32_t hi;
};

// Extended_Pictographic blocks that render as emoji by default (or are
// treated so for label purposes).
constexpr std::array<Range, 24> kEmojiBase = {{
    {0x231A, 0x231B},   {0x23E9, 0x23F3},   {0x23F8, 0x23FA},
    {0x24C2, 0x24C2},   {0x25AA, 0x25AB},   {0x25B6, 0x25B6},
    {0x25C0, 0x25C0},   {0x25FB, 0x25FE},   {0x2600, 0x27BF},
    {0x2934, 0x2935},   {0x2B05, 0x2B07},   {0x2B1B, 0x2B1C},
    {0x2B50, 0x2B50},   {0x2B55, 0x2B55},   {0x3030, 0x3030},
    {0x303D, 0x303D},   {0x3297, 0x3297},   {0x3299, 0x3299},
    {0x1F000, 0x1F0FF}, {0x1F10D, 0x1F10F}, {0x1F12F, 0x1F12F},
    {0x1F16C, 0x1F171}, {0x1F17E, 0x1F251}, {0x1F300, 0x1FAFF},
}};

constexpr std::array<Range, 9> kTextDefault = {{
    {0x0023, 0x0023}, {0x002A, 0x002A}, {0x0030, 0x0039},
    {0x00A9, 0x00A9}, {0x00AE, 0x00AE}, {0x203C, 0x203C},
    {0x2049, 0x2049}, {0x2122, 0x2122}, {0x2139, 0x21FF},
}};

template <std::size_t N>
bool in_ranges(const std::array<Range, N>& ranges, char32_t cp) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [cp](const Range& r) { return cp >= r.lo && cp <= r.hi; });
}

bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
bool is_variation_selector(char32_t cp) { return cp == 0xFE0E || cp == 0xFE0F; }
bool is_tag(char32_t cp) { return cp >= 0xE0020 && cp <= 0xE007F; }

char32_t peek(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return 0;
  return decode_utf8(s, pos);
}

}  // namespace

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
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
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong forms, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::u32string to_u32(std::string_view s) {
  std::u32string out;
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(decode_utf8(s, pos));
  return out;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t before = pos;
    const char32_t cp = decode_utf8(s, pos);
    // A literal U+FFFD encodes to three bytes; a decode error consumes one.
    if (cp == kReplacement && pos - before == 1) return false;
  }
  return true;
}

bool is_emoji_base(char32_t cp) { return in_ranges(kEmojiBase, cp); }

bool is_text_default_emoji(char32_t cp) { return in_ranges(kTextDefault, cp); }

bool is_emoji_modifier(char32_t cp) { return cp >= 0x1F3FB && cp <= 0x1F3FF; }

bool is_whitespace(char32_t cp) {
  return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 ||
         (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         cp == 0xFE0E || cp == 0xFE0F || cp == kZwj || cp == 0x200B ||
         cp == 0xFEFF || cp == kReplacement;
}

std::vector<EmojiSpan> find_emojis(std::string_view text) {
  std::vector<EmojiSpan> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t begin = pos;
    const char32_t cp = decode_utf8(text, pos);

    bool starts = false;
    if (is_regional_indicator(cp)) {
      starts = true;
      std::size_t next = pos;
      if (next < text.size() && is_regional_indicator(decode_utf8(text, next))) {
        pos = next;
      }
    } else if (is_emoji_base(cp)) {
      starts = true;
    } else if (is_text_default_emoji(cp)) {
      // Needs explicit emoji presentation: VS16 and/or a keycap mark.
      std::size_t next = pos;
      char32_t c1 = peek(text, next);
      bool vs16 = false;
      bool keycap = false;
      if (c1 == 0xFE0F) {
        decode_utf8(text, next);
        c1 = peek(text, next);
        vs16 = true;
      }
      if (c1 == 0x20E3) {
        decode_utf8(text, next);
        keycap = true;
      }
      // ASCII bases ('#', '*', digits) only form emoji as keycaps.
      starts = cp < 0x80 ? keycap : (vs16 || keycap);
      if (starts) pos = next;
    }
    if (!starts) continue;

    // Extend the cluster.
    while (pos < text.size()) {
      std::size_t next = pos;
      const char32_t c = decode_utf8(text, next);
      if (is_variation_selector(c) || is_emoji_modifier(c) || c == 0x20E3 ||
          is_tag(c)) {
        pos = next;
      } else if (c == kZwj) {
        std::size_t after = next;
        if (after >= text.size()) {
          pos = next;
          break;
        }
        const char32_t joined = decode_utf8(text, after);
        if (is_emoji_base(joined) || is_text_default_emoji(joined)) {
          pos = after;
        } else {
          pos = next;  // trailing ZWJ belongs to the cluster
          break;
        }
      } else {
        break;
      }
    }
    spans.push_back({begin, pos});
  }
  return spans;
}

}  // namespace emojipred::unicode
