#include <doctest.h>

#include <string>
#include <vector>

#include "emojipred/unicode.hpp"

using namespace emojipred::unicode;

namespace {

std::vector<std::string> clusters(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& sp : find_emojis(s)) out.push_back(s.substr(sp.begin, sp.end - sp.begin));
  return out;
}

}  // namespace

TEST_SUITE("unicode") {
  TEST_CASE("utf8 round trip") {
    const std::u32string cps = {U'a', 0xE9, 0x20AC, 0x1F602, 0x10FFFF};
    std::string s;
    for (char32_t c : cps) append_utf8(s, c);
    CHECK(to_u32(s) == cps);
    CHECK(is_valid_utf8(s));
  }

  TEST_CASE("malformed bytes decode to replacement, one byte at a time") {
    const std::string bad = "a\xC3(b";
    CHECK_FALSE(is_valid_utf8(bad));
    const auto cps = to_u32(bad);
    REQUIRE(cps.size() == 4);
    CHECK(cps[1] == kReplacement);
    CHECK(cps[2] == U'(');
    CHECK_FALSE(is_valid_utf8("\xC0\xAF"));       // overlong '/'
    CHECK_FALSE(is_valid_utf8("\xED\xA0\x80"));   // surrogate
  }

  TEST_CASE("single and sequence emojis") {
    CHECK(clusters("good 😂 night") == std::vector<std::string>{"😂"});
    CHECK(clusters("❤️❤️") == std::vector<std::string>{"❤️", "❤️"});
    // ZWJ family is one cluster.
    CHECK(clusters("x 👨‍👩‍👧 y") == std::vector<std::string>{"👨‍👩‍👧"});
    // Skin tone modifier extends the base.
    CHECK(clusters("👍🏽!") == std::vector<std::string>{"👍🏽"});
    // Regional indicator pair forms a single flag.
    CHECK(clusters("🇺🇸🇫🇷") == std::vector<std::string>{"🇺🇸", "🇫🇷"});
  }

  TEST_CASE("text-default code points need emoji presentation") {
    CHECK(clusters("call 1 now #tag").empty());
    CHECK(clusters("1️⃣ and #️⃣") == std::vector<std::string>{"1️⃣", "#️⃣"});
    // The dingbat block counts as emoji even without VS16.
    CHECK(clusters("bare ❤ heart") == std::vector<std::string>{"❤"});
    CHECK(clusters("red ❤️ heart") == std::vector<std::string>{"❤️"});
  }

  TEST_CASE("predicates") {
    CHECK(is_whitespace(U' '));
    CHECK(is_whitespace(0x3000));
    CHECK_FALSE(is_whitespace(U'a'));
    CHECK(is_punctuation(U'!'));
    CHECK(is_punctuation(0x2026));
    CHECK_FALSE(is_punctuation(U'a'));
    CHECK_FALSE(is_punctuation(U'7'));
    CHECK(is_emoji_modifier(0x1F3FB));
    CHECK(is_emoji_base(0x1F602));
  }
}
