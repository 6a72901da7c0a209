#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emojipred/common.hpp"

namespace emojipred {

struct StrippedText {
  std::string text;
  std::vector<std::string> emojis;
};

// Removes every emoji grapheme cluster, returning the remaining text (runs of
// spaces collapsed, ends trimmed) and the removed clusters in order.
StrippedText strip_and_collect_emojis(std::string_view text);

// Rule tables consulted by normalize(). Rule order is fixed:
//   emoji strip, URL removal, mention removal, emoticons, dates, censored
//   words, numbers, lowercase, punctuation strip, whitespace collapse.
struct NormalizationRuleSet {
  std::map<std::string, std::string> emoticons;
  // Applied per token after lowercasing. Keys and values are disjoint.
  std::map<std::string, std::string> acronyms;

  static const NormalizationRuleSet& standard();
};

inline constexpr std::string_view kHappy = "<happy>";
inline constexpr std::string_view kSad = "<sad>";
inline constexpr std::string_view kDate = "<date>";
inline constexpr std::string_view kCensored = "<censored>";
inline constexpr std::string_view kNumber = "<number>";

bool is_placeholder(std::string_view token);

std::string normalize(std::string_view text,
                      const NormalizationRuleSet& rules = NormalizationRuleSet::standard());

std::vector<std::string> tokenize(std::string_view normalized);

// Hashtags without '#', lowercased, in order of appearance.
std::vector<std::string> extract_hashtags(std::string_view raw);

// Drops every '#tag' span, leaving surrounding text untouched.
std::string remove_hashtags(std::string_view raw);

// Unigram lexicon for hashtag segmentation.
class SegmentLexicon {
 public:
  using CountMap = std::map<std::string, std::uint64_t, std::less<>>;

  SegmentLexicon() = default;
  explicit SegmentLexicon(CountMap counts, int max_word_len = 20);

  // Counts every lowercase-alphanumeric token; placeholders are ignored.
  static SegmentLexicon from_tokens(const std::vector<std::vector<std::string>>& docs,
                                    int max_word_len = 20);
  static SegmentLexicon load(const std::filesystem::path& path, int max_word_len = 20);
  void save(const std::filesystem::path& path) const;

  std::uint64_t count(std::string_view word) const;
  std::uint64_t total() const { return total_; }
  int max_word_len() const { return max_word_len_; }
  const CountMap& counts() const { return counts_; }

  // log P(w): count/total for known words, 1/(total * 10^len) otherwise.
  // An empty lexicon behaves as total = 1.
  double log_prob(std::string_view word) const;

 private:
  CountMap counts_;
  std::uint64_t total_ = 0;
  int max_word_len_ = 20;
};

// Maximum-likelihood segmentation of a lowercase alphanumeric tag. Ties in
// score go to fewer words, then the lexicographically smaller word list.
std::vector<std::string> segment_hashtag(std::string_view tag, const SegmentLexicon& lexicon);

// Splits on '_' and segments each piece.
std::vector<std::string> hashtag_words(std::string_view tag, const SegmentLexicon& lexicon);

inline constexpr std::string_view kSourceOther = "other";
inline constexpr std::string_view kSourceUnknown = "unknown";

// Canonical application-source categories with dense ids. "other" and
// "unknown" are always the last two ids.
class SourceTable {
 public:
  using AliasMap = std::map<std::string, std::string>;

  SourceTable();
  SourceTable(std::vector<std::string> kept, AliasMap aliases);

  static const AliasMap& default_aliases();
  // Lines of "raw alias<TAB>canonical", merged over the defaults.
  static AliasMap load_aliases(const std::filesystem::path& path);

  // Lines of "canonical<TAB>id".
  static SourceTable load(const std::filesystem::path& path, AliasMap aliases);
  void save(const std::filesystem::path& path) const;

  // Maps a raw source string to a canonical name, or nullopt when absent.
  // HTML anchors (as served by the Twitter API) are unwrapped first.
  std::optional<std::string> canonicalize(std::optional<std::string_view> raw) const;

  SourceId id_of(std::string_view canonical) const;
  const std::string& name(SourceId id) const { return names_.at(id); }
  int size() const { return static_cast<int>(names_.size()); }
  SourceId other_id() const { return size() - 2; }
  SourceId unknown_id() const { return size() - 1; }
  const std::vector<std::string>& names() const { return names_; }
  const AliasMap& aliases() const { return aliases_; }

  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, SourceId> ids_;
  AliasMap aliases_;
};

SourceId normalize_source(std::optional<std::string_view> raw, const SourceTable& table);

// Keeps the top-K canonical sources by (count desc, name asc).
SourceTable build_source_table(const std::vector<std::optional<std::string>>& raw_sources,
                               int k,
                               SourceTable::AliasMap aliases = SourceTable::default_aliases());

}  // namespace emojipred
