#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emojipred/common.hpp"

namespace emojipred {

struct RawTweet {
  std::string id;
  std::string text;
  std::optional<std::string> timestamp;
  std::optional<std::string> source;
  bool is_retweet = false;

  bool operator==(const RawTweet&) const = default;
};

// Ordered emoji labels; the index of an emoji is its class id.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::vector<std::string> emojis, std::vector<std::uint64_t> counts);

  // One emoji per line; line number (from 0) is the class id.
  static LabelSet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(emojis_.size()); }
  const std::string& emoji(ClassId id) const { return emojis_.at(id); }
  const std::vector<std::string>& emojis() const { return emojis_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::optional<ClassId> find(std::string_view emoji) const;

  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> emojis_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, ClassId> index_;
};

struct LabeledExample {
  std::string tweet_id;
  ClassId label = 0;
  std::vector<std::string> text_tokens;
  std::vector<std::string> hashtag_tokens;
  std::string source;  // canonical name
  SourceId source_id = 0;
  std::optional<std::string> timestamp;

  bool operator==(const LabeledExample&) const = default;
};

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct LoadResult {
  std::vector<RawTweet> tweets;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Reads a JSONL corpus. Malformed lines are skipped and counted; blank lines
// are ignored.
LoadResult load_corpus(const std::filesystem::path& path);

void write_corpus(const std::filesystem::path& path, const std::vector<RawTweet>& tweets);

struct FilterStats {
  std::size_t retweet = 0;
  std::size_t empty_text = 0;
  std::size_t duplicate_id = 0;
};

// Drops retweets ("RT @" prefix or flag), empty/whitespace-only texts and
// repeated ids (first surviving record wins).
std::vector<RawTweet> filter_records(const std::vector<RawTweet>& tweets,
                                     FilterStats* stats = nullptr);

LabelSet derive_label_set(const std::vector<RawTweet>& tweets, int num_labels);

enum class LabelPolicy { kFirst, kOnly };

LabelPolicy parse_label_policy(std::string_view name);
std::string_view to_string(LabelPolicy policy);

std::optional<ClassId> extract_label(std::string_view text, const LabelSet& labels,
                                     LabelPolicy policy);
inline std::optional<ClassId> extract_label(const RawTweet& tweet, const LabelSet& labels,
                                            LabelPolicy policy) {
  return extract_label(tweet.text, labels, policy);
}

// Classes under this share of the data are flagged as minority classes.
inline constexpr double kMinorityPercent = 3.0;

struct ClassDistribution {
  std::vector<std::size_t> counts;
  std::vector<double> percent;
  std::vector<bool> minority;
  std::size_t total = 0;
};

ClassDistribution class_distribution(const std::vector<LabeledExample>& examples,
                                     int num_classes);

struct BalanceStrategy {
  enum class Kind { kMedian, kCap } kind = Kind::kMedian;
  long long cap = 0;

  static BalanceStrategy median() { return {}; }
  static BalanceStrategy fixed_cap(long long n) { return {Kind::kCap, n}; }
};

// Downsamples each class to at most the cap, without replacement. Survivors
// keep their input order.
std::vector<LabeledExample> balance(const std::vector<LabeledExample>& examples,
                                    const BalanceStrategy& strategy, std::uint64_t seed);

using SplitRatios = std::array<double, 3>;

// Stratified train/dev/test split. Classes with fewer examples than splits
// go to train with a warning.
DatasetSplit split(const std::vector<LabeledExample>& examples, const SplitRatios& ratios,
                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic corpora with planted signals.

struct ClassTemplate {
  std::string emoji;
  std::vector<std::string> signal_words;
  double text_strength = 1.0;
  std::vector<std::string> hashtags;
  double hashtag_strength = 0.0;
  std::string source;
  double source_strength = 0.0;
};

struct SyntheticSpec {
  std::vector<ClassTemplate> classes;
  std::vector<std::string> noise_words;
  std::vector<std::string> background_sources;
  int min_noise_words = 3;
  int max_noise_words = 8;
  int signal_words_per_tweet = 1;
  double mention_rate = 0.1;
  double url_rate = 0.1;

  // Four classes, each with three planted words that always appear.
  static SyntheticSpec planted();
  // Six classes in three text groups; source separates classes inside a
  // group and a class-specific hashtag appears half of the time.
  static SyntheticSpec ablation();
  static SyntheticSpec preset(std::string_view name);

  static SyntheticSpec load(const std::filesystem::path& path);
};

std::vector<RawTweet> generate_synthetic_corpus(const SyntheticSpec& spec, std::size_t n,
                                                std::uint64_t seed);

}  // namespace emojipred
