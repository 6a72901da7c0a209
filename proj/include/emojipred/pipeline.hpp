#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emojipred/corpus.hpp"
#include "emojipred/textprep.hpp"

namespace emojipred {

struct PipelineOptions {
  LabelPolicy label_policy = LabelPolicy::kFirst;
  int num_labels = 20;
  int max_len = 32;
  int text_vocab_size = 20000;
  int text_min_freq = 2;
  int hashtag_vocab_size = 20000;
  int hashtag_min_freq = 2;
  int source_top_k = 10;
  bool keep_hashtags_in_text = false;
  SplitRatios split_ratios{0.8, 0.1, 0.1};
  bool balance = false;  // downsample to the median class count before splitting

  void validate() const;
};

struct PreprocessResources {
  const LabelSet* labels = nullptr;  // optional; without it no label is extracted
  const SegmentLexicon* lexicon = nullptr;
  const SourceTable* sources = nullptr;
  const NormalizationRuleSet* rules = &NormalizationRuleSet::standard();
};

struct PreprocessedTweet {
  std::optional<ClassId> label;
  std::vector<std::string> text_tokens;
  std::vector<std::string> hashtag_tokens;
  std::string source;
  SourceId source_id = 0;
};

// The single preprocessing path shared by ingestion and prediction.
// Hashtags are read from the raw text, emojis are stripped (the first label
// emoji becomes the class), hashtags are cut from the text unless kept, and
// the remainder is normalized and tokenized.
std::vector<std::string> tweet_text_tokens(std::string_view raw, const PipelineOptions& options,
                                           const NormalizationRuleSet& rules);
PreprocessedTweet preprocess_tweet(std::string_view raw_text,
                                   std::optional<std::string_view> raw_source,
                                   const PreprocessResources& res, const PipelineOptions& options);

struct IngestSummary {
  std::size_t lines_read = 0;
  std::size_t malformed = 0;
  std::size_t retweet = 0;
  std::size_t empty_text = 0;
  std::size_t duplicate_id = 0;
  std::size_t no_label = 0;
  std::size_t kept = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  LabelSet labels;
  SegmentLexicon lexicon;
  SourceTable sources;
};

struct IngestOptions {
  PipelineOptions pipeline;
  std::optional<LabelSet> labels;          // reuse instead of deriving
  std::optional<SegmentLexicon> lexicon;   // default: built from corpus tokens
  SourceTable::AliasMap source_aliases = SourceTable::default_aliases();
};

Dataset ingest(const LoadResult& corpus, const IngestOptions& options, IngestSummary* summary);

// Files written by ingest, relative to the output directory.
inline constexpr std::string_view kDatasetFile = "dataset.jsonl";
inline constexpr std::string_view kLabelsFile = "labels.txt";
inline constexpr std::string_view kLexiconFile = "lexicon.tsv";
inline constexpr std::string_view kSourcesFile = "sources.tsv";
inline constexpr std::string_view kIngestSummaryFile = "ingest_summary.json";

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

void write_examples(const std::filesystem::path& path, const std::vector<LabeledExample>& examples,
                    const LabelSet& labels);
std::vector<LabeledExample> read_examples(const std::filesystem::path& path,
                                          const LabelSet& labels, const SourceTable& sources);

}  // namespace emojipred
