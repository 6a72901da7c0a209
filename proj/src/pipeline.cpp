#include "emojipred/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "emojipred/unicode.hpp"

namespace emojipred {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void PipelineOptions::validate() const {
  if (num_labels < 1) throw InputError("pipeline.num_labels must be >= 1");
  if (max_len < 1) throw InputError("pipeline.max_len must be >= 1");
  if (text_vocab_size < 2 || hashtag_vocab_size < 2) throw InputError("vocab sizes must be >= 2");
  if (text_min_freq < 1 || hashtag_min_freq < 1) throw InputError("vocab min_freq must be >= 1");
  if (source_top_k < 1) throw InputError("pipeline.source_top_k must be >= 1");
  double sum = 0.0;
  for (double r : split_ratios) {
    if (!(r > 0.0)) throw InputError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("split ratios must sum to 1");
}

std::vector<std::string> tweet_text_tokens(std::string_view raw, const PipelineOptions& options,
                                           const NormalizationRuleSet& rules) {
  const auto stripped = strip_and_collect_emojis(raw);
  const std::string body =
      options.keep_hashtags_in_text ? stripped.text : remove_hashtags(stripped.text);
  return tokenize(normalize(body, rules));
}

PreprocessedTweet preprocess_tweet(std::string_view raw_text,
                                   std::optional<std::string_view> raw_source,
                                   const PreprocessResources& res, const PipelineOptions& options) {
  if (!unicode::is_valid_utf8(raw_text)) throw InputError("text is not valid UTF-8");
  PreprocessedTweet out;
  if (res.labels) out.label = extract_label(raw_text, *res.labels, options.label_policy);
  out.text_tokens = tweet_text_tokens(raw_text, options, *res.rules);
  for (const auto& tag : extract_hashtags(raw_text)) {
    if (res.lexicon) {
      for (auto& w : hashtag_words(tag, *res.lexicon)) out.hashtag_tokens.push_back(std::move(w));
    } else {
      out.hashtag_tokens.push_back(tag);
    }
  }
  static const SourceTable kFallback;
  const SourceTable& sources = res.sources ? *res.sources : kFallback;
  out.source_id = normalize_source(raw_source, sources);
  out.source = sources.name(out.source_id);
  return out;
}

json IngestSummary::to_json() const {
  return {{"lines_read", lines_read},
          {"malformed", malformed},
          {"kept", kept},
          {"dropped",
           {{"retweet", retweet},
            {"empty_text", empty_text},
            {"duplicate_id", duplicate_id},
            {"no_label", no_label}}},
          {"warnings", warnings}};
}

Dataset ingest(const LoadResult& corpus, const IngestOptions& options, IngestSummary* summary) {
  options.pipeline.validate();
  IngestSummary s;
  s.lines_read = corpus.tweets.size() + corpus.skipped;
  s.malformed = corpus.skipped;
  s.warnings = corpus.warnings;

  FilterStats fs;
  const auto tweets = filter_records(corpus.tweets, &fs);
  s.retweet = fs.retweet;
  s.empty_text = fs.empty_text;
  s.duplicate_id = fs.duplicate_id;

  Dataset ds;
  if (options.labels) {
    ds.labels = *options.labels;
  } else if (!tweets.empty()) {
    ds.labels = derive_label_set(tweets, options.pipeline.num_labels);
  }

  std::vector<const RawTweet*> labeled;
  std::vector<ClassId> label_ids;
  for (const auto& t : tweets) {
    if (auto label = extract_label(t, ds.labels, options.pipeline.label_policy)) {
      labeled.push_back(&t);
      label_ids.push_back(*label);
    } else {
      ++s.no_label;
    }
  }

  if (options.lexicon) {
    ds.lexicon = *options.lexicon;
  } else {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(labeled.size());
    for (const auto* t : labeled) {
      docs.push_back(tweet_text_tokens(t->text, options.pipeline, NormalizationRuleSet::standard()));
    }
    ds.lexicon = SegmentLexicon::from_tokens(docs);
  }

  std::vector<std::optional<std::string>> raw_sources;
  raw_sources.reserve(labeled.size());
  for (const auto* t : labeled) raw_sources.push_back(t->source);
  ds.sources = build_source_table(raw_sources, options.pipeline.source_top_k,
                                  options.source_aliases);

  PreprocessResources res;
  res.lexicon = &ds.lexicon;
  res.sources = &ds.sources;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const RawTweet& t = *labeled[i];
    auto p = preprocess_tweet(t.text,
                              t.source ? std::optional<std::string_view>(*t.source) : std::nullopt,
                              res, options.pipeline);
    LabeledExample ex;
    ex.tweet_id = t.id;
    ex.label = label_ids[i];
    ex.text_tokens = std::move(p.text_tokens);
    ex.hashtag_tokens = std::move(p.hashtag_tokens);
    ex.source = std::move(p.source);
    ex.source_id = p.source_id;
    ex.timestamp = t.timestamp;
    ds.examples.push_back(std::move(ex));
  }
  s.kept = ds.examples.size();
  if (summary) *summary = std::move(s);
  return ds;
}

void write_examples(const std::filesystem::path& path, const std::vector<LabeledExample>& examples,
                    const LabelSet& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write dataset: " + path.string());
  for (const auto& ex : examples) {
    ordered_json j;
    j["tweet_id"] = ex.tweet_id;
    j["label"] = ex.label;
    j["label_emoji"] = labels.emoji(ex.label);
    j["text_tokens"] = ex.text_tokens;
    j["hashtag_tokens"] = ex.hashtag_tokens;
    j["source"] = ex.source;
    if (ex.timestamp) j["created_at"] = *ex.timestamp;
    out << j.dump() << '\n';
  }
}

std::vector<LabeledExample> read_examples(const std::filesystem::path& path,
                                          const LabelSet& labels, const SourceTable& sources) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read dataset: " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (j.is_discarded() || !j.is_object()) throw ConsistencyError("malformed dataset line " + where);
    try {
      LabeledExample ex;
      ex.tweet_id = j.at("tweet_id").get<std::string>();
      ex.label = j.at("label").get<int>();
      ex.text_tokens = j.at("text_tokens").get<std::vector<std::string>>();
      ex.hashtag_tokens = j.at("hashtag_tokens").get<std::vector<std::string>>();
      ex.source = j.at("source").get<std::string>();
      if (j.contains("created_at")) ex.timestamp = j.at("created_at").get<std::string>();
      if (ex.label < 0 || ex.label >= labels.size()) {
        throw ConsistencyError("label out of range at " + where);
      }
      if (j.contains("label_emoji") && j.at("label_emoji").get<std::string>() != labels.emoji(ex.label)) {
        throw ConsistencyError("label emoji disagrees with the label set at " + where);
      }
      ex.source_id = sources.id_of(ex.source);
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ConsistencyError("malformed dataset line " + where + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  write_examples(dir / kDatasetFile, ds.examples, ds.labels);
  ds.labels.save(dir / kLabelsFile);
  ds.lexicon.save(dir / kLexiconFile);
  ds.sources.save(dir / kSourcesFile);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  for (auto name : {kDatasetFile, kLabelsFile, kSourcesFile}) {
    if (!std::filesystem::exists(dir / name)) {
      throw MissingResourceError("dataset file missing: " + (dir / name).string() +
                                 " (run ingest first)");
    }
  }
  Dataset ds;
  ds.labels = LabelSet::load(dir / kLabelsFile);
  ds.sources = SourceTable::load(dir / kSourcesFile, SourceTable::default_aliases());
  if (std::filesystem::exists(dir / kLexiconFile)) ds.lexicon = SegmentLexicon::load(dir / kLexiconFile);
  ds.examples = read_examples(dir / kDatasetFile, ds.labels, ds.sources);
  return ds;
}

}  // namespace emojipred
