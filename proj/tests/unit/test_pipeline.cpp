#include <doctest.h>

#include "emojipred/pipeline.hpp"
#include "helpers.hpp"

using namespace emojipred;
using Words = std::vector<std::string>;

namespace {

IngestOptions small_options() {
  IngestOptions opt;
  opt.pipeline.num_labels = 2;
  opt.pipeline.text_min_freq = 1;
  opt.pipeline.hashtag_min_freq = 1;
  return opt;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("four tweet corpus") {
    const auto corpus = load_corpus(testing::data_path("four_tweets.jsonl"));
    IngestSummary summary;
    const auto ds = ingest(corpus, small_options(), &summary);
    CHECK(summary.lines_read == 4);
    CHECK(summary.kept == 2);
    CHECK(summary.retweet == 1);
    CHECK(summary.no_label == 1);
    const auto j = summary.to_json();
    CHECK(j["dropped"]["retweet"] == 1);
    CHECK(j["dropped"]["no_label"] == 1);

    REQUIRE(ds.examples.size() == 2);
    CHECK(ds.labels.emojis() == Words{"❤️", "😂"});
    const auto& pizza = ds.examples[0];
    CHECK(pizza.tweet_id == "3");
    CHECK(ds.labels.emoji(pizza.label) == "😂");
    CHECK(pizza.text_tokens == Words{"pizza", "night", "with", "the", "crew"});
    CHECK(pizza.hashtag_tokens == Words{"pizza", "night"});
    CHECK(pizza.source == "instagram");
    CHECK(pizza.timestamp == std::optional<std::string>("2019-12-01T10:00:00Z"));
    const auto& song = ds.examples[1];
    CHECK(ds.labels.emoji(song.label) == "❤️");
    CHECK(song.text_tokens == Words{"i", "love", "this", "song", "<happy>"});
    CHECK(song.hashtag_tokens.empty());
    CHECK(song.source == "twitter_android");
  }

  TEST_CASE("keeping hashtags in the text") {
    auto opt = small_options();
    opt.pipeline.keep_hashtags_in_text = true;
    const auto ds = ingest(load_corpus(testing::data_path("four_tweets.jsonl")), opt, nullptr);
    CHECK(ds.examples[0].text_tokens == Words{"pizza", "night", "with", "the", "crew", "pizzanight"});
  }

  TEST_CASE("prediction preprocessing matches ingestion") {
    SyntheticSpec spec = SyntheticSpec::ablation();
    LoadResult corpus;
    corpus.tweets = generate_synthetic_corpus(spec, 300, 4);
    IngestOptions opt;
    opt.pipeline.num_labels = 6;
    const auto ds = ingest(corpus, opt, nullptr);
    REQUIRE(ds.examples.size() == 300);
    PreprocessResources res;
    res.labels = &ds.labels;
    res.lexicon = &ds.lexicon;
    res.sources = &ds.sources;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
      const auto& raw = corpus.tweets[i];
      const auto& ex = ds.examples[i];
      REQUIRE(raw.id == ex.tweet_id);
      const auto p = preprocess_tweet(raw.text, raw.source, res, opt.pipeline);
      CHECK(p.label == ex.label);
      CHECK(p.text_tokens == ex.text_tokens);
      CHECK(p.hashtag_tokens == ex.hashtag_tokens);
      CHECK(p.source_id == ex.source_id);
    }
  }

  TEST_CASE("dataset directory round trip") {
    testing::TempDir dir("dataset");
    const auto ds =
        ingest(load_corpus(testing::data_path("four_tweets.jsonl")), small_options(), nullptr);
    save_dataset(dir.path(), ds);
    const auto back = load_dataset(dir.path());
    CHECK(back.examples == ds.examples);
    CHECK(back.labels.emojis() == ds.labels.emojis());
    CHECK(back.sources.names() == ds.sources.names());
    CHECK(back.lexicon.counts() == ds.lexicon.counts());
    CHECK_THROWS_AS(load_dataset(dir / "missing"), MissingResourceError);

    testing::write_file(dir / "dataset.jsonl", "{\"tweet_id\": \"1\", \"label\": 0, bad\n");
    CHECK_THROWS_AS(load_dataset(dir.path()), ConsistencyError);
  }

  TEST_CASE("empty corpus gives an empty dataset") {
    IngestSummary summary;
    const auto ds = ingest(LoadResult{}, small_options(), &summary);
    CHECK(ds.examples.empty());
    CHECK(ds.labels.size() == 0);
  }

  TEST_CASE("invalid options are rejected") {
    PipelineOptions opt;
    opt.split_ratios = {0.5, 0.2, 0.2};
    CHECK_THROWS_AS(opt.validate(), InputError);
    opt = {};
    opt.max_len = 0;
    CHECK_THROWS_AS(opt.validate(), InputError);
  }
}
