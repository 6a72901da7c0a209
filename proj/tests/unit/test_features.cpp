#include <doctest.h>

#include <algorithm>
#include <set>

#include "emojipred/features.hpp"
#include "helpers.hpp"

using namespace emojipred;
using Words = std::vector<std::string>;

namespace {

// Four classes with three planted words each, mixed with shared noise.
void planted_docs(std::uint64_t seed, std::vector<Words>* docs, std::vector<ClassId>* labels,
                  std::vector<Words>* planted) {
  *planted = {{"beach", "sunset", "waves"},
              {"pizza", "pasta", "cheese"},
              {"goal", "match", "stadium"},
              {"exam", "study", "library"}};
  const Words noise = {"the", "a", "today", "so", "really", "just", "with", "my", "and", "very"};
  Rng rng(seed);
  for (int i = 0; i < 200; ++i) {
    const ClassId c = i % 4;
    Words d;
    for (int k = 0; k < 5; ++k) d.push_back(noise[rng.below(noise.size())]);
    d.push_back((*planted)[c][rng.below(3)]);
    rng.shuffle(d);
    docs->push_back(d);
    labels->push_back(c);
  }
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("vocabulary reserves pad and unk") {
    const Vocabulary v({"b", "a"});
    CHECK(v.size() == 4);
    CHECK(v.id("<pad>") == Vocabulary::kPad);
    CHECK(v.id("b") == 2);
    CHECK(v.id("missing") == Vocabulary::kUnk);
    CHECK(v.token(3) == "a");
  }

  TEST_CASE("build_vocab order, min_freq and cap") {
    const std::vector<Words> docs = {{"x", "y", "y", "z"}, {"y", "x", "w"}};
    auto v = build_vocab(docs, 1, 100);
    CHECK(v.tokens() == Words{"<pad>", "<unk>", "y", "x", "w", "z"});
    v = build_vocab(docs, 2, 100);
    CHECK(v.tokens() == Words{"<pad>", "<unk>", "y", "x"});
    v = build_vocab(docs, 1, 3);
    CHECK(v.tokens() == Words{"<pad>", "<unk>", "y"});
  }

  TEST_CASE("vocabulary file round trip") {
    testing::TempDir dir("vocab");
    const Vocabulary v({"hello", "<happy>", "wörld"});
    v.save(dir / "v.tsv");
    const auto back = Vocabulary::load(dir / "v.tsv");
    CHECK(back.tokens() == v.tokens());
    CHECK(back.fingerprint() == v.fingerprint());
    CHECK(Vocabulary({"a"}).fingerprint() != Vocabulary({"b"}).fingerprint());
  }

  TEST_CASE("encode pads, truncates and maps unknowns") {
    const Vocabulary tv({"i", "love", "you"});
    const Vocabulary hv({"nowplaying"});
    LabeledExample ex;
    ex.text_tokens = {"i", "love", "pizza"};
    ex.hashtag_tokens = {"nowplaying", "other"};
    ex.source_id = 3;
    ex.label = 1;
    auto e = encode_example(ex, tv, hv, 5);
    CHECK(e.text_ids == std::vector<int>{2, 3, 1, 0, 0});
    CHECK(e.text_len == 3);
    CHECK(e.hashtag_ids == std::vector<int>{2, 1});
    CHECK(e.source_id == 3);
    CHECK(e.label == 1);
    e = encode_example(ex, tv, hv, 2);
    CHECK(e.text_ids == std::vector<int>{2, 3});
    CHECK(e.text_len == 2);
    CHECK_THROWS_AS(encode_example(ex, tv, hv, 0), InputError);
  }

  TEST_CASE("bag of words and concat") {
    const Vocabulary v({"a", "b"});
    auto x = bow_vector({"b", "a", "b", "zz"}, v);
    CHECK(x.index == std::vector<int>{1, 2, 3});
    CHECK(x.value == std::vector<double>{1, 1, 2});
    CHECK(x.dim == 4);
    x = bow_vector({"b", "b"}, v, Weighting::kBinary);
    CHECK(x.value == std::vector<double>{1});
    const auto y = concat({bow_vector({"a"}, v), one_hot(2, 3)});
    CHECK(y.dim == 7);
    CHECK(y.index == std::vector<int>{2, 6});
    CHECK(y.dot({0, 0, 2, 0, 0, 0, 5}) == 7.0);
  }

  TEST_CASE("top features recover planted words") {
    std::vector<Words> docs, planted;
    std::vector<ClassId> labels;
    planted_docs(3, &docs, &labels, &planted);
    const auto vocab = build_vocab(docs, 1, 1000);
    for (auto method : {FeatureMethod::kForestImportance, FeatureMethod::kLinearWeights}) {
      TopFeatureOptions opt;
      opt.method = method;
      opt.k = 3;
      opt.trees = 20;
      const auto r = top_features_per_class(docs, labels, vocab, 4, opt);
      REQUIRE(r.per_class.size() == 4);
      for (int c = 0; c < 4; ++c) {
        std::set<std::string> got;
        for (const auto& st : r.per_class[c]) got.insert(st.token);
        CHECK(got == std::set<std::string>(planted[c].begin(), planted[c].end()));
      }
    }
    CHECK(parse_feature_method("linear") == FeatureMethod::kLinearWeights);
    CHECK_THROWS_AS(parse_feature_method("magic"), InputError);
  }

  TEST_CASE("top features warn on a class without examples") {
    std::vector<Words> docs = {{"a"}, {"b"}, {"a"}, {"b"}};
    std::vector<ClassId> labels = {0, 1, 0, 1};
    const auto r = top_features_per_class(docs, labels, build_vocab(docs, 1, 10), 3, {});
    CHECK(r.per_class[2].empty());
    CHECK(r.warnings.size() == 1);
  }

  TEST_CASE("source emoji crosstab") {
    const SourceTable sources({"instagram", "tumblr"}, SourceTable::default_aliases());
    std::vector<LabeledExample> xs;
    auto add = [&](SourceId s, ClassId c, int n) {
      for (int i = 0; i < n; ++i) {
        LabeledExample ex;
        ex.source_id = s;
        ex.label = c;
        xs.push_back(ex);
      }
    };
    add(0, 1, 3);
    add(0, 0, 1);
    add(1, 0, 2);
    add(1, 2, 2);
    const auto tab = source_emoji_crosstab(xs, sources, 3, 2);
    CHECK(tab.counts[0] == std::vector<std::size_t>{1, 3, 0});
    CHECK(tab.source_totals[0] == 4);
    CHECK(tab.source_ranking[0] == 0);
    CHECK(tab.source_ranking[1] == 1);
    CHECK(tab.top_labels[0] == std::vector<ClassId>{1, 0});
    CHECK(tab.top_labels[1] == std::vector<ClassId>{0, 2});
  }
}
