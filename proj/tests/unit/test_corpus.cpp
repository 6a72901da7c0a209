#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "emojipred/corpus.hpp"
#include "emojipred/unicode.hpp"
#include "helpers.hpp"

using namespace emojipred;

namespace {

RawTweet tweet(std::string id, std::string text, bool rt = false) {
  RawTweet t;
  t.id = std::move(id);
  t.text = std::move(text);
  t.is_retweet = rt;
  return t;
}

std::vector<LabeledExample> examples_with_counts(const std::vector<int>& counts) {
  std::vector<LabeledExample> out;
  int id = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (int i = 0; i < counts[c]; ++i) {
      LabeledExample ex;
      ex.tweet_id = "t" + std::to_string(id++);
      ex.label = static_cast<ClassId>(c);
      out.push_back(ex);
    }
  }
  return out;
}

std::vector<std::size_t> label_counts(const std::vector<LabeledExample>& xs, int c) {
  std::vector<std::size_t> n(c, 0);
  for (const auto& x : xs) ++n[x.label];
  return n;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("load_corpus skips malformed lines") {
    const auto r = load_corpus(testing::data_path("malformed.jsonl"));
    CHECK(r.tweets.size() == 3);
    CHECK(r.skipped == 1);
    CHECK(r.tweets[1].source == std::optional<std::string>("Tumblr"));
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), MissingResourceError);
  }

  TEST_CASE("write_corpus round trip") {
    testing::TempDir dir("corpus");
    std::vector<RawTweet> ts = {tweet("1", "hello 😂"), tweet("2", "bye ❤️", true)};
    ts[0].source = "Instagram";
    ts[0].timestamp = "2020-01-01T00:00:00Z";
    write_corpus(dir / "c.jsonl", ts);
    const auto back = load_corpus(dir / "c.jsonl");
    CHECK(back.tweets == ts);
  }

  TEST_CASE("filter_records") {
    FilterStats st;
    auto out = filter_records({tweet("1", "x", true), tweet("2", "hello 😂")}, &st);
    REQUIRE(out.size() == 1);
    CHECK(out[0].id == "2");
    CHECK(st.retweet == 1);
    CHECK(filter_records({tweet("1", "   ")}).empty());
    out = filter_records({tweet("a", "first"), tweet("a", "second")}, &st);
    REQUIRE(out.size() == 1);
    CHECK(out[0].text == "first");
    CHECK(filter_records({tweet("1", "RT @bob: hi")}).empty());
  }

  TEST_CASE("filter is idempotent") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<RawTweet> ts;
      const std::size_t n = rng.below(12);
      for (std::size_t i = 0; i < n; ++i) {
        const char* texts[] = {"hi", "  ", "RT @x: y", "ok 😂", ""};
        ts.push_back(tweet(std::to_string(rng.below(6)), texts[rng.below(5)], rng.bernoulli(0.2)));
      }
      const auto once = filter_records(ts);
      CHECK(filter_records(once) == once);
    }
  }

  TEST_CASE("derive_label_set counts and tie rule") {
    std::vector<RawTweet> ts = {tweet("1", "❤️ ❤️ ❤️"), tweet("2", "❤️ 😂 😂"), tweet("3", "❤️ 😂 🔥")};
    auto labels = derive_label_set(ts, 2);
    CHECK(labels.emojis() == std::vector<std::string>{"❤️", "😂"});
    CHECK(labels.counts() == std::vector<std::uint64_t>{5, 3});

    std::vector<RawTweet> tie = {tweet("1", "❤️❤️❤️❤️❤️"), tweet("2", "🔥🔥😂😂")};
    labels = derive_label_set(tie, 2);
    // 😂 is U+1F602 and 🔥 is U+1F525: the lower code point wins the tie.
    CHECK(labels.emojis() == std::vector<std::string>{"❤️", "🔥"});

    CHECK(derive_label_set({tweet("1", "solo 😎")}, 1).emojis() == std::vector<std::string>{"😎"});
    try {
      derive_label_set({tweet("1", "😎")}, 3);
      FAIL("expected a shortfall error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("short by 2") != std::string::npos);
    }
  }

  TEST_CASE("derive_label_set order equals a brute-force sort") {
    Rng rng(11);
    const std::vector<std::string> pool = {"😂", "❤️", "🔥", "😍", "😊", "😎", "👍🏽", "🇺🇸"};
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<RawTweet> ts;
      std::map<std::string, std::uint64_t> counts;
      for (int i = 0; i < 30; ++i) {
        const auto& e = pool[rng.below(pool.size())];
        ++counts[e];
        ts.push_back(tweet(std::to_string(i), "x " + e));
      }
      std::vector<std::pair<std::string, std::uint64_t>> oracle(counts.begin(), counts.end());
      std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return unicode::to_u32(a.first) < unicode::to_u32(b.first);
      });
      const int c = static_cast<int>(oracle.size());
      const auto labels = derive_label_set(ts, c);
      for (int k = 0; k < c; ++k) CHECK(labels.emoji(k) == oracle[k].first);
    }
  }

  TEST_CASE("extract_label policies") {
    const LabelSet labels({"❤️", "😂"}, {2, 1});
    CHECK(extract_label("good ❤️ night 😂", labels, LabelPolicy::kFirst) == 0);
    CHECK(extract_label("😂 then ❤️", labels, LabelPolicy::kFirst) == 1);
    CHECK_FALSE(extract_label("no emoji here", labels, LabelPolicy::kFirst));
    CHECK_FALSE(extract_label("hey 😂 ❤️", labels, LabelPolicy::kOnly));
    CHECK(extract_label("hey 😂 😂", labels, LabelPolicy::kOnly) == 1);
    // Out-of-set emojis are ignored.
    CHECK(extract_label("🔥 then 😂", labels, LabelPolicy::kFirst) == 1);
    CHECK(parse_label_policy("only") == LabelPolicy::kOnly);
    CHECK_THROWS_AS(parse_label_policy("last"), InputError);
  }

  TEST_CASE("label set file round trip") {
    testing::TempDir dir("labels");
    const LabelSet labels({"❤️", "😂", "👨‍👩‍👧"}, {3, 2, 1});
    labels.save(dir / "labels.txt");
    const auto back = LabelSet::load(dir / "labels.txt");
    CHECK(back.emojis() == labels.emojis());
    CHECK(back.fingerprint() == labels.fingerprint());
    CHECK(back.find("😂") == 1);
  }

  TEST_CASE("class_distribution") {
    auto d = class_distribution(examples_with_counts({2, 1}), 2);
    CHECK(d.counts == std::vector<std::size_t>{2, 1});
    CHECK(d.percent[0] == doctest::Approx(66.6667).epsilon(1e-4));
    CHECK(d.percent[1] == doctest::Approx(33.3333).epsilon(1e-4));
    d = class_distribution({}, 3);
    CHECK(d.counts == std::vector<std::size_t>{0, 0, 0});
    d = class_distribution(examples_with_counts({98, 2}), 2);
    CHECK(d.minority == std::vector<bool>{false, true});
  }

  TEST_CASE("balance to median") {
    const auto xs = examples_with_counts({100, 10, 4});
    const auto out = balance(xs, BalanceStrategy::median(), 5);
    CHECK(label_counts(out, 3) == std::vector<std::size_t>{10, 10, 4});
    CHECK(balance(xs, BalanceStrategy::median(), 5) == out);
    const auto same = balance(examples_with_counts({3, 3}), BalanceStrategy::median(), 1);
    CHECK(same == examples_with_counts({3, 3}));
    CHECK_THROWS_AS(balance(xs, BalanceStrategy::fixed_cap(0), 1), InputError);
    CHECK(label_counts(balance(xs, BalanceStrategy::fixed_cap(7), 1), 3) ==
          std::vector<std::size_t>{7, 7, 4});
  }

  TEST_CASE("split sizes, determinism and small classes") {
    const auto xs = examples_with_counts({50, 30, 20});
    const auto s = split(xs, {0.8, 0.1, 0.1}, 3);
    CHECK(s.train.size() == 80);
    CHECK(s.dev.size() == 10);
    CHECK(s.test.size() == 10);
    const auto again = split(xs, {0.8, 0.1, 0.1}, 3);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);

    const auto tiny = split(examples_with_counts({10, 2}), {0.8, 0.1, 0.1}, 1);
    CHECK(tiny.warnings.size() == 1);
    CHECK(label_counts(tiny.train, 2)[1] == 2);
  }

  TEST_CASE("synthetic corpus contract") {
    SyntheticSpec spec;
    spec.noise_words = {"a", "b", "c"};
    ClassTemplate c0;
    c0.emoji = "😂";
    c0.signal_words = {"x"};
    c0.source = "Instagram";
    c0.source_strength = 1.0;
    ClassTemplate c1 = c0;
    c1.emoji = "❤️";
    c1.source_strength = 0.0;
    spec.classes = {c0, c1};
    spec.background_sources = {"Tumblr"};
    const auto ts = generate_synthetic_corpus(spec, 10, 9);
    int n0 = 0;
    for (const auto& t : ts) {
      const auto spans = unicode::find_emojis(t.text);
      CHECK(spans.size() == 1);
      if (t.text.find("😂") != std::string::npos) {
        ++n0;
        CHECK(t.source == std::optional<std::string>("Instagram"));
      }
    }
    CHECK(n0 == 5);
    CHECK(generate_synthetic_corpus(spec, 10, 9) == ts);
    CHECK_THROWS_AS(generate_synthetic_corpus(SyntheticSpec{}, 10, 1), InputError);
    CHECK(SyntheticSpec::preset("ablation").classes.size() == 6);
  }
}
