#include "emojipred/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "emojipred/unicode.hpp"

namespace emojipred {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// LabelSet

LabelSet::LabelSet(std::vector<std::string> emojis, std::vector<std::uint64_t> counts)
    : emojis_(std::move(emojis)), counts_(std::move(counts)) {
  if (counts_.empty()) counts_.assign(emojis_.size(), 0);
  if (counts_.size() != emojis_.size()) throw InputError("label counts do not match labels");
  for (std::size_t i = 0; i < emojis_.size(); ++i) {
    if (!index_.emplace(emojis_[i], static_cast<ClassId>(i)).second) {
      throw InputError("duplicate label emoji: " + emojis_[i]);
    }
  }
}

LabelSet LabelSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read label set: " + path.string());
  std::vector<std::string> emojis;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    emojis.push_back(line);
  }
  return LabelSet(std::move(emojis), {});
}

void LabelSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write label set: " + path.string());
  for (const auto& e : emojis_) out << e << '\n';
}

std::optional<ClassId> LabelSet::find(std::string_view emoji) const {
  auto it = index_.find(std::string(emoji));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t LabelSet::fingerprint() const {
  std::uint64_t h = fnv1a64("labels");
  for (const auto& e : emojis_) h = fnv1a64(e + "\n", h);
  return h;
}

// ---------------------------------------------------------------------------
// Loading and filtering

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingResourceError("cannot read corpus: " + path.string());
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  auto skip = [&](const std::string& why) {
    ++result.skipped;
    if (result.warnings.size() < 20) {
      result.warnings.push_back(path.filename().string() + ":" + std::to_string(lineno) + ": " +
                                why);
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; })) {
      continue;
    }
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      skip("malformed JSON");
      continue;
    }
    RawTweet t;
    const auto id = obj.find("id");
    if (id != obj.end() && id->is_string()) {
      t.id = id->get<std::string>();
    } else if (id != obj.end() && id->is_number_unsigned()) {
      t.id = std::to_string(id->get<std::uint64_t>());
    }
    const auto text = obj.find("text");
    if (t.id.empty() || text == obj.end() || !text->is_string()) {
      skip("missing id or text");
      continue;
    }
    t.text = text->get<std::string>();
    if (!unicode::is_valid_utf8(t.text)) {
      skip("text is not valid UTF-8");
      continue;
    }
    if (auto ts = obj.find("created_at"); ts != obj.end() && ts->is_string()) {
      t.timestamp = ts->get<std::string>();
    }
    if (auto src = obj.find("source"); src != obj.end() && src->is_string()) {
      t.source = src->get<std::string>();
    }
    if (auto rt = obj.find("is_retweet"); rt != obj.end()) {
      if (!rt->is_boolean()) {
        skip("is_retweet must be boolean");
        continue;
      }
      t.is_retweet = rt->get<bool>();
    }
    result.tweets.push_back(std::move(t));
  }
  return result;
}

void write_corpus(const std::filesystem::path& path, const std::vector<RawTweet>& tweets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write corpus: " + path.string());
  for (const auto& t : tweets) {
    json obj;
    obj["id"] = t.id;
    obj["text"] = t.text;
    if (t.timestamp) obj["created_at"] = *t.timestamp;
    if (t.source) obj["source"] = *t.source;
    obj["is_retweet"] = t.is_retweet;
    out << obj.dump() << '\n';
  }
}

namespace {

bool is_blank(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!unicode::is_whitespace(unicode::decode_utf8(text, pos))) return false;
  }
  return true;
}

}  // namespace

std::vector<RawTweet> filter_records(const std::vector<RawTweet>& tweets, FilterStats* stats) {
  FilterStats local;
  FilterStats& s = stats ? *stats : local;
  std::unordered_set<std::string> seen;
  std::vector<RawTweet> out;
  for (const auto& t : tweets) {
    if (t.is_retweet || t.text.rfind("RT @", 0) == 0) {
      ++s.retweet;
    } else if (is_blank(t.text)) {
      ++s.empty_text;
    } else if (!seen.insert(t.id).second) {
      ++s.duplicate_id;
    } else {
      out.push_back(t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labels

LabelSet derive_label_set(const std::vector<RawTweet>& tweets, int num_labels) {
  if (num_labels < 1) throw InputError("number of labels must be >= 1");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& t : tweets) {
    for (const auto& span : unicode::find_emojis(t.text)) {
      ++counts[t.text.substr(span.begin, span.end - span.begin)];
    }
  }
  if (counts.size() < static_cast<std::size_t>(num_labels)) {
    throw InputError("corpus has " + std::to_string(counts.size()) +
                     " distinct emojis but " + std::to_string(num_labels) +
                     " labels were requested (short by " +
                     std::to_string(num_labels - counts.size()) + ")");
  }
  // std::map iterates in byte order, which for UTF-8 is code point order.
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(num_labels);
  std::vector<std::string> emojis;
  std::vector<std::uint64_t> freq;
  for (auto& [e, c] : ranked) {
    emojis.push_back(std::move(e));
    freq.push_back(c);
  }
  return LabelSet(std::move(emojis), std::move(freq));
}

LabelPolicy parse_label_policy(std::string_view name) {
  if (name == "first") return LabelPolicy::kFirst;
  if (name == "only") return LabelPolicy::kOnly;
  throw InputError("unknown label policy '" + std::string(name) + "' (expected first|only)");
}

std::string_view to_string(LabelPolicy policy) {
  return policy == LabelPolicy::kFirst ? "first" : "only";
}

std::optional<ClassId> extract_label(std::string_view text, const LabelSet& labels,
                                     LabelPolicy policy) {
  std::optional<ClassId> found;
  for (const auto& span : unicode::find_emojis(text)) {
    const auto id = labels.find(text.substr(span.begin, span.end - span.begin));
    if (!id) continue;
    if (policy == LabelPolicy::kFirst) return id;
    if (found && *found != *id) return std::nullopt;
    found = id;
  }
  return found;
}

ClassDistribution class_distribution(const std::vector<LabeledExample>& examples,
                                     int num_classes) {
  ClassDistribution d;
  d.counts.assign(num_classes, 0);
  for (const auto& ex : examples) {
    if (ex.label < 0 || ex.label >= num_classes) {
      throw InputError("label " + std::to_string(ex.label) + " out of range");
    }
    ++d.counts[ex.label];
  }
  d.total = examples.size();
  d.percent.assign(num_classes, 0.0);
  d.minority.assign(num_classes, false);
  if (d.total == 0) return d;
  for (int c = 0; c < num_classes; ++c) {
    d.percent[c] = 100.0 * static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
    d.minority[c] = d.percent[c] < kMinorityPercent;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Balancing and splitting

namespace {

std::map<ClassId, std::vector<std::size_t>> indices_by_class(
    const std::vector<LabeledExample>& examples) {
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < examples.size(); ++i) by_class[examples[i].label].push_back(i);
  return by_class;
}

}  // namespace

std::vector<LabeledExample> balance(const std::vector<LabeledExample>& examples,
                                    const BalanceStrategy& strategy, std::uint64_t seed) {
  const auto by_class = indices_by_class(examples);
  long long cap = strategy.cap;
  if (strategy.kind == BalanceStrategy::Kind::kMedian) {
    std::vector<long long> sizes;
    for (const auto& [c, idx] : by_class) sizes.push_back(static_cast<long long>(idx.size()));
    if (sizes.empty()) return {};
    std::sort(sizes.begin(), sizes.end());
    const std::size_t m = sizes.size() / 2;
    cap = sizes.size() % 2 ? sizes[m] : (sizes[m - 1] + sizes[m]) / 2;
  }
  if (cap <= 0) throw InputError("balance cap must be positive");

  std::vector<bool> keep(examples.size(), false);
  for (const auto& [c, idx] : by_class) {
    if (static_cast<long long>(idx.size()) <= cap) {
      for (auto i : idx) keep[i] = true;
      continue;
    }
    std::vector<std::size_t> pool = idx;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    // Partial Fisher-Yates: the first `cap` slots form the sample.
    for (long long k = 0; k < cap; ++k) {
      const std::size_t j = k + rng.below(pool.size() - k);
      std::swap(pool[k], pool[j]);
      keep[pool[k]] = true;
    }
  }
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (keep[i]) out.push_back(examples[i]);
  }
  return out;
}

DatasetSplit split(const std::vector<LabeledExample>& examples, const SplitRatios& ratios,
                   std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw InputError("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw InputError("split ratios must sum to 1");
  }
  DatasetSplit out;
  out.seed = seed;
  std::vector<int> assignment(examples.size(), 0);
  std::array<double, 3> target{};   // cumulative ideal sizes
  std::array<long long, 3> given{};  // cumulative assigned sizes

  for (const auto& [c, idx] : indices_by_class(examples)) {
    const auto n = static_cast<long long>(idx.size());
    std::array<long long, 3> take{};
    if (n < 3) {
      out.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(n) +
                             " examples; placed in train");
      take = {n, 0, 0};
    } else {
      std::array<double, 3> frac{};
      long long assigned = 0;
      for (int s = 0; s < 3; ++s) {
        const double ideal = static_cast<double>(n) * ratios[s];
        take[s] = static_cast<long long>(std::floor(ideal + 1e-9));
        frac[s] = ideal - static_cast<double>(take[s]);
        assigned += take[s];
      }
      // Hand leftovers to splits with a fractional share, preferring the one
      // furthest behind its global target so totals stay on ratio.
      for (int s = 0; s < 3; ++s) target[s] += static_cast<double>(n) * ratios[s];
      for (long long left = n - assigned; left > 0; --left) {
        int pick = -1;
        double best_deficit = 0.0;
        for (int s = 0; s < 3; ++s) {
          if (frac[s] <= 1e-9) continue;
          const double deficit = target[s] - static_cast<double>(given[s] + take[s]);
          if (pick < 0 || deficit > best_deficit + 1e-9 ||
              (std::abs(deficit - best_deficit) <= 1e-9 && frac[s] > frac[pick] + 1e-12)) {
            pick = s;
            best_deficit = deficit;
          }
        }
        ++take[pick];
        frac[pick] = 0.0;
      }
    }
    if (n < 3) {
      for (int s = 0; s < 3; ++s) target[s] += static_cast<double>(take[s]);
    }
    for (int s = 0; s < 3; ++s) given[s] += take[s];

    std::vector<std::size_t> order = idx;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(order);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (long long k = 0; k < take[s]; ++k) assignment[order[pos++]] = s;
    }
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& dst = assignment[i] == 0 ? out.train : assignment[i] == 1 ? out.dev : out.test;
    dst.push_back(examples[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

namespace {

const std::vector<std::string>& common_noise_words() {
  static const std::vector<std::string> words = {
      "the",   "a",     "just",  "really", "time",   "people", "got",   "know",
      "going", "new",   "see",   "back",   "still",  "one",    "thing", "make",
      "now",   "today", "this",  "that",   "with",   "my",     "your",  "we",
      "they",  "so",    "when",  "what",   "about",  "out",    "can",   "all",
      "like",  "more",  "been",  "tonight", "week",  "always", "here",  "there",
  };
  return words;
}

// Days since 1970-01-01 to civil date.
void civil_from_days(long long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long yy = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yy + (m <= 2));
}

std::string iso_timestamp(long long epoch_seconds) {
  long long days = epoch_seconds / 86400;
  long long secs = epoch_seconds % 86400;
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d, secs / 3600,
                (secs / 60) % 60, secs % 60);
  return buf;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

}  // namespace

SyntheticSpec SyntheticSpec::planted() {
  SyntheticSpec spec;
  spec.classes = {
      {"❤️", {"pizza", "cheese", "oven"}, 1.0, {}, 0.0, "", 0.0},
      {"😂", {"soccer", "goal", "stadium"}, 1.0, {}, 0.0, "", 0.0},
      {"🔥", {"umbrella", "cloudy", "drizzle"}, 1.0, {}, 0.0, "", 0.0},
      {"😍", {"guitar", "concert", "album"}, 1.0, {}, 0.0, "", 0.0},
  };
  spec.noise_words = common_noise_words();
  spec.background_sources = {"Instagram", "Twitter for iPhone", "Twitter for Android",
                             "Twitter Web App"};
  spec.signal_words_per_tweet = 2;
  return spec;
}

SyntheticSpec SyntheticSpec::ablation() {
  SyntheticSpec spec;
  const std::vector<std::vector<std::string>> groups = {
      {"beach", "sunset", "summer", "waves"},
      {"exam", "homework", "study", "library"},
      {"pizza", "burger", "dinner", "kitchen"},
  };
  const std::vector<std::string> emojis = {"❤️", "😂", "😍", "🔥", "😊", "😎"};
  const std::vector<std::string> tags = {"blessed", "mood", "squad", "goals", "tbt", "lit"};
  for (std::size_t c = 0; c < emojis.size(); ++c) {
    ClassTemplate t;
    t.emoji = emojis[c];
    t.signal_words = groups[c / 2];
    t.text_strength = 0.9;
    t.hashtags = {tags[c]};
    t.hashtag_strength = 0.5;
    t.source = c % 2 == 0 ? "Instagram" : "Twitter for iPhone";
    t.source_strength = 0.9;
    spec.classes.push_back(std::move(t));
  }
  spec.noise_words = common_noise_words();
  spec.background_sources = {"Twitter for Android", "Twitter Web App", "Tumblr"};
  return spec;
}

SyntheticSpec SyntheticSpec::preset(std::string_view name) {
  if (name == "planted") return planted();
  if (name == "ablation") return ablation();
  throw InputError("unknown synthetic preset '" + std::string(name) +
                   "' (expected planted|ablation)");
}

SyntheticSpec SyntheticSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read synthetic template: " + path.string());
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw InputError("synthetic template is not a JSON object: " + path.string());
  }
  SyntheticSpec spec;
  try {
    for (const auto& c : doc.at("classes")) {
      ClassTemplate t;
      t.emoji = c.at("emoji").get<std::string>();
      t.signal_words = c.value("signal_words", std::vector<std::string>{});
      t.text_strength = c.value("text_strength", 1.0);
      t.hashtags = c.value("hashtags", std::vector<std::string>{});
      t.hashtag_strength = c.value("hashtag_strength", 0.0);
      t.source = c.value("source", std::string{});
      t.source_strength = c.value("source_strength", 0.0);
      spec.classes.push_back(std::move(t));
    }
    spec.noise_words = doc.value("noise_words", common_noise_words());
    spec.background_sources = doc.value("background_sources", std::vector<std::string>{});
    spec.min_noise_words = doc.value("min_noise_words", spec.min_noise_words);
    spec.max_noise_words = doc.value("max_noise_words", spec.max_noise_words);
    spec.signal_words_per_tweet = doc.value("signal_words_per_tweet", spec.signal_words_per_tweet);
    spec.mention_rate = doc.value("mention_rate", spec.mention_rate);
    spec.url_rate = doc.value("url_rate", spec.url_rate);
  } catch (const json::exception& e) {
    throw InputError("bad synthetic template " + path.string() + ": " + e.what());
  }
  return spec;
}

std::vector<RawTweet> generate_synthetic_corpus(const SyntheticSpec& spec, std::size_t n,
                                                std::uint64_t seed) {
  if (spec.classes.empty()) throw InputError("synthetic spec has no classes");
  if (spec.noise_words.empty()) throw InputError("synthetic spec has no noise words");
  if (spec.min_noise_words < 0 || spec.max_noise_words < spec.min_noise_words) {
    throw InputError("synthetic spec has an invalid noise word range");
  }
  const std::size_t num_classes = spec.classes.size();
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % num_classes;
  Rng order_rng(derive_seed(seed, 0));
  order_rng.shuffle(labels);

  constexpr long long kEpochStart = 1575158400;  // 2019-12-01T00:00:00Z
  std::vector<RawTweet> tweets;
  tweets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClassTemplate& cls = spec.classes[labels[i]];
    Rng rng(derive_seed(seed, i + 1));

    std::vector<std::string> words;
    const int k = spec.min_noise_words +
                  static_cast<int>(rng.below(spec.max_noise_words - spec.min_noise_words + 1));
    for (int w = 0; w < k; ++w) words.push_back(pick(rng, spec.noise_words));

    if (!cls.signal_words.empty() && rng.bernoulli(cls.text_strength)) {
      std::vector<std::string> pool = cls.signal_words;
      rng.shuffle(pool);
      const std::size_t m =
          std::min<std::size_t>(std::max(spec.signal_words_per_tweet, 1), pool.size());
      for (std::size_t s = 0; s < m; ++s) {
        words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), pool[s]);
      }
    }
    if (!words.empty() && rng.bernoulli(0.3)) {
      std::string& first = words.front();
      if (first[0] >= 'a' && first[0] <= 'z') first[0] = static_cast<char>(first[0] - 32);
    }
    words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), cls.emoji);
    if (rng.bernoulli(spec.mention_rate)) {
      words.insert(words.begin(), "@user" + std::to_string(rng.below(1000)));
    }
    if (!cls.hashtags.empty() && rng.bernoulli(cls.hashtag_strength)) {
      words.push_back("#" + pick(rng, cls.hashtags));
    }
    if (rng.bernoulli(spec.url_rate)) {
      static constexpr char kAlnum[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
      std::string url = "https://t.co/";
      for (int c = 0; c < 8; ++c) url.push_back(kAlnum[rng.below(sizeof(kAlnum) - 1)]);
      words.push_back(url);
    }

    RawTweet t;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%07zu", i);
    t.id = id;
    for (const auto& w : words) {
      if (!t.text.empty()) t.text.push_back(' ');
      t.text += w;
    }
    t.timestamp = iso_timestamp(kEpochStart + static_cast<long long>(i) * 97 +
                                static_cast<long long>(rng.below(60)));
    if (!cls.source.empty() && rng.bernoulli(cls.source_strength)) {
      t.source = cls.source;
    } else if (!spec.background_sources.empty()) {
      t.source = pick(rng, spec.background_sources);
    }
    tweets.push_back(std::move(t));
  }
  return tweets;
}

}  // namespace emojipred
