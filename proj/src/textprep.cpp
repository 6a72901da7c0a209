#include "emojipred/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emojipred/unicode.hpp"

namespace emojipred {
namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) { return is_ascii_digit(c) || is_ascii_alpha(c); }
bool is_word_char(char c) { return is_ascii_alnum(c) || c == '_'; }

char to_lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower_ascii(c);
  return out;
}

bool istarts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower_ascii(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Splits on Unicode whitespace.
std::vector<std::string> split_chunks(std::string_view s) {
  std::vector<std::string> chunks;
  std::string cur;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t begin = pos;
    const char32_t cp = unicode::decode_utf8(s, pos);
    if (unicode::is_whitespace(cp)) {
      if (!cur.empty()) chunks.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.append(s.substr(begin, pos - begin));
    }
  }
  if (!cur.empty()) chunks.push_back(std::move(cur));
  return chunks;
}

void drop_urls(std::string& chunk) {
  if (istarts_with(chunk, 0, "www.")) {
    chunk.clear();
    return;
  }
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    if (istarts_with(chunk, i, "http://") || istarts_with(chunk, i, "https://")) {
      chunk.resize(i);
      return;
    }
  }
}

void drop_mentions(std::string& chunk) {
  std::string out;
  for (std::size_t i = 0; i < chunk.size();) {
    const bool boundary = i == 0 || !is_ascii_alnum(chunk[i - 1]);
    if (chunk[i] == '@' && boundary && i + 1 < chunk.size() && is_word_char(chunk[i + 1])) {
      ++i;
      while (i < chunk.size() && is_word_char(chunk[i])) ++i;
      continue;
    }
    out.push_back(chunk[i++]);
  }
  chunk = std::move(out);
}

// Strips leading/trailing punctuation code points.
std::string_view trim_punct(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t next = begin;
    if (!unicode::is_punctuation(unicode::decode_utf8(s, next))) break;
    begin = next;
  }
  std::size_t end = s.size();
  while (end > begin) {
    // Walk back to the start of the last code point.
    std::size_t start = end - 1;
    while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
    std::size_t probe = start;
    if (!unicode::is_punctuation(unicode::decode_utf8(s, probe))) break;
    end = start;
  }
  return s.substr(begin, end - begin);
}

std::size_t digit_run(std::string_view s, std::size_t pos) {
  std::size_t n = 0;
  while (pos + n < s.size() && is_ascii_digit(s[pos + n])) ++n;
  return n;
}

// d{1,2} S d{1,2} S d{2,4}  or  d{4} S d{1,2} S d{1,2}, one separator from "/-.".
bool is_date(std::string_view s) {
  std::size_t pos = 0;
  std::size_t parts[3];
  char sep = 0;
  for (int k = 0; k < 3; ++k) {
    parts[k] = digit_run(s, pos);
    if (parts[k] == 0) return false;
    pos += parts[k];
    if (k < 2) {
      if (pos >= s.size()) return false;
      const char c = s[pos];
      if (c != '/' && c != '-' && c != '.') return false;
      if (sep != 0 && c != sep) return false;
      sep = c;
      ++pos;
    }
  }
  if (pos != s.size()) return false;
  const bool dmy = parts[0] <= 2 && parts[1] <= 2 && parts[2] >= 2 && parts[2] <= 4;
  const bool ymd = parts[0] == 4 && parts[1] <= 2 && parts[2] <= 2;
  return dmy || ymd;
}

// Letters with at least one inner asterisk, e.g. "f**k", "sh*t".
bool is_censored(std::string_view s) {
  if (s.size() < 3 || !is_ascii_alpha(s.front()) || !is_ascii_alpha(s.back())) return false;
  bool star = false;
  for (char c : s) {
    if (c == '*') {
      star = true;
    } else if (!is_ascii_alpha(c)) {
      return false;
    }
  }
  return star;
}

bool is_numberish(std::string_view s) {
  bool digit = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const char32_t cp = unicode::decode_utf8(s, pos);
    if (cp >= '0' && cp <= '9') {
      digit = true;
    } else if (!unicode::is_punctuation(cp)) {
      return false;
    }
  }
  return digit;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_ascii_digit);
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

// Lowercases, deletes apostrophes and turns other punctuation into breaks.
void emit_plain(std::string_view chunk, const NormalizationRuleSet& rules,
                std::vector<std::string>& out) {
  std::string piece;
  auto flush = [&] {
    if (piece.empty()) return;
    if (all_digits(piece)) {
      out.emplace_back(kNumber);
    } else if (auto it = rules.acronyms.find(piece); it != rules.acronyms.end()) {
      out.push_back(it->second);
    } else {
      out.push_back(piece);
    }
    piece.clear();
  };
  std::size_t pos = 0;
  while (pos < chunk.size()) {
    const std::size_t begin = pos;
    const char32_t cp = unicode::decode_utf8(chunk, pos);
    if (is_apostrophe(cp)) continue;
    if (unicode::is_punctuation(cp)) {
      flush();
      continue;
    }
    if (cp < 0x80) {
      piece.push_back(to_lower_ascii(static_cast<char>(cp)));
    } else {
      piece.append(chunk.substr(begin, pos - begin));
    }
  }
  flush();
}

}  // namespace

StrippedText strip_and_collect_emojis(std::string_view text) {
  StrippedText result;
  std::string joined;
  std::size_t last = 0;
  for (const auto& span : unicode::find_emojis(text)) {
    joined.append(text.substr(last, span.begin - last));
    joined.push_back(' ');
    result.emojis.emplace_back(text.substr(span.begin, span.end - span.begin));
    last = span.end;
  }
  if (result.emojis.empty()) {
    result.text = collapse_spaces(text);
    return result;
  }
  joined.append(text.substr(last));
  result.text = collapse_spaces(joined);
  return result;
}

const NormalizationRuleSet& NormalizationRuleSet::standard() {
  static const NormalizationRuleSet rules{
      {
          {":)", "<happy>"},
          {":-)", "<happy>"},
          {":D", "<happy>"},
          {":-D", "<happy>"},
          {"(:", "<happy>"},
          {":(", "<sad>"},
          {":-(", "<sad>"},
          {":'(", "<sad>"},
      },
      {
          {"u", "you"},
          {"ur", "your"},
          {"pls", "please"},
          {"plz", "please"},
          {"thx", "thanks"},
          {"b4", "before"},
      },
  };
  return rules;
}

bool is_placeholder(std::string_view token) {
  return token == kHappy || token == kSad || token == kDate || token == kCensored ||
         token == kNumber;
}

std::string normalize(std::string_view text, const NormalizationRuleSet& rules) {
  const std::string no_emoji = strip_and_collect_emojis(text).text;
  std::vector<std::string> tokens;
  for (std::string chunk : split_chunks(no_emoji)) {
    drop_urls(chunk);
    drop_mentions(chunk);
    if (chunk.empty()) continue;

    if (auto it = rules.emoticons.find(chunk); it != rules.emoticons.end()) {
      tokens.push_back(it->second);
      continue;
    }
    if (is_placeholder(chunk)) {
      tokens.push_back(chunk);
      continue;
    }
    const std::string_view core = trim_punct(chunk);
    if (is_date(core)) {
      tokens.emplace_back(kDate);
    } else if (is_censored(core)) {
      tokens.emplace_back(kCensored);
    } else if (is_numberish(chunk)) {
      tokens.emplace_back(kNumber);
    } else {
      emit_plain(chunk, rules, tokens);
    }
  }
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
  return split_chunks(normalized);
}

std::vector<std::string> extract_hashtags(std::string_view raw) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < raw.size() && is_word_char(raw[j])) ++j;
    if (j > i + 1) {
      tags.push_back(lower_ascii(raw.substr(i + 1, j - i - 1)));
      i = j - 1;
    }
  }
  return tags;
}

std::string remove_hashtags(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '#' && i + 1 < raw.size() && is_word_char(raw[i + 1])) {
      std::size_t j = i + 1;
      while (j < raw.size() && is_word_char(raw[j])) ++j;
      out.push_back(' ');
      i = j - 1;
      continue;
    }
    out.push_back(raw[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation

SegmentLexicon::SegmentLexicon(CountMap counts, int max_word_len)
    : counts_(std::move(counts)), max_word_len_(max_word_len) {
  if (max_word_len_ < 1) throw InputError("max_word_len must be >= 1");
  for (const auto& [word, c] : counts_) {
    if (c == 0) throw InputError("lexicon count for '" + word + "' must be positive");
    total_ += c;
  }
}

SegmentLexicon SegmentLexicon::from_tokens(const std::vector<std::vector<std::string>>& docs,
                                           int max_word_len) {
  CountMap counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) {
      if (tok.empty()) continue;
      const bool ok = std::all_of(tok.begin(), tok.end(), [](char c) {
        return is_ascii_digit(c) || (c >= 'a' && c <= 'z');
      });
      if (ok) ++counts[tok];
    }
  }
  return SegmentLexicon(std::move(counts), max_word_len);
}

SegmentLexicon SegmentLexicon::load(const std::filesystem::path& path, int max_word_len) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read lexicon: " + path.string());
  CountMap counts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>count");
    }
    std::uint64_t c = 0;
    try {
      c = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad count");
    }
    counts[lower_ascii(line.substr(0, tab))] += c;
  }
  return SegmentLexicon(std::move(counts), max_word_len);
}

void SegmentLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write lexicon: " + path.string());
  for (const auto& [word, c] : counts_) out << word << '\t' << c << '\n';
}

std::uint64_t SegmentLexicon::count(std::string_view word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

double SegmentLexicon::log_prob(std::string_view word) const {
  const double log_total = std::log(static_cast<double>(std::max<std::uint64_t>(total_, 1)));
  const std::uint64_t c = count(word);
  if (c > 0) return std::log(static_cast<double>(c)) - log_total;
  return -log_total - static_cast<double>(word.size()) * std::log(10.0);
}

std::vector<std::string> segment_hashtag(std::string_view tag, const SegmentLexicon& lexicon) {
  if (tag.empty()) throw InputError("cannot segment an empty hashtag");
  for (char c : tag) {
    if (!is_ascii_digit(c) && !(c >= 'a' && c <= 'z')) {
      throw InputError("hashtag must be lowercase alphanumeric: " + std::string(tag));
    }
  }
  constexpr double kTol = 1e-9;
  struct Cell {
    double score = -INFINITY;
    std::vector<std::string> words;
  };
  const std::size_t n = tag.size();
  const std::size_t max_len = static_cast<std::size_t>(lexicon.max_word_len());
  std::vector<Cell> best(n + 1);
  best[0].score = 0.0;
  for (std::size_t end = 1; end <= n; ++end) {
    const std::size_t lo = end > max_len ? end - max_len : 0;
    for (std::size_t start = lo; start < end; ++start) {
      const Cell& prev = best[start];
      if (prev.score == -INFINITY) continue;
      const std::string_view word = tag.substr(start, end - start);
      const double score = prev.score + lexicon.log_prob(word);
      Cell& cur = best[end];
      bool better = false;
      if (cur.score == -INFINITY || score > cur.score + kTol) {
        better = true;
      } else if (score >= cur.score - kTol) {
        const std::size_t nw = prev.words.size() + 1;
        if (nw != cur.words.size()) {
          better = nw < cur.words.size();
        } else {
          std::vector<std::string> cand = prev.words;
          cand.emplace_back(word);
          better = cand < cur.words;
        }
      }
      if (better) {
        cur.score = score;
        cur.words = prev.words;
        cur.words.emplace_back(word);
      }
    }
  }
  return best[n].words;
}

std::vector<std::string> hashtag_words(std::string_view tag, const SegmentLexicon& lexicon) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos <= tag.size()) {
    std::size_t next = tag.find('_', pos);
    if (next == std::string_view::npos) next = tag.size();
    if (next > pos) {
      for (auto& w : segment_hashtag(lower_ascii(tag.substr(pos, next - pos)), lexicon)) {
        words.push_back(std::move(w));
      }
    }
    pos = next + 1;
  }
  return words;
}

// ---------------------------------------------------------------------------
// Sources

SourceTable::SourceTable() : SourceTable({}, default_aliases()) {}

SourceTable::SourceTable(std::vector<std::string> kept, AliasMap aliases)
    : aliases_(std::move(aliases)) {
  for (auto& name : kept) {
    if (name == kSourceOther || name == kSourceUnknown || ids_.count(name)) continue;
    ids_.emplace(name, static_cast<SourceId>(names_.size()));
    names_.push_back(std::move(name));
  }
  for (std::string_view fixed : {kSourceOther, kSourceUnknown}) {
    ids_.emplace(std::string(fixed), static_cast<SourceId>(names_.size()));
    names_.emplace_back(fixed);
  }
}

const SourceTable::AliasMap& SourceTable::default_aliases() {
  static const AliasMap aliases = {
      {"instagram", "instagram"},
      {"twitter for iphone", "twitter_iphone"},
      {"twitter for android", "twitter_android"},
      {"twitter for ipad", "twitter_ipad"},
      {"twitter web app", "twitter_web"},
      {"twitter web client", "twitter_web"},
      {"twitter lite", "twitter_lite"},
      {"tweetdeck", "tweetdeck"},
      {"tumblr", "tumblr"},
      {"facebook", "facebook"},
      {"foursquare", "foursquare"},
      {"foursquare swarm", "foursquare"},
      {"hootsuite", "hootsuite"},
      {"hootsuite inc.", "hootsuite"},
      {"ifttt", "ifttt"},
  };
  return aliases;
}

SourceTable::AliasMap SourceTable::load_aliases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read source alias table: " + path.string());
  AliasMap aliases = default_aliases();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 >= line.size()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": expected alias<TAB>canonical");
    }
    aliases[lower_ascii(line.substr(0, tab))] = line.substr(tab + 1);
  }
  return aliases;
}

SourceTable SourceTable::load(const std::filesystem::path& path, AliasMap aliases) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read source table: " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string name = line.substr(0, tab);
    const int id = tab == std::string::npos ? -1 : std::atoi(line.c_str() + tab + 1);
    if (id != static_cast<int>(names.size())) {
      throw ConsistencyError("source table ids must be dense: " + path.string());
    }
    names.push_back(name);
  }
  if (names.size() < 2 || names[names.size() - 2] != kSourceOther ||
      names.back() != kSourceUnknown) {
    throw ConsistencyError("source table must end with other, unknown: " + path.string());
  }
  names.resize(names.size() - 2);
  return SourceTable(std::move(names), std::move(aliases));
}

void SourceTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write source table: " + path.string());
  for (std::size_t i = 0; i < names_.size(); ++i) out << names_[i] << '\t' << i << '\n';
}

std::optional<std::string> SourceTable::canonicalize(std::optional<std::string_view> raw) const {
  if (!raw) return std::nullopt;
  std::string text;
  bool in_tag = false;
  for (char c : *raw) {
    if (c == '<') {
      in_tag = true;
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      text.push_back(c);
    }
  }
  std::string lowered = collapse_spaces(lower_ascii(text));
  while (!lowered.empty() && (lowered.front() == ' ' || lowered.front() == '\t')) {
    lowered.erase(lowered.begin());
  }
  while (!lowered.empty() && (lowered.back() == '\t' || lowered.back() == '\n' ||
                              lowered.back() == '\r')) {
    lowered.pop_back();
  }
  if (lowered.empty()) return std::nullopt;
  if (auto it = aliases_.find(lowered); it != aliases_.end()) return it->second;
  std::string slug;
  for (char c : lowered) {
    if (is_ascii_alnum(c)) {
      slug.push_back(c);
    } else if (!slug.empty() && slug.back() != '_') {
      slug.push_back('_');
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  if (slug.empty()) return std::string(kSourceOther);
  return slug;
}

SourceId SourceTable::id_of(std::string_view canonical) const {
  auto it = ids_.find(std::string(canonical));
  return it == ids_.end() ? other_id() : it->second;
}

std::uint64_t SourceTable::fingerprint() const {
  std::uint64_t h = fnv1a64("sources");
  for (const auto& n : names_) h = fnv1a64(n + "\n", h);
  return h;
}

SourceId normalize_source(std::optional<std::string_view> raw, const SourceTable& table) {
  const auto canonical = table.canonicalize(raw);
  if (!canonical) return table.unknown_id();
  return table.id_of(*canonical);
}

SourceTable build_source_table(const std::vector<std::optional<std::string>>& raw_sources,
                               int k, SourceTable::AliasMap aliases) {
  if (k < 1) throw InputError("source table size K must be >= 1");
  const SourceTable probe({}, aliases);
  std::map<std::string, std::size_t> counts;
  for (const auto& raw : raw_sources) {
    if (!raw) continue;
    if (auto c = probe.canonicalize(std::string_view(*raw))) ++counts[*c];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> kept;
  for (const auto& [name, count] : ranked) {
    if (name == kSourceOther || name == kSourceUnknown) continue;
    if (static_cast<int>(kept.size()) >= k) break;
    kept.push_back(name);
  }
  return SourceTable(std::move(kept), std::move(aliases));
}

}  // namespace emojipred
