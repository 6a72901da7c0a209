#include "emojipred/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace emojipred {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size() + 2);
  tokens_.emplace_back(kPadToken);
  tokens_.emplace_back(kUnkToken);
  for (auto& t : tokens) {
    if (t == kPadToken || t == kUnkToken) throw InputError("reserved token in vocabulary: " + t);
    tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw InputError("duplicate vocabulary token: " + tokens_[i]);
    }
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read vocabulary: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  int expected = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || std::atoi(line.c_str() + tab + 1) != expected) {
      throw ConsistencyError("vocabulary ids must be dense from 0: " + path.string());
    }
    std::string token = line.substr(0, tab);
    if (expected == kPad && token != kPadToken) throw ConsistencyError("vocabulary id 0 must be <pad>");
    if (expected == kUnk && token != kUnkToken) throw ConsistencyError("vocabulary id 1 must be <unk>");
    if (expected > kUnk) tokens.push_back(std::move(token));
    ++expected;
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write vocabulary: " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a64("vocab");
  for (const auto& t : tokens_) h = fnv1a64(t + "\n", h);
  return h;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs, int min_freq,
                       int max_size) {
  if (min_freq < 1) throw InputError("min_freq must be >= 1");
  if (max_size < 2) throw InputError("vocabulary max_size must be >= 2");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) {
      if (tok == Vocabulary::kPadToken || tok == Vocabulary::kUnkToken) continue;
      ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, c] : counts) {
    if (c >= static_cast<std::size_t>(min_freq)) ranked.emplace_back(tok, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > static_cast<std::size_t>(max_size - 2)) ranked.resize(max_size - 2);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, c] : ranked) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

EncodedExample encode_example(const LabeledExample& example, const Vocabulary& text_vocab,
                              const Vocabulary& hashtag_vocab, int max_len) {
  if (max_len < 1) throw InputError("max text length must be >= 1");
  EncodedExample enc;
  enc.text_ids.assign(max_len, Vocabulary::kPad);
  enc.text_len = static_cast<int>(std::min<std::size_t>(example.text_tokens.size(), max_len));
  for (int i = 0; i < enc.text_len; ++i) enc.text_ids[i] = text_vocab.id(example.text_tokens[i]);
  enc.hashtag_ids.reserve(example.hashtag_tokens.size());
  for (const auto& h : example.hashtag_tokens) enc.hashtag_ids.push_back(hashtag_vocab.id(h));
  enc.source_id = example.source_id;
  enc.label = example.label;
  return enc;
}

double SparseVector::dot(const std::vector<double>& dense) const {
  double s = 0.0;
  for (std::size_t i = 0; i < index.size(); ++i) s += value[i] * dense[index[i]];
  return s;
}

SparseVector bow_vector(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                        Weighting weighting) {
  std::map<int, double> acc;
  for (const auto& t : tokens) acc[vocab.id(t)] += 1.0;
  SparseVector v;
  v.dim = vocab.size();
  for (const auto& [idx, val] : acc) {
    v.index.push_back(idx);
    v.value.push_back(weighting == Weighting::kBinary ? 1.0 : val);
  }
  return v;
}

SparseVector one_hot(int index, int dim) {
  if (index < 0 || index >= dim) throw InputError("one-hot index out of range");
  SparseVector v;
  v.dim = dim;
  v.index.push_back(index);
  v.value.push_back(1.0);
  return v;
}

SparseVector concat(const std::vector<SparseVector>& blocks) {
  SparseVector out;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.index.size(); ++i) {
      out.index.push_back(out.dim + b.index[i]);
      out.value.push_back(b.value[i]);
    }
    out.dim += b.dim;
  }
  return out;
}

FeatureMethod parse_feature_method(std::string_view name) {
  if (name == "ovr-forest-importance" || name == "forest") return FeatureMethod::kForestImportance;
  if (name == "ovr-linear-weights" || name == "linear") return FeatureMethod::kLinearWeights;
  throw InputError("unknown feature method '" + std::string(name) +
                   "' (expected ovr-forest-importance|ovr-linear-weights)");
}

SourceCrosstab source_emoji_crosstab(const std::vector<LabeledExample>& examples,
                                     const SourceTable& sources, int num_classes, int top_m) {
  if (top_m < 1) throw InputError("top_m must be >= 1");
  const int num_sources = sources.size();
  SourceCrosstab tab;
  tab.counts.assign(num_sources, std::vector<std::size_t>(num_classes, 0));
  tab.source_totals.assign(num_sources, 0);
  for (const auto& ex : examples) {
    if (ex.source_id < 0 || ex.source_id >= num_sources) throw InputError("source id out of range");
    if (ex.label < 0 || ex.label >= num_classes) throw InputError("label out of range");
    ++tab.counts[ex.source_id][ex.label];
    ++tab.source_totals[ex.source_id];
  }
  tab.source_ranking.resize(num_sources);
  for (int s = 0; s < num_sources; ++s) tab.source_ranking[s] = s;
  std::sort(tab.source_ranking.begin(), tab.source_ranking.end(), [&](SourceId a, SourceId b) {
    if (tab.source_totals[a] != tab.source_totals[b]) {
      return tab.source_totals[a] > tab.source_totals[b];
    }
    return sources.name(a) < sources.name(b);
  });
  tab.top_labels.resize(num_sources);
  for (int s = 0; s < num_sources; ++s) {
    std::vector<ClassId> order(num_classes);
    for (int c = 0; c < num_classes; ++c) order[c] = c;
    const auto& row = tab.counts[s];
    std::stable_sort(order.begin(), order.end(),
                     [&](ClassId a, ClassId b) { return row[a] > row[b]; });
    order.resize(std::min(top_m, num_classes));
    tab.top_labels[s] = std::move(order);
  }
  return tab;
}

}  // namespace emojipred
