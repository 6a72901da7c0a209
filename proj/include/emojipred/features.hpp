#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emojipred/common.hpp"
#include "emojipred/corpus.hpp"
#include "emojipred/textprep.hpp"

namespace emojipred {

// Token <-> id map with <pad>=0 and <unk>=1 reserved.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);  // non-reserved, in id order

  // Lines of "token<TAB>id".
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Ranks tokens by (count desc, token asc) and keeps the top max_size - 2
// that occur at least min_freq times.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs, int min_freq,
                       int max_size);

struct EncodedExample {
  std::vector<int> text_ids;  // padded/truncated to L
  int text_len = 0;
  std::vector<int> hashtag_ids;
  SourceId source_id = 0;
  ClassId label = 0;
};

EncodedExample encode_example(const LabeledExample& example, const Vocabulary& text_vocab,
                              const Vocabulary& hashtag_vocab, int max_len);

struct SparseVector {
  std::vector<int> index;  // strictly increasing
  std::vector<double> value;
  int dim = 0;

  std::size_t nnz() const { return index.size(); }
  double dot(const std::vector<double>& dense) const;
};

enum class Weighting { kCount, kBinary };

SparseVector bow_vector(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                        Weighting weighting = Weighting::kCount);

SparseVector one_hot(int index, int dim);

// Concatenates feature blocks, offsetting indices of each block.
SparseVector concat(const std::vector<SparseVector>& blocks);

// ---------------------------------------------------------------------------
// Analysis

enum class FeatureMethod { kForestImportance, kLinearWeights };

FeatureMethod parse_feature_method(std::string_view name);

struct ScoredToken {
  std::string token;
  double score = 0.0;
};

struct FeatureRanking {
  std::vector<std::vector<ScoredToken>> per_class;
  std::vector<std::string> warnings;
};

struct TopFeatureOptions {
  FeatureMethod method = FeatureMethod::kForestImportance;
  int k = 5;
  int trees = 25;
  int max_depth = 12;
  int linear_epochs = 10;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Fits one one-vs-rest model per class over bag-of-words features and
// returns the top-k tokens that are positively associated with the class.
FeatureRanking top_features_per_class(const std::vector<std::vector<std::string>>& docs,
                                      const std::vector<ClassId>& labels,
                                      const Vocabulary& vocab, int num_classes,
                                      const TopFeatureOptions& options);

struct SourceCrosstab {
  std::vector<std::vector<std::size_t>> counts;  // [source][label]
  std::vector<std::size_t> source_totals;
  std::vector<SourceId> source_ranking;          // by count desc, name asc
  std::vector<std::vector<ClassId>> top_labels;  // [source] top-m labels
};

SourceCrosstab source_emoji_crosstab(const std::vector<LabeledExample>& examples,
                                     const SourceTable& sources, int num_classes, int top_m);

}  // namespace emojipred
