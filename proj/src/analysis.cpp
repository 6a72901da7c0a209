#include <algorithm>

#include "emojipred/baselines.hpp"
#include "emojipred/features.hpp"

namespace emojipred {

namespace {

std::vector<ScoredToken> rank_tokens(const std::vector<double>& scores,
                                     const std::vector<bool>& eligible, const Vocabulary& vocab,
                                     int k) {
  std::vector<int> ids;
  for (int f = 2; f < static_cast<int>(scores.size()); ++f) {
    if (eligible[f] && scores[f] > 0.0) ids.push_back(f);
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return vocab.token(a) < vocab.token(b);
  });
  if (ids.size() > static_cast<std::size_t>(k)) ids.resize(k);
  std::vector<ScoredToken> out;
  for (int f : ids) out.push_back({vocab.token(f), scores[f]});
  return out;
}

}  // namespace

FeatureRanking top_features_per_class(const std::vector<std::vector<std::string>>& docs,
                                      const std::vector<ClassId>& labels,
                                      const Vocabulary& vocab, int num_classes,
                                      const TopFeatureOptions& options) {
  if (options.k < 1) throw InputError("k must be >= 1");
  if (docs.size() != labels.size()) throw InputError("documents and labels differ in length");
  FeatureRanking ranking;
  ranking.per_class.resize(num_classes);

  SparseDataset data;
  data.dim = vocab.size();
  data.num_classes = num_classes;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    data.x.push_back(bow_vector(docs[i], vocab, Weighting::kCount));
    data.y.push_back(labels[i]);
  }

  std::vector<std::size_t> class_sizes(num_classes, 0);
  for (ClassId y : labels) {
    if (y < 0 || y >= num_classes) throw InputError("label out of range");
    ++class_sizes[y];
  }
  std::vector<bool> usable(num_classes, false);
  for (int c = 0; c < num_classes; ++c) {
    if (class_sizes[c] == 0) {
      ranking.warnings.push_back("class " + std::to_string(c) + " has no examples");
    } else if (class_sizes[c] == docs.size()) {
      ranking.warnings.push_back("class " + std::to_string(c) +
                                 " has no negative examples for one-vs-rest");
    } else {
      usable[c] = true;
    }
  }

  // Mean feature value inside vs. outside each class decides the sign of
  // the association; importance alone is direction-free.
  std::vector<std::vector<double>> in_sum(num_classes, std::vector<double>(data.dim, 0.0));
  std::vector<double> all_sum(data.dim, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.x[i];
    for (std::size_t k = 0; k < x.index.size(); ++k) {
      in_sum[data.y[i]][x.index[k]] += x.value[k];
      all_sum[x.index[k]] += x.value[k];
    }
  }

  LinearModel linear;
  if (options.method == FeatureMethod::kLinearWeights &&
      std::count(usable.begin(), usable.end(), true) > 0) {
    LinearConfig cfg;
    cfg.epochs = options.linear_epochs;
    cfg.seed = options.seed;
    linear = train_linear(data, cfg);
  }

  for (int c = 0; c < num_classes; ++c) {
    if (!usable[c]) continue;
    const double n_in = static_cast<double>(class_sizes[c]);
    const double n_out = static_cast<double>(docs.size() - class_sizes[c]);
    std::vector<bool> positive(data.dim, false);
    for (int f = 0; f < data.dim; ++f) {
      positive[f] = in_sum[c][f] / n_in > (all_sum[f] - in_sum[c][f]) / n_out;
    }

    std::vector<double> scores(data.dim, 0.0);
    if (options.method == FeatureMethod::kForestImportance) {
      SparseDataset binary = data;
      binary.num_classes = 2;
      for (auto& y : binary.y) y = y == c ? 1 : 0;
      ForestConfig cfg;
      cfg.trees = options.trees;
      cfg.max_depth = options.max_depth;
      cfg.min_leaf = 1;
      cfg.seed = derive_seed(options.seed, static_cast<std::uint64_t>(c));
      cfg.threads = options.threads;
      scores = train_forest(binary, cfg).feature_importance();
    } else {
      for (int f = 0; f < data.dim; ++f) scores[f] = linear.weight(c, f);
    }
    ranking.per_class[c] = rank_tokens(scores, positive, vocab, options.k);
  }
  return ranking;
}

}  // namespace emojipred
