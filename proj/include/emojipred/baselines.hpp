#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "emojipred/common.hpp"
#include "emojipred/features.hpp"

namespace emojipred {

struct SparseDataset {
  std::vector<SparseVector> x;
  std::vector<ClassId> y;
  int dim = 0;
  int num_classes = 0;

  std::size_t size() const { return x.size(); }
};

// Index of the largest score; ties resolve to the lowest index.
ClassId argmax(const std::vector<double>& scores);

struct Prediction {
  ClassId label = 0;
  std::vector<double> scores;
};

// ---------------------------------------------------------------------------
// One-vs-rest linear SVM

struct LinearConfig {
  double learning_rate = 0.1;  // decays as lr / (1 + epoch)
  int epochs = 20;
  double margin = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 1;

  bool operator==(const LinearConfig&) const = default;
};

class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(int num_classes, int dim, LinearConfig config);

  int num_classes() const { return num_classes_; }
  int dim() const { return dim_; }
  const LinearConfig& config() const { return config_; }

  // Row-major C x D.
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  double weight(ClassId c, int feature) const {
    return weights_[static_cast<std::size_t>(c) * dim_ + feature];
  }

  std::vector<double> scores(const SparseVector& x) const;
  Prediction predict(const SparseVector& x) const;

  // Mean multi-class hinge loss plus (l2/2)|W|^2.
  double objective(const SparseDataset& data) const;

  bool operator==(const LinearModel&) const = default;

 private:
  int num_classes_ = 0;
  int dim_ = 0;
  LinearConfig config_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

// Epoch-shuffled SGD on the one-vs-rest hinge loss with L2 regularization.
// When `epoch_objectives` is given, the objective after every epoch is
// appended to it.
LinearModel train_linear(const SparseDataset& data, const LinearConfig& config,
                         std::vector<double>* epoch_objectives = nullptr);

// ---------------------------------------------------------------------------
// Random forest of CART trees

struct ForestConfig {
  int trees = 100;
  int max_depth = 20;
  int min_leaf = 2;
  int max_features = 0;  // 0 selects floor(sqrt(D))
  bool bootstrap = true;
  std::uint64_t seed = 1;
  int threads = 1;

  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double gain = 0.0;                  // weighted impurity decrease
  std::vector<double> distribution;  // leaf class counts (bootstrap-weighted)

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const SparseVector& x) const;
  bool operator==(const DecisionTree&) const = default;
};

double gini(const std::vector<double>& class_weights);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(int num_classes, int dim, ForestConfig config, std::vector<DecisionTree> trees);

  int num_classes() const { return num_classes_; }
  int dim() const { return dim_; }
  const ForestConfig& config() const { return config_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  // Sum of leaf class distributions over all trees.
  std::vector<double> scores(const SparseVector& x) const;
  Prediction predict(const SparseVector& x) const;

  // Mean decrease in impurity per feature, normalized to sum to 1.
  std::vector<double> feature_importance() const;

  bool operator==(const ForestModel&) const = default;

 private:
  int num_classes_ = 0;
  int dim_ = 0;
  ForestConfig config_;
  std::vector<DecisionTree> trees_;
};

ForestModel train_forest(const SparseDataset& data, const ForestConfig& config);

// Round-trip exact persistence. `extra` lands in the checkpoint header.
void save_linear(const std::filesystem::path& path, const LinearModel& model,
                 const nlohmann::json& extra);
LinearModel load_linear(const std::filesystem::path& path, nlohmann::json* extra = nullptr);
void save_forest(const std::filesystem::path& path, const ForestModel& model,
                 const nlohmann::json& extra);
ForestModel load_forest(const std::filesystem::path& path, nlohmann::json* extra = nullptr);

}  // namespace emojipred
