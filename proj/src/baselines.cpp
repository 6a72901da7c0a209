#include "emojipred/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "emojipred/checkpoint.hpp"

namespace emojipred {

using json = nlohmann::json;

ClassId argmax(const std::vector<double>& scores) {
  ClassId best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = static_cast<ClassId>(c);
  }
  return best;
}

namespace {

void check_dataset(const SparseDataset& data) {
  if (data.size() == 0) throw InputError("training set is empty");
  if (data.y.size() != data.x.size()) throw InputError("feature and label counts differ");
  if (data.num_classes < 1) throw InputError("number of classes must be >= 1");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.x[i].dim != data.dim) {
      throw InputError("inconsistent feature dimension: example " + std::to_string(i) + " has " +
                       std::to_string(data.x[i].dim) + ", expected " + std::to_string(data.dim));
    }
    if (data.y[i] < 0 || data.y[i] >= data.num_classes) throw InputError("label out of range");
  }
}

void check_dim(const SparseVector& x, int dim) {
  if (x.dim != dim) {
    throw InputError("input dimension " + std::to_string(x.dim) + " does not match model dimension " +
                     std::to_string(dim));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear

LinearModel::LinearModel(int num_classes, int dim, LinearConfig config)
    : num_classes_(num_classes),
      dim_(dim),
      config_(config),
      weights_(static_cast<std::size_t>(num_classes) * dim, 0.0),
      bias_(num_classes, 0.0) {}

std::vector<double> LinearModel::scores(const SparseVector& x) const {
  check_dim(x, dim_);
  std::vector<double> s(bias_);
  for (int c = 0; c < num_classes_; ++c) {
    const double* w = weights_.data() + static_cast<std::size_t>(c) * dim_;
    for (std::size_t i = 0; i < x.index.size(); ++i) s[c] += w[x.index[i]] * x.value[i];
  }
  return s;
}

Prediction LinearModel::predict(const SparseVector& x) const {
  Prediction p;
  p.scores = scores(x);
  p.label = argmax(p.scores);
  return p;
}

double LinearModel::objective(const SparseDataset& data) const {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto s = scores(data.x[i]);
    for (int c = 0; c < num_classes_; ++c) {
      const double y = data.y[i] == c ? 1.0 : -1.0;
      loss += std::max(0.0, config_.margin - y * s[c]);
    }
  }
  loss /= static_cast<double>(std::max<std::size_t>(data.size(), 1));
  double sq = 0.0;
  for (double w : weights_) sq += w * w;
  return loss + 0.5 * config_.l2 * sq;
}

LinearModel train_linear(const SparseDataset& data, const LinearConfig& config,
                         std::vector<double>* epoch_objectives) {
  check_dataset(data);
  if (config.epochs < 0 || !(config.learning_rate > 0.0) || config.l2 < 0.0) {
    throw InputError("invalid linear training config");
  }
  const int num_classes = data.num_classes;
  const int dim = data.dim;
  LinearModel model(num_classes, dim, config);

  // w_c = scale_c * v_c so that the L2 shrink step is O(1) per class.
  std::vector<double> v(static_cast<std::size_t>(num_classes) * dim, 0.0);
  std::vector<double> scale(num_classes, 1.0);
  std::vector<double>& bias = model.bias();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    const double lr = config.learning_rate / (1.0 + epoch);
    const double shrink = 1.0 - lr * config.l2;
    for (std::size_t i : order) {
      const SparseVector& x = data.x[i];
      for (int c = 0; c < num_classes; ++c) {
        double* vc = v.data() + static_cast<std::size_t>(c) * dim;
        double dot = 0.0;
        for (std::size_t k = 0; k < x.index.size(); ++k) dot += vc[x.index[k]] * x.value[k];
        const double score = scale[c] * dot + bias[c];
        const double y = data.y[i] == c ? 1.0 : -1.0;
        scale[c] *= shrink;
        if (y * score < config.margin) {
          const double step = lr * y / scale[c];
          for (std::size_t k = 0; k < x.index.size(); ++k) vc[x.index[k]] += step * x.value[k];
          bias[c] += lr * y;
        }
        if (scale[c] < 1e-9) {
          for (int f = 0; f < dim; ++f) vc[f] *= scale[c];
          scale[c] = 1.0;
        }
      }
    }
    if (epoch_objectives) {
      LinearModel snapshot = model;
      for (int c = 0; c < num_classes; ++c) {
        for (int f = 0; f < dim; ++f) {
          const std::size_t k = static_cast<std::size_t>(c) * dim + f;
          snapshot.weights()[k] = scale[c] * v[k];
        }
      }
      epoch_objectives->push_back(snapshot.objective(data));
    }
  }
  for (int c = 0; c < num_classes; ++c) {
    for (int f = 0; f < dim; ++f) {
      const std::size_t k = static_cast<std::size_t>(c) * dim + f;
      model.weights()[k] = scale[c] * v[k];
    }
  }
  for (double w : model.weights()) {
    if (!std::isfinite(w)) throw Error("linear training produced non-finite weights");
  }
  return model;
}

// ---------------------------------------------------------------------------
// Forest

double gini(const std::vector<double>& class_weights) {
  double n = 0.0;
  for (double w : class_weights) n += w;
  if (n <= 0.0) return 0.0;
  double sq = 0.0;
  for (double w : class_weights) sq += (w / n) * (w / n);
  return 1.0 - sq;
}

namespace {

double feature_value(const SparseVector& x, int feature) {
  auto it = std::lower_bound(x.index.begin(), x.index.end(), feature);
  if (it == x.index.end() || *it != feature) return 0.0;
  return x.value[static_cast<std::size_t>(it - x.index.begin())];
}

struct Sample {
  std::size_t row;
  double weight;
};

class TreeBuilder {
 public:
  TreeBuilder(const SparseDataset& data, const ForestConfig& config, int max_features,
              std::uint64_t seed)
      : data_(data), config_(config), max_features_(max_features), rng_(seed),
        touched_(data.dim, 0), hits_(data.dim, 0), lo_(data.dim, 0.0), hi_(data.dim, 0.0) {}

  DecisionTree build(std::vector<Sample> samples) {
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
  };

  std::vector<double> class_weights(const std::vector<Sample>& samples) const {
    std::vector<double> w(data_.num_classes, 0.0);
    for (const auto& s : samples) w[data_.y[s.row]] += s.weight;
    return w;
  }

  int grow(std::vector<Sample> samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto counts = class_weights(samples);
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double impurity = gini(counts);

    Split best;
    if (impurity > 0.0 && depth < config_.max_depth && n >= 2.0 * config_.min_leaf) {
      best = find_split(samples, counts, n, impurity);
    }
    if (best.feature < 0) {
      tree_.nodes[id].distribution = counts;
      return id;
    }
    std::vector<Sample> left, right;
    for (const auto& s : samples) {
      (feature_value(data_.x[s.row], best.feature) <= best.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = tree_.nodes[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    node.gain = n * best.decrease;
    return id;
  }

  // Features that take more than one value among the node's samples.
  std::vector<int> nonconstant_features(const std::vector<Sample>& samples) {
    std::vector<int> present;
    for (const auto& s : samples) {
      const SparseVector& x = data_.x[s.row];
      for (std::size_t k = 0; k < x.index.size(); ++k) {
        const int f = x.index[k];
        const double v = x.value[k];
        if (!touched_[f]) {
          touched_[f] = 1;
          present.push_back(f);
          hits_[f] = 0;
          lo_[f] = hi_[f] = v;
        }
        ++hits_[f];
        lo_[f] = std::min(lo_[f], v);
        hi_[f] = std::max(hi_[f], v);
      }
    }
    std::sort(present.begin(), present.end());
    std::vector<int> out;
    out.reserve(present.size());
    for (int f : present) {
      touched_[f] = 0;
      if (hits_[f] < samples.size() || lo_[f] != hi_[f]) out.push_back(f);
    }
    return out;
  }

  Split find_split(const std::vector<Sample>& samples, const std::vector<double>& counts,
                   double n, double impurity) {
    std::vector<int> candidates = nonconstant_features(samples);
    // Uniform subset of the non-constant features (equivalent to drawing
    // from all features and skipping constant ones).
    const std::size_t m = std::min<std::size_t>(max_features_, candidates.size());
    for (std::size_t k = 0; k < m; ++k) {
      std::swap(candidates[k], candidates[k + rng_.below(candidates.size() - k)]);
    }
    candidates.resize(m);
    std::sort(candidates.begin(), candidates.end());

    Split best;
    const int num_classes = data_.num_classes;
    struct Entry {
      double value;
      ClassId label;
      double weight;
    };
    std::vector<Entry> entries;
    for (int f : candidates) {
      entries.clear();
      std::vector<double> zero = counts;
      for (const auto& s : samples) {
        const double v = feature_value(data_.x[s.row], f);
        if (v != 0.0) {
          entries.push_back({v, data_.y[s.row], s.weight});
          zero[data_.y[s.row]] -= s.weight;
        }
      }
      for (int c = 0; c < num_classes; ++c) {
        if (zero[c] > 1e-12) entries.push_back({0.0, c, zero[c]});
      }
      std::sort(entries.begin(), entries.end(),
                [](const Entry& a, const Entry& b) { return a.value < b.value; });

      std::vector<double> left(num_classes, 0.0);
      double nl = 0.0;
      for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        left[entries[i].label] += entries[i].weight;
        nl += entries[i].weight;
        if (entries[i].value == entries[i + 1].value) continue;
        const double nr = n - nl;
        if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
        std::vector<double> right(num_classes);
        for (int c = 0; c < num_classes; ++c) right[c] = counts[c] - left[c];
        const double decrease = impurity - (nl / n) * gini(left) - (nr / n) * gini(right);
        if (decrease > best.decrease + 1e-12) {
          best.feature = f;
          best.threshold = 0.5 * (entries[i].value + entries[i + 1].value);
          best.decrease = decrease;
        }
      }
    }
    return best;
  }

  const SparseDataset& data_;
  const ForestConfig& config_;
  int max_features_;
  Rng rng_;
  std::vector<char> touched_;
  std::vector<std::size_t> hits_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  DecisionTree tree_;
};

}  // namespace

const TreeNode& DecisionTree::leaf_for(const SparseVector& x) const {
  const TreeNode* node = &nodes.at(0);
  while (!node->is_leaf()) {
    node = &nodes[feature_value(x, node->feature) <= node->threshold ? node->left : node->right];
  }
  return *node;
}

ForestModel::ForestModel(int num_classes, int dim, ForestConfig config,
                         std::vector<DecisionTree> trees)
    : num_classes_(num_classes), dim_(dim), config_(config), trees_(std::move(trees)) {}

std::vector<double> ForestModel::scores(const SparseVector& x) const {
  check_dim(x, dim_);
  std::vector<double> s(num_classes_, 0.0);
  for (const auto& tree : trees_) {
    const auto& dist = tree.leaf_for(x).distribution;
    for (int c = 0; c < num_classes_; ++c) s[c] += dist[c];
  }
  return s;
}

Prediction ForestModel::predict(const SparseVector& x) const {
  Prediction p;
  p.scores = scores(x);
  p.label = argmax(p.scores);
  return p;
}

std::vector<double> ForestModel::feature_importance() const {
  std::vector<double> imp(dim_, 0.0);
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) imp[node.feature] += node.gain;
    }
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (double& v : imp) v /= total;
  }
  return imp;
}

ForestModel train_forest(const SparseDataset& data, const ForestConfig& config) {
  if (config.trees <= 0) throw InputError("forest needs at least one tree");
  if (config.max_depth < 0 || config.min_leaf < 1) throw InputError("invalid forest config");
  check_dataset(data);
  const int max_features = config.max_features > 0
                               ? config.max_features
                               : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(data.dim))));

  std::vector<DecisionTree> trees(config.trees);
  auto build_tree = [&](int t) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    std::vector<Sample> samples;
    if (config.bootstrap) {
      Rng rng(derive_seed(seed, 0xB007));
      std::vector<double> mult(data.size(), 0.0);
      for (std::size_t i = 0; i < data.size(); ++i) mult[rng.below(data.size())] += 1.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (mult[i] > 0.0) samples.push_back({i, mult[i]});
      }
    } else {
      for (std::size_t i = 0; i < data.size(); ++i) samples.push_back({i, 1.0});
    }
    TreeBuilder builder(data, config, max_features, seed);
    trees[t] = builder.build(std::move(samples));
  };

  const int threads = std::clamp(config.threads, 1, config.trees);
  if (threads == 1) {
    for (int t = 0; t < config.trees; ++t) build_tree(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < config.trees; t += threads) build_tree(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return ForestModel(data.num_classes, data.dim, config, std::move(trees));
}

// ---------------------------------------------------------------------------
// Persistence

void save_linear(const std::filesystem::path& path, const LinearModel& model,
                 const json& extra) {
  const auto& cfg = model.config();
  json header = {{"model", "linear"},
                 {"num_classes", model.num_classes()},
                 {"dim", model.dim()},
                 {"config",
                  {{"learning_rate", cfg.learning_rate},
                   {"epochs", cfg.epochs},
                   {"margin", cfg.margin},
                   {"l2", cfg.l2},
                   {"seed", cfg.seed}}},
                 {"extra", extra}};
  checkpoint::Writer w(std::move(header));
  w.add("weights", std::span<const double>(model.weights()));
  w.add("bias", std::span<const double>(model.bias()));
  w.write(path);
}

LinearModel load_linear(const std::filesystem::path& path, json* extra) {
  const auto r = checkpoint::Reader::open(path);
  const json& h = r.header();
  if (h.value("model", "") != "linear") throw ConsistencyError("not a linear model: " + path.string());
  LinearConfig cfg;
  const json& c = h.at("config");
  cfg.learning_rate = c.at("learning_rate").get<double>();
  cfg.epochs = c.at("epochs").get<int>();
  cfg.margin = c.at("margin").get<double>();
  cfg.l2 = c.at("l2").get<double>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  LinearModel model(h.at("num_classes").get<int>(), h.at("dim").get<int>(), cfg);
  model.weights() = r.f64("weights");
  model.bias() = r.f64("bias");
  if (model.weights().size() != static_cast<std::size_t>(model.num_classes()) * model.dim() ||
      model.bias().size() != static_cast<std::size_t>(model.num_classes())) {
    throw ConsistencyError("linear checkpoint tensor sizes do not match header");
  }
  if (extra) *extra = h.value("extra", json::object());
  return model;
}

void save_forest(const std::filesystem::path& path, const ForestModel& model, const json& extra) {
  const auto& cfg = model.config();
  json header = {{"model", "forest"},
                 {"num_classes", model.num_classes()},
                 {"dim", model.dim()},
                 {"config",
                  {{"trees", cfg.trees},
                   {"max_depth", cfg.max_depth},
                   {"min_leaf", cfg.min_leaf},
                   {"max_features", cfg.max_features},
                   {"bootstrap", cfg.bootstrap},
                   {"seed", cfg.seed},
                   {"threads", cfg.threads}}},
                 {"extra", extra}};
  std::vector<std::int32_t> sizes, features, lefts, rights;
  std::vector<double> thresholds, gains, dists;
  for (const auto& tree : model.trees()) {
    sizes.push_back(static_cast<std::int32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      features.push_back(node.feature);
      lefts.push_back(node.left);
      rights.push_back(node.right);
      thresholds.push_back(node.threshold);
      gains.push_back(node.gain);
      if (node.is_leaf()) dists.insert(dists.end(), node.distribution.begin(), node.distribution.end());
    }
  }
  checkpoint::Writer w(std::move(header));
  w.add("tree_sizes", std::span<const std::int32_t>(sizes));
  w.add("feature", std::span<const std::int32_t>(features));
  w.add("left", std::span<const std::int32_t>(lefts));
  w.add("right", std::span<const std::int32_t>(rights));
  w.add("threshold", std::span<const double>(thresholds));
  w.add("gain", std::span<const double>(gains));
  w.add("leaf_distribution", std::span<const double>(dists));
  w.write(path);
}

ForestModel load_forest(const std::filesystem::path& path, json* extra) {
  const auto r = checkpoint::Reader::open(path);
  const json& h = r.header();
  if (h.value("model", "") != "forest") throw ConsistencyError("not a forest model: " + path.string());
  ForestConfig cfg;
  const json& c = h.at("config");
  cfg.trees = c.at("trees").get<int>();
  cfg.max_depth = c.at("max_depth").get<int>();
  cfg.min_leaf = c.at("min_leaf").get<int>();
  cfg.max_features = c.at("max_features").get<int>();
  cfg.bootstrap = c.at("bootstrap").get<bool>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  cfg.threads = c.at("threads").get<int>();
  const int num_classes = h.at("num_classes").get<int>();
  const int dim = h.at("dim").get<int>();

  const auto sizes = r.i32("tree_sizes");
  const auto features = r.i32("feature");
  const auto lefts = r.i32("left");
  const auto rights = r.i32("right");
  const auto thresholds = r.f64("threshold");
  const auto gains = r.f64("gain");
  const auto dists = r.f64("leaf_distribution");

  std::vector<DecisionTree> trees;
  std::size_t k = 0, d = 0;
  for (std::int32_t size : sizes) {
    DecisionTree tree;
    for (std::int32_t i = 0; i < size; ++i, ++k) {
      if (k >= features.size()) throw ConsistencyError("forest checkpoint is truncated");
      TreeNode node;
      node.feature = features[k];
      node.left = lefts[k];
      node.right = rights[k];
      node.threshold = thresholds[k];
      node.gain = gains[k];
      if (node.is_leaf()) {
        if (d + num_classes > dists.size()) throw ConsistencyError("forest checkpoint is truncated");
        node.distribution.assign(dists.begin() + static_cast<long>(d),
                                 dists.begin() + static_cast<long>(d + num_classes));
        d += num_classes;
      } else if (node.feature >= dim || node.left < 0 || node.right < 0 || node.left >= size ||
                 node.right >= size) {
        throw ConsistencyError("forest checkpoint has an invalid node");
      }
      tree.nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(tree));
  }
  if (extra) *extra = h.value("extra", json::object());
  return ForestModel(num_classes, dim, cfg, std::move(trees));
}

}  // namespace emojipred
