#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emojipred/baselines.hpp"
#include "emojipred/common.hpp"
#include "emojipred/features.hpp"

namespace emojipred {

struct FeatureFlags {
  bool use_hashtags = false;
  bool use_source = false;

  bool operator==(const FeatureFlags&) const = default;
};

struct BiLstmDims {
  int text_vocab = 0;
  int hash_vocab = 0;
  int source_vocab = 0;
  int num_classes = 0;
  int d = 64;    // text and hashtag embedding width
  int d_s = 16;  // source embedding width
  int h = 64;    // hidden width per direction

  bool operator==(const BiLstmDims&) const = default;
  void validate() const;
};

// One LSTM direction. Gate blocks are stacked in the order input, forget,
// cell, output: W is 4h x d, U is 4h x h, b is 4h (all row-major).
template <typename T>
struct LstmWeights {
  std::vector<T> W, U, b;
  bool operator==(const LstmWeights&) const = default;
};

template <typename T>
struct BiLstmParams {
  BiLstmDims dims;
  FeatureFlags flags;
  std::vector<T> text_emb;  // V_t x d, row 0 (<pad>) stays zero
  std::vector<T> hash_emb;  // V_h x d, row 0 (<pad>) stays zero
  std::vector<T> src_emb;   // V_s x d_s
  LstmWeights<T> fwd, bwd;
  std::vector<T> out_W;  // C x feature_dim()
  std::vector<T> out_b;  // C

  int feature_dim() const {
    return 2 * dims.h + (flags.use_hashtags ? dims.d : 0) + (flags.use_source ? dims.d_s : 0);
  }

  static BiLstmParams zeros(const BiLstmDims& dims, const FeatureFlags& flags);

  // Every tensor with a stable name, in a fixed order.
  std::vector<std::pair<std::string, std::vector<T>*>> tensors();
  std::vector<std::pair<std::string, const std::vector<T>*>> tensors() const;

  template <typename U>
  BiLstmParams<U> cast() const {
    BiLstmParams<U> out;
    out.dims = dims;
    out.flags = flags;
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i].second->assign(src[i].second->begin(), src[i].second->end());
    }
    return out;
  }

  bool operator==(const BiLstmParams&) const = default;
};

// Uniform(-scale, scale) for every weight, forget-gate bias 1.0, <pad> rows
// zero.
template <typename T>
BiLstmParams<T> init_params(const BiLstmDims& dims, const FeatureFlags& flags,
                            std::uint64_t seed, double scale = 0.08);

template <typename T>
struct DirectionCache {
  std::vector<int> order;  // token ids in processing order
  std::vector<T> gates;    // n x 4h post-activation (i, f, g, o)
  std::vector<T> cells;    // n x h
  std::vector<T> hidden;   // n x h
};

template <typename T>
struct ForwardCache {
  DirectionCache<T> fwd, bwd;
  std::vector<int> hashtag_ids;
  int source_id = 0;
  std::vector<T> features;  // concatenated representation
  std::vector<T> logits;
  std::vector<T> probs;
};

// Validates ids against the vocab sizes; throws InputError when out of range.
void check_example(const BiLstmDims& dims, const EncodedExample& ex);

template <typename T>
ForwardCache<T> forward(const BiLstmParams<T>& params, const EncodedExample& ex);

template <typename T>
std::vector<ForwardCache<T>> forward(const BiLstmParams<T>& params,
                                     const std::vector<EncodedExample>& batch);

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits);

// -log softmax(logits)[label], computed through log-sum-exp.
template <typename T>
T cross_entropy(const std::vector<T>& logits, ClassId label);

template <typename T>
T mean_loss(const std::vector<ForwardCache<T>>& caches, const std::vector<EncodedExample>& batch);

struct BackwardOptions {
  // Test-harness mutation: flips the sign of dL/df so gradient checks can be
  // shown to catch a broken recurrence.
  bool negate_forget_gate_term = false;
};

// Gradient of the mean cross-entropy over the batch.
template <typename T>
BiLstmParams<T> backward(const BiLstmParams<T>& params, const std::vector<ForwardCache<T>>& caches,
                         const std::vector<EncodedExample>& batch,
                         const BackwardOptions& options = {});

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::vector<std::pair<std::string, double>> per_tensor;
};

// Central differences against backward(). When `max_entries_per_tensor` is
// nonzero, larger tensors are checked on a seeded random subsample.
GradCheckResult grad_check(const BiLstmParams<double>& params,
                           const std::vector<EncodedExample>& batch, double eps = 1e-5,
                           const BackwardOptions& options = {},
                           std::size_t max_entries_per_tensor = 0, std::uint64_t seed = 1);

template <typename T>
Prediction predict(const BiLstmParams<T>& params, const EncodedExample& ex);

struct TrainConfig {
  int d = 64;
  int d_s = 16;
  int h = 64;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 20;
  int patience = 3;
  double clip_norm = 5.0;
  double init_scale = 0.08;
  std::uint64_t seed = 1;
  FeatureFlags flags;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_acc = 0.0;
  double dev_macro_f1 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct VocabSizes {
  int text = 0;
  int hashtags = 0;
  int sources = 0;
  int classes = 0;
};

struct TrainResult {
  BiLstmParams<float> params;  // best-dev parameters
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::vector<std::string> warnings;
};

BiLstmDims make_dims(const VocabSizes& sizes, const TrainConfig& config);

// Adam with global-norm clipping and early stopping on dev macro-F1. An
// empty dev split falls back to the training split (with a warning).
TrainResult train_bilstm(const std::vector<EncodedExample>& train,
                         const std::vector<EncodedExample>& dev, const VocabSizes& sizes,
                         const TrainConfig& config);

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

void save_bilstm(const std::filesystem::path& path, const BiLstmParams<float>& params,
                 const nlohmann::json& extra);
BiLstmParams<float> load_bilstm(const std::filesystem::path& path,
                                nlohmann::json* extra = nullptr);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace emojipred
