#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emojipred/baselines.hpp"
#include "emojipred/bilstm.hpp"
#include "emojipred/corpus.hpp"
#include "emojipred/metrics.hpp"

namespace emojipred {

enum class ModelKind { kForest, kLinear, kBiLstm };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);
// Display name used in report tables ("RandomForest", "LinearSVC", "BiLSTM").
std::string_view display_name(ModelKind kind);

// "complete" trains on the full training split. "semeval" trains on a
// text-only, frequency-skewed subsample of it, imitating a smaller corpus
// with a long tail of rare classes.
enum class DatasetVariant { kComplete, kSemeval };

DatasetVariant parse_dataset_variant(std::string_view name);
std::string_view to_string(DatasetVariant variant);

struct VocabOptions {
  int text_vocab_size = 20000;
  int text_min_freq = 2;
  int hashtag_vocab_size = 20000;
  int hashtag_min_freq = 2;
  int max_len = 32;

  bool operator==(const VocabOptions&) const = default;
};

struct SemevalOptions {
  double decay = 0.7;      // class c keeps decay^c of its examples ...
  double min_keep = 0.15;  // ... but never less than this share
  double scale = 0.5;      // overall share of the training split kept

  bool operator==(const SemevalOptions&) const = default;
};

struct ExperimentConfig {
  std::string label;  // setting column, e.g. "Text + Source"
  ModelKind model = ModelKind::kBiLstm;
  DatasetVariant dataset = DatasetVariant::kComplete;
  FeatureFlags flags;
  VocabOptions vocab;
  SemevalOptions semeval;
  LinearConfig linear;
  ForestConfig forest;
  TrainConfig neural;  // neural.flags is overridden by `flags`
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  std::string hash() const;  // hex FNV-1a of the canonical JSON
};

// Vocabularies and feature layout fitted on a training split.
struct FeatureSpace {
  Vocabulary text;
  Vocabulary hashtags;
  int num_sources = 0;
  int max_len = 32;
  FeatureFlags flags;

  // Bag of words over text, plus hashtag bag and source one-hot when enabled.
  SparseVector sparse(const LabeledExample& ex) const;
  int sparse_dim() const;
  EncodedExample encode(const LabeledExample& ex) const;
};

FeatureSpace build_feature_space(const std::vector<LabeledExample>& train,
                                 const VocabOptions& vocab, const FeatureFlags& flags,
                                 int num_sources);

SparseDataset sparse_dataset(const FeatureSpace& space, const std::vector<LabeledExample>& examples,
                             int num_classes);

struct TrainedModel {
  ModelKind kind = ModelKind::kBiLstm;
  FeatureSpace space;
  LinearModel linear;
  ForestModel forest;
  BiLstmParams<float> bilstm;
  std::vector<EpochRecord> history;  // BiLSTM only
  std::vector<std::string> warnings;

  int num_classes() const;
  Prediction predict(const LabeledExample& ex) const;
};

// Fits the configured model. The "semeval" variant is applied by the caller.
TrainedModel train_model(const ExperimentConfig& config, const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& dev, int num_classes, int num_sources);

MetricsReport evaluate_model(const TrainedModel& model, const std::vector<LabeledExample>& test);

// The vocabularies are not embedded; their fingerprints are, and load_model
// refuses vocabularies that do not match them.
void save_model(const std::filesystem::path& checkpoint_path, const TrainedModel& model,
                nlohmann::json extra);
TrainedModel load_model(const std::filesystem::path& checkpoint_path,
                        const Vocabulary& text_vocab, const Vocabulary& hashtag_vocab,
                        nlohmann::json* extra = nullptr);

struct ReportRow {
  std::string model;
  std::string setting;
  MetricsReport metrics;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  double runtime_seconds = 0.0;  // wall clock; never written to the CSV
};

std::vector<LabeledExample> semeval_subsample(const std::vector<LabeledExample>& train,
                                              int num_classes, const SemevalOptions& options,
                                              std::uint64_t seed);

// Trains on split.train (early stopping on split.dev) and scores split.test.
ReportRow run_experiment(const ExperimentConfig& config, const DatasetSplit& split,
                         int num_classes, int num_sources);

std::vector<ReportRow> run_suite(const std::vector<ExperimentConfig>& configs,
                                 const DatasetSplit& split, int num_classes, int num_sources);

// The seven comparison rows: two baselines and five BiLSTM settings.
std::vector<ExperimentConfig> standard_suite(const ExperimentConfig& base);

inline constexpr const char* kReportHeader =
    "model,setting,accuracy,macro_precision,macro_recall,macro_f1,n_test,seed,config_hash";

std::string report_csv(const std::vector<ReportRow>& rows);
// Aligned text table; the best value in each metric column carries a '*'.
std::string report_table(const std::vector<ReportRow>& rows);
// Indices of the rows holding the best (4-decimal) value of metric column m.
std::vector<std::size_t> best_rows(const std::vector<ReportRow>& rows, int metric);

}  // namespace emojipred
