#include "emojipred/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "emojipred/checkpoint.hpp"

namespace emojipred {

using json = nlohmann::json;

ModelKind parse_model_kind(std::string_view name) {
  if (name == "forest") return ModelKind::kForest;
  if (name == "linear") return ModelKind::kLinear;
  if (name == "bilstm") return ModelKind::kBiLstm;
  throw InputError("unknown model '" + std::string(name) + "' (expected forest|linear|bilstm)");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kForest: return "forest";
    case ModelKind::kLinear: return "linear";
    case ModelKind::kBiLstm: return "bilstm";
  }
  return "";
}

std::string_view display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kForest: return "RandomForest";
    case ModelKind::kLinear: return "LinearSVC";
    case ModelKind::kBiLstm: return "BiLSTM";
  }
  return "";
}

DatasetVariant parse_dataset_variant(std::string_view name) {
  if (name == "complete") return DatasetVariant::kComplete;
  if (name == "semeval") return DatasetVariant::kSemeval;
  throw InputError("unknown dataset variant '" + std::string(name) + "' (expected complete|semeval)");
}

std::string_view to_string(DatasetVariant variant) {
  return variant == DatasetVariant::kComplete ? "complete" : "semeval";
}

json ExperimentConfig::to_json() const {
  // threads is left out on purpose: it never changes results.
  json j = {{"label", label},
            {"model", to_string(model)},
            {"dataset", to_string(dataset)},
            {"use_hashtags", flags.use_hashtags},
            {"use_source", flags.use_source},
            {"seed", seed},
            {"vocab",
             {{"text_vocab_size", vocab.text_vocab_size},
              {"text_min_freq", vocab.text_min_freq},
              {"hashtag_vocab_size", vocab.hashtag_vocab_size},
              {"hashtag_min_freq", vocab.hashtag_min_freq},
              {"max_len", vocab.max_len}}}};
  if (dataset == DatasetVariant::kSemeval) {
    j["semeval"] = {{"decay", semeval.decay}, {"min_keep", semeval.min_keep}, {"scale", semeval.scale}};
  }
  switch (model) {
    case ModelKind::kLinear:
      j["linear"] = {{"learning_rate", linear.learning_rate},
                     {"epochs", linear.epochs},
                     {"margin", linear.margin},
                     {"l2", linear.l2}};
      break;
    case ModelKind::kForest:
      j["forest"] = {{"trees", forest.trees},
                     {"max_depth", forest.max_depth},
                     {"min_leaf", forest.min_leaf},
                     {"max_features", forest.max_features},
                     {"bootstrap", forest.bootstrap}};
      break;
    case ModelKind::kBiLstm: {
      json n = emojipred::to_json(neural);
      n.erase("seed");
      n.erase("use_hashtags");
      n.erase("use_source");
      j["neural"] = n;
      break;
    }
  }
  return j;
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

// ---------------------------------------------------------------------------

SparseVector FeatureSpace::sparse(const LabeledExample& ex) const {
  std::vector<SparseVector> blocks;
  blocks.push_back(bow_vector(ex.text_tokens, text, Weighting::kCount));
  if (flags.use_hashtags) blocks.push_back(bow_vector(ex.hashtag_tokens, hashtags, Weighting::kCount));
  if (flags.use_source) blocks.push_back(one_hot(ex.source_id, num_sources));
  return blocks.size() == 1 ? std::move(blocks.front()) : concat(blocks);
}

int FeatureSpace::sparse_dim() const {
  return text.size() + (flags.use_hashtags ? hashtags.size() : 0) +
         (flags.use_source ? num_sources : 0);
}

EncodedExample FeatureSpace::encode(const LabeledExample& ex) const {
  return encode_example(ex, text, hashtags, max_len);
}

FeatureSpace build_feature_space(const std::vector<LabeledExample>& train,
                                 const VocabOptions& vocab, const FeatureFlags& flags,
                                 int num_sources) {
  if (num_sources < 1) throw InputError("source table is empty");
  std::vector<std::vector<std::string>> text_docs, hash_docs;
  text_docs.reserve(train.size());
  hash_docs.reserve(train.size());
  for (const auto& ex : train) {
    text_docs.push_back(ex.text_tokens);
    hash_docs.push_back(ex.hashtag_tokens);
  }
  FeatureSpace space;
  space.text = build_vocab(text_docs, vocab.text_min_freq, vocab.text_vocab_size);
  space.hashtags = build_vocab(hash_docs, vocab.hashtag_min_freq, vocab.hashtag_vocab_size);
  space.num_sources = num_sources;
  space.max_len = vocab.max_len;
  space.flags = flags;
  return space;
}

SparseDataset sparse_dataset(const FeatureSpace& space, const std::vector<LabeledExample>& examples,
                             int num_classes) {
  SparseDataset data;
  data.dim = space.sparse_dim();
  data.num_classes = num_classes;
  data.x.reserve(examples.size());
  data.y.reserve(examples.size());
  for (const auto& ex : examples) {
    data.x.push_back(space.sparse(ex));
    data.y.push_back(ex.label);
  }
  return data;
}

int TrainedModel::num_classes() const {
  switch (kind) {
    case ModelKind::kLinear: return linear.num_classes();
    case ModelKind::kForest: return forest.num_classes();
    case ModelKind::kBiLstm: return bilstm.dims.num_classes;
  }
  return 0;
}

Prediction TrainedModel::predict(const LabeledExample& ex) const {
  switch (kind) {
    case ModelKind::kLinear: return linear.predict(space.sparse(ex));
    case ModelKind::kForest: return forest.predict(space.sparse(ex));
    case ModelKind::kBiLstm: return emojipred::predict(bilstm, space.encode(ex));
  }
  return {};
}

TrainedModel train_model(const ExperimentConfig& config, const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& dev, int num_classes, int num_sources) {
  if (train.empty()) throw InputError("training split is empty");
  TrainedModel m;
  m.kind = config.model;
  m.space = build_feature_space(train, config.vocab, config.flags, num_sources);
  switch (config.model) {
    case ModelKind::kLinear: {
      LinearConfig cfg = config.linear;
      cfg.seed = derive_seed(config.seed, 1);
      m.linear = train_linear(sparse_dataset(m.space, train, num_classes), cfg);
      break;
    }
    case ModelKind::kForest: {
      ForestConfig cfg = config.forest;
      cfg.seed = derive_seed(config.seed, 2);
      m.forest = train_forest(sparse_dataset(m.space, train, num_classes), cfg);
      break;
    }
    case ModelKind::kBiLstm: {
      TrainConfig cfg = config.neural;
      cfg.flags = config.flags;
      cfg.seed = derive_seed(config.seed, 3);
      std::vector<EncodedExample> tr, dv;
      for (const auto& ex : train) tr.push_back(m.space.encode(ex));
      for (const auto& ex : dev) dv.push_back(m.space.encode(ex));
      VocabSizes sizes{m.space.text.size(), m.space.hashtags.size(), num_sources, num_classes};
      auto result = train_bilstm(tr, dv, sizes, cfg);
      m.bilstm = std::move(result.params);
      m.history = std::move(result.history);
      m.warnings = std::move(result.warnings);
      break;
    }
  }
  return m;
}

MetricsReport evaluate_model(const TrainedModel& model, const std::vector<LabeledExample>& test) {
  std::vector<ClassId> preds, golds;
  preds.reserve(test.size());
  golds.reserve(test.size());
  for (const auto& ex : test) {
    preds.push_back(model.predict(ex).label);
    golds.push_back(ex.label);
  }
  return evaluate_predictions(preds, golds, model.num_classes());
}

void save_model(const std::filesystem::path& path, const TrainedModel& model, json extra) {
  extra["text_vocab_hash"] = hex64(model.space.text.fingerprint());
  extra["hashtag_vocab_hash"] = hex64(model.space.hashtags.fingerprint());
  extra["num_sources"] = model.space.num_sources;
  extra["max_len"] = model.space.max_len;
  extra["use_hashtags"] = model.space.flags.use_hashtags;
  extra["use_source"] = model.space.flags.use_source;
  switch (model.kind) {
    case ModelKind::kLinear: save_linear(path, model.linear, extra); break;
    case ModelKind::kForest: save_forest(path, model.forest, extra); break;
    case ModelKind::kBiLstm: save_bilstm(path, model.bilstm, extra); break;
  }
}

TrainedModel load_model(const std::filesystem::path& path, const Vocabulary& text_vocab,
                        const Vocabulary& hashtag_vocab, json* extra_out) {
  if (!std::filesystem::exists(path)) throw MissingResourceError("checkpoint not found: " + path.string());
  const std::string kind = checkpoint::Reader::open(path).header().value("model", "");
  TrainedModel m;
  json extra;
  if (kind == "linear") {
    m.kind = ModelKind::kLinear;
    m.linear = load_linear(path, &extra);
  } else if (kind == "forest") {
    m.kind = ModelKind::kForest;
    m.forest = load_forest(path, &extra);
  } else if (kind == "bilstm") {
    m.kind = ModelKind::kBiLstm;
    m.bilstm = load_bilstm(path, &extra);
  } else {
    throw ConsistencyError("checkpoint holds an unknown model kind '" + kind + "'");
  }
  if (extra.value("text_vocab_hash", "") != hex64(text_vocab.fingerprint()) ||
      extra.value("hashtag_vocab_hash", "") != hex64(hashtag_vocab.fingerprint())) {
    throw ConsistencyError("vocabulary hash mismatch: checkpoint " + path.string() +
                           " was trained with different vocabularies");
  }
  m.space.text = text_vocab;
  m.space.hashtags = hashtag_vocab;
  m.space.num_sources = extra.at("num_sources").get<int>();
  m.space.max_len = extra.at("max_len").get<int>();
  m.space.flags.use_hashtags = extra.at("use_hashtags").get<bool>();
  m.space.flags.use_source = extra.at("use_source").get<bool>();
  const int expected_dim = m.space.sparse_dim();
  if ((m.kind == ModelKind::kLinear && m.linear.dim() != expected_dim) ||
      (m.kind == ModelKind::kForest && m.forest.dim() != expected_dim)) {
    throw ConsistencyError("checkpoint feature dimension does not match its vocabularies");
  }
  if (extra_out) *extra_out = std::move(extra);
  return m;
}

// ---------------------------------------------------------------------------

std::vector<LabeledExample> semeval_subsample(const std::vector<LabeledExample>& train,
                                              int num_classes, const SemevalOptions& options,
                                              std::uint64_t seed) {
  if (!(options.decay > 0.0 && options.decay <= 1.0)) throw InputError("semeval.decay must be in (0, 1]");
  if (!(options.min_keep > 0.0 && options.min_keep <= 1.0)) throw InputError("semeval.min_keep must be in (0, 1]");
  if (!(options.scale > 0.0 && options.scale <= 1.0)) throw InputError("semeval.scale must be in (0, 1]");
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < train.size(); ++i) by_class.at(train[i].label).push_back(i);
  std::vector<bool> keep(train.size(), false);
  for (int c = 0; c < num_classes; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    const double share = options.scale * std::max(options.min_keep, std::pow(options.decay, c));
    const std::size_t k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(share * static_cast<double>(idx.size()))), 1,
        idx.size());
    Rng rng(derive_seed(seed, 0x5e000 + static_cast<std::uint64_t>(c)));
    rng.shuffle(idx);
    for (std::size_t i = 0; i < k; ++i) keep[idx[i]] = true;
  }
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (keep[i]) out.push_back(train[i]);
  }
  return out;
}

ReportRow run_experiment(const ExperimentConfig& config, const DatasetSplit& split,
                         int num_classes, int num_sources) {
  const auto start = std::chrono::steady_clock::now();
  const auto* train = &split.train;
  std::vector<LabeledExample> reduced;
  if (config.dataset == DatasetVariant::kSemeval) {
    reduced = semeval_subsample(split.train, num_classes, config.semeval, derive_seed(config.seed, 4));
    train = &reduced;
  }
  const auto model = train_model(config, *train, split.dev, num_classes, num_sources);
  ReportRow row;
  row.model = std::string(display_name(config.model));
  row.setting = config.label;
  row.metrics = evaluate_model(model, split.test);
  row.n_test = split.test.size();
  row.seed = config.seed;
  row.config_hash = config.hash();
  row.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ReportRow> run_suite(const std::vector<ExperimentConfig>& configs,
                                 const DatasetSplit& split, int num_classes, int num_sources) {
  if (configs.empty()) throw InputError("suite needs at least one experiment");
  std::vector<ReportRow> rows;
  rows.reserve(configs.size());
  for (const auto& c : configs) rows.push_back(run_experiment(c, split, num_classes, num_sources));
  return rows;
}

std::vector<ExperimentConfig> standard_suite(const ExperimentConfig& base) {
  struct Row {
    ModelKind model;
    DatasetVariant dataset;
    const char* label;
    bool hash, src;
  };
  const Row rows[] = {
      {ModelKind::kForest, DatasetVariant::kSemeval, "Semeval", false, false},
      {ModelKind::kLinear, DatasetVariant::kSemeval, "Semeval", false, false},
      {ModelKind::kBiLstm, DatasetVariant::kSemeval, "Semeval", false, false},
      {ModelKind::kBiLstm, DatasetVariant::kComplete, "Complete Dataset", false, false},
      {ModelKind::kBiLstm, DatasetVariant::kComplete, "Text + Hashtags", true, false},
      {ModelKind::kBiLstm, DatasetVariant::kComplete, "Text + Source", false, true},
      {ModelKind::kBiLstm, DatasetVariant::kComplete, "Text + Hashtags + Source", true, true},
  };
  std::vector<ExperimentConfig> out;
  for (const auto& r : rows) {
    ExperimentConfig c = base;
    c.model = r.model;
    c.dataset = r.dataset;
    c.label = r.label;
    c.flags = {r.hash, r.src};
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double metric_value(const ReportRow& row, int m) {
  switch (m) {
    case 0: return row.metrics.accuracy;
    case 1: return row.metrics.macro_precision;
    case 2: return row.metrics.macro_recall;
    default: return row.metrics.macro_f1;
  }
}

}  // namespace

std::vector<std::size_t> best_rows(const std::vector<ReportRow>& rows, int metric) {
  std::vector<std::size_t> best;
  std::string top;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Compare what is printed so visually tied cells are flagged together.
    const std::string v = format_fixed(metric_value(rows[i], metric), 4);
    if (best.empty() || v > top) {
      best = {i};
      top = v;
    } else if (v == top) {
      best.push_back(i);
    }
  }
  return best;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += r.model + "," + r.setting;
    for (int m = 0; m < 4; ++m) out += "," + format_fixed(metric_value(r, m), 4);
    out += "," + std::to_string(r.n_test) + "," + std::to_string(r.seed) + "," + r.config_hash + "\n";
  }
  return out;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  const std::vector<std::string> header = {"Model", "Setting", "Accuracy", "Macro P", "Macro R",
                                           "Macro F1"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.model, r.setting};
    for (int m = 0; m < 4; ++m) line.push_back(format_fixed(metric_value(r, m), 4));
    cells.push_back(std::move(line));
  }
  for (int m = 0; m < 4; ++m) {
    for (std::size_t i : best_rows(rows, m)) cells[i][2 + m] += "*";
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s;
    for (std::size_t c = 0; c < line.size(); ++c) {
      s += line[c];
      if (c + 1 < line.size()) s += std::string(width[c] - line[c].size() + 2, ' ');
    }
    os << s << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  os << std::string(total - 2, '-') << '\n';
  for (const auto& line : cells) emit(line);
  os << "(* best value in column)\n";
  return os.str();
}

}  // namespace emojipred
