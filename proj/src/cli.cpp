#include "emojipred/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "emojipred/common.hpp"
#include "emojipred/corpus.hpp"
#include "emojipred/experiment.hpp"
#include "emojipred/features.hpp"
#include "emojipred/pipeline.hpp"

namespace emojipred::cli {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

const ojson& default_config() {
  static const ojson config = [] {
    ojson c;
    c["seed"] = 1;
    c["threads"] = 1;
    c["paths"] = {{"corpus", ""},      {"out_dir", "out"},        {"dataset_dir", ""},
                  {"labels", ""},      {"lexicon", ""},           {"source_aliases", ""},
                  {"checkpoint", ""},  {"synthetic_template", ""}};
    c["pipeline"] = {{"label_policy", "first"},
                     {"num_labels", 20},
                     {"max_len", 32},
                     {"text_vocab_size", 20000},
                     {"text_min_freq", 2},
                     {"hashtag_vocab_size", 20000},
                     {"hashtag_min_freq", 2},
                     {"source_top_k", 10},
                     {"keep_hashtags_in_text", false},
                     {"balance", false},
                     {"train_ratio", 0.8},
                     {"dev_ratio", 0.1},
                     {"test_ratio", 0.1}};
    c["train"] = {{"model", "bilstm"},
                  {"dataset", "complete"},
                  {"use_hashtags", true},
                  {"use_source", true}};
    c["linear"] = {{"learning_rate", 0.1}, {"epochs", 20}, {"margin", 1.0}, {"l2", 1e-4}};
    c["forest"] = {{"trees", 100},
                   {"max_depth", 20},
                   {"min_leaf", 2},
                   {"max_features", 0},
                   {"bootstrap", true}};
    c["neural"] = {{"d", 64},
                   {"d_s", 16},
                   {"h", 64},
                   {"learning_rate", 1e-3},
                   {"batch_size", 32},
                   {"max_epochs", 20},
                   {"patience", 3},
                   {"clip_norm", 5.0},
                   {"init_scale", 0.08}};
    c["semeval"] = {{"decay", 0.7}, {"min_keep", 0.15}, {"scale", 0.5}};
    c["stats"] = {{"top_k", 5},
                  {"method", "ovr-forest-importance"},
                  {"trees", 25},
                  {"max_depth", 12},
                  {"top_emojis", 5}};
    c["synthetic"] = {{"preset", "planted"}, {"n", 1000}};
    return c;
  }();
  return config;
}

namespace {

void collect_keys(const ojson& node, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [k, v] : node.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      collect_keys(v, key, out);
    } else {
      out.push_back(key);
    }
  }
}

bool is_int(const ojson& v) { return v.is_number_integer(); }

bool compatible(const ojson& def, const ojson& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_number_float()) return v.is_number();
  if (is_int(def)) return is_int(v);
  return false;
}

const char* type_name(const ojson& def) {
  if (def.is_boolean()) return "boolean";
  if (def.is_string()) return "string";
  if (def.is_number_float()) return "number";
  return "integer";
}

void merge_into(ojson& target, const ojson& defaults, const ojson& overrides,
                const std::string& prefix) {
  if (!overrides.is_object()) {
    throw InputError("config section '" + prefix + "' must be an object");
  }
  for (const auto& [k, v] : overrides.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (!defaults.contains(k)) throw InputError("unknown config key '" + key + "'");
    const ojson& def = defaults.at(k);
    if (def.is_object()) {
      merge_into(target[k], def, v, key);
    } else if (!compatible(def, v)) {
      throw InputError("config key '" + key + "' must be a " + type_name(def));
    } else {
      target[k] = v;
    }
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  collect_keys(default_config(), "", keys);
  return keys;
}

ojson merge_config(const ojson& overrides) {
  ojson config = default_config();
  merge_into(config, default_config(), overrides, "");
  return config;
}

ojson load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingResourceError("cannot read config file: " + path.string());
  const ojson doc = ojson::parse(in, nullptr, false);
  if (doc.is_discarded()) throw InputError("config file is not valid JSON: " + path.string());
  return merge_config(doc);
}

void set_config_value(ojson& config, std::string_view dotted_key, const std::string& value) {
  const ojson* def = &default_config();
  ojson* node = &config;
  std::string key(dotted_key);
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!def->is_object() || !def->contains(part)) {
      throw InputError("unknown config key '" + key + "'");
    }
    def = &def->at(part);
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (def->is_object()) throw InputError("config key '" + key + "' is a section");
  const auto bad = [&] {
    return InputError("config key '" + key + "' expects a " + type_name(*def) + ", got '" + value + "'");
  };
  if (def->is_boolean()) {
    if (value == "true" || value == "1" || value == "yes") {
      *node = true;
    } else if (value == "false" || value == "0" || value == "no") {
      *node = false;
    } else {
      throw bad();
    }
  } else if (def->is_string()) {
    *node = value;
  } else {
    std::size_t used = 0;
    try {
      if (def->is_number_float()) {
        *node = std::stod(value, &used);
      } else {
        *node = std::stoll(value, &used);
      }
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != value.size()) throw bad();
  }
}

namespace {

// ---------------------------------------------------------------------------
// Config accessors

struct Context {
  ojson config;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const { err << "[emojipred] " << msg << '\n'; }

  const ojson& at(std::string_view dotted) const {
    const ojson* node = &config;
    std::string key(dotted);
    std::size_t pos = 0;
    while (true) {
      const std::size_t dot = key.find('.', pos);
      node = &node->at(key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
      if (dot == std::string::npos) return *node;
      pos = dot + 1;
    }
  }
  int integer(std::string_view k) const { return at(k).get<int>(); }
  double number(std::string_view k) const { return at(k).get<double>(); }
  bool flag(std::string_view k) const { return at(k).get<bool>(); }
  std::string str(std::string_view k) const { return at(k).get<std::string>(); }
  std::uint64_t seed() const { return at("seed").get<std::uint64_t>(); }
  int threads() const { return std::max(1, integer("threads")); }

  fs::path out_dir() const {
    const fs::path p = str("paths.out_dir");
    fs::create_directories(p);
    return p;
  }
  fs::path dataset_dir() const {
    const std::string d = str("paths.dataset_dir");
    return d.empty() ? fs::path(str("paths.out_dir")) : fs::path(d);
  }
  fs::path checkpoint() const {
    const std::string c = str("paths.checkpoint");
    return c.empty() ? fs::path(str("paths.out_dir")) / "checkpoint.ckpt" : fs::path(c);
  }
};

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw MissingResourceError(what + " not found: " + p.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingResourceError("cannot write " + path.string());
  out << text;
}

PipelineOptions pipeline_options(const Context& ctx) {
  PipelineOptions p;
  p.label_policy = parse_label_policy(ctx.str("pipeline.label_policy"));
  p.num_labels = ctx.integer("pipeline.num_labels");
  p.max_len = ctx.integer("pipeline.max_len");
  p.text_vocab_size = ctx.integer("pipeline.text_vocab_size");
  p.text_min_freq = ctx.integer("pipeline.text_min_freq");
  p.hashtag_vocab_size = ctx.integer("pipeline.hashtag_vocab_size");
  p.hashtag_min_freq = ctx.integer("pipeline.hashtag_min_freq");
  p.source_top_k = ctx.integer("pipeline.source_top_k");
  p.keep_hashtags_in_text = ctx.flag("pipeline.keep_hashtags_in_text");
  p.balance = ctx.flag("pipeline.balance");
  p.split_ratios = {ctx.number("pipeline.train_ratio"), ctx.number("pipeline.dev_ratio"),
                    ctx.number("pipeline.test_ratio")};
  p.validate();
  return p;
}

SourceTable::AliasMap source_aliases(const Context& ctx) {
  const std::string path = ctx.str("paths.source_aliases");
  if (path.empty()) return SourceTable::default_aliases();
  return SourceTable::load_aliases(path);
}

ExperimentConfig experiment_config(const Context& ctx) {
  const PipelineOptions p = pipeline_options(ctx);
  ExperimentConfig e;
  e.model = parse_model_kind(ctx.str("train.model"));
  e.dataset = parse_dataset_variant(ctx.str("train.dataset"));
  e.flags = {ctx.flag("train.use_hashtags"), ctx.flag("train.use_source")};
  e.label = "custom";
  e.vocab = {p.text_vocab_size, p.text_min_freq, p.hashtag_vocab_size, p.hashtag_min_freq, p.max_len};
  e.semeval = {ctx.number("semeval.decay"), ctx.number("semeval.min_keep"),
               ctx.number("semeval.scale")};
  e.linear.learning_rate = ctx.number("linear.learning_rate");
  e.linear.epochs = ctx.integer("linear.epochs");
  e.linear.margin = ctx.number("linear.margin");
  e.linear.l2 = ctx.number("linear.l2");
  e.forest.trees = ctx.integer("forest.trees");
  e.forest.max_depth = ctx.integer("forest.max_depth");
  e.forest.min_leaf = ctx.integer("forest.min_leaf");
  e.forest.max_features = ctx.integer("forest.max_features");
  e.forest.bootstrap = ctx.flag("forest.bootstrap");
  e.forest.threads = ctx.threads();
  e.neural.d = ctx.integer("neural.d");
  e.neural.d_s = ctx.integer("neural.d_s");
  e.neural.h = ctx.integer("neural.h");
  e.neural.learning_rate = ctx.number("neural.learning_rate");
  e.neural.batch_size = ctx.integer("neural.batch_size");
  e.neural.max_epochs = ctx.integer("neural.max_epochs");
  e.neural.patience = ctx.integer("neural.patience");
  e.neural.clip_norm = ctx.number("neural.clip_norm");
  e.neural.init_scale = ctx.number("neural.init_scale");
  e.neural.validate();
  e.seed = ctx.seed();
  return e;
}

struct SplitSettings {
  std::uint64_t seed = 1;
  SplitRatios ratios{0.8, 0.1, 0.1};
  bool balance = false;

  ojson to_json() const {
    return {{"seed", seed}, {"ratios", ratios}, {"balance", balance}};
  }
  static SplitSettings from_json(const nlohmann::json& j) {
    SplitSettings s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratios = j.at("ratios").get<SplitRatios>();
    s.balance = j.at("balance").get<bool>();
    return s;
  }
};

SplitSettings split_settings(const Context& ctx) {
  const auto p = pipeline_options(ctx);
  return {ctx.seed(), p.split_ratios, p.balance};
}

DatasetSplit make_split(const Dataset& ds, const SplitSettings& s, const Context& ctx) {
  const auto* examples = &ds.examples;
  std::vector<LabeledExample> balanced;
  if (s.balance && !ds.examples.empty()) {
    balanced = balance(ds.examples, BalanceStrategy::median(), derive_seed(s.seed, 21));
    examples = &balanced;
    ctx.log("balanced " + std::to_string(ds.examples.size()) + " -> " +
            std::to_string(balanced.size()) + " examples");
  }
  auto sp = split(*examples, s.ratios, s.seed);
  for (const auto& w : sp.warnings) ctx.log("warning: " + w);
  ctx.log("split train/dev/test = " + std::to_string(sp.train.size()) + "/" +
          std::to_string(sp.dev.size()) + "/" + std::to_string(sp.test.size()));
  return sp;
}

Dataset load_dataset_checked(const Context& ctx) {
  const fs::path dir = ctx.dataset_dir();
  require_file(dir / kDatasetFile, "dataset");
  return load_dataset(dir);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const Context& ctx) {
  const std::string corpus = ctx.str("paths.corpus");
  if (corpus.empty()) throw InputError("paths.corpus is required for ingest (use --corpus)");
  require_file(corpus, "corpus");
  IngestOptions opts;
  opts.pipeline = pipeline_options(ctx);
  opts.source_aliases = source_aliases(ctx);
  if (const auto p = ctx.str("paths.labels"); !p.empty()) opts.labels = LabelSet::load(p);
  if (const auto p = ctx.str("paths.lexicon"); !p.empty()) opts.lexicon = SegmentLexicon::load(p);
  const fs::path out = ctx.out_dir();

  const LoadResult loaded = load_corpus(corpus);
  IngestSummary summary;
  const Dataset ds = ingest(loaded, opts, &summary);
  save_dataset(out, ds);
  ojson j = ojson::parse(summary.to_json().dump());
  j["pipeline"] = {{"label_policy", to_string(opts.pipeline.label_policy)},
                   {"num_labels", ds.labels.size()},
                   {"keep_hashtags_in_text", opts.pipeline.keep_hashtags_in_text}};
  write_text(out / kIngestSummaryFile, j.dump(2) + "\n");
  for (const auto& w : summary.warnings) ctx.log("warning: " + w);
  ctx.log("ingest: read " + std::to_string(summary.lines_read) + ", kept " +
          std::to_string(summary.kept) + " -> " + (out / kDatasetFile).string());
  return 0;
}

int cmd_stats(const Context& ctx) {
  const Dataset ds = load_dataset_checked(ctx);
  const fs::path out = ctx.out_dir();
  const int C = ds.labels.size();

  const auto dist = class_distribution(ds.examples, C);
  std::ostringstream labels_csv;
  labels_csv << "class,emoji,count,percent,minority\n";
  for (int c = 0; c < C; ++c) {
    labels_csv << c << ',' << ds.labels.emoji(c) << ',' << dist.counts[c] << ','
               << format_fixed(dist.percent[c], 2) << ',' << (dist.minority[c] ? "true" : "false")
               << '\n';
  }
  write_text(out / "label_distribution.csv", labels_csv.str());

  const int top_emojis = ctx.integer("stats.top_emojis");
  const auto tab = source_emoji_crosstab(ds.examples, ds.sources, C, std::max(1, top_emojis));
  std::ostringstream src_csv, cross_csv, top_csv;
  src_csv << "source,count,percent\n";
  cross_csv << "source,label,count\n";
  top_csv << "source,rank,emoji,count\n";
  const double total = static_cast<double>(ds.examples.size());
  for (SourceId s : tab.source_ranking) {
    const auto& name = ds.sources.name(s);
    src_csv << name << ',' << tab.source_totals[s] << ','
            << format_fixed(total > 0 ? 100.0 * static_cast<double>(tab.source_totals[s]) / total : 0.0, 2)
            << '\n';
    for (int c = 0; c < C; ++c) cross_csv << name << ',' << ds.labels.emoji(c) << ',' << tab.counts[s][c] << '\n';
    int rank = 0;
    for (ClassId c : tab.top_labels[s]) {
      if (tab.counts[s][c] == 0) break;
      top_csv << name << ',' << ++rank << ',' << ds.labels.emoji(c) << ',' << tab.counts[s][c] << '\n';
    }
  }
  write_text(out / "source_distribution.csv", src_csv.str());
  write_text(out / "source_emoji_crosstab.csv", cross_csv.str());
  write_text(out / "source_top_emoji.csv", top_csv.str());

  TopFeatureOptions opts;
  opts.method = parse_feature_method(ctx.str("stats.method"));
  opts.k = ctx.integer("stats.top_k");
  opts.trees = ctx.integer("stats.trees");
  opts.max_depth = ctx.integer("stats.max_depth");
  opts.seed = ctx.seed();
  opts.threads = ctx.threads();
  const auto p = pipeline_options(ctx);
  std::vector<ClassId> labels;
  std::vector<std::vector<std::string>> text_docs, hash_docs;
  for (const auto& ex : ds.examples) {
    labels.push_back(ex.label);
    text_docs.push_back(ex.text_tokens);
    hash_docs.push_back(ex.hashtag_tokens);
  }
  const struct {
    const char* file;
    const std::vector<std::vector<std::string>>* docs;
    int min_freq, max_size;
  } fields[] = {{"top_features_text.csv", &text_docs, p.text_min_freq, p.text_vocab_size},
                {"top_features_hashtags.csv", &hash_docs, p.hashtag_min_freq, p.hashtag_vocab_size}};
  for (const auto& f : fields) {
    const Vocabulary vocab = build_vocab(*f.docs, f.min_freq, f.max_size);
    const auto ranking = top_features_per_class(*f.docs, labels, vocab, C, opts);
    std::ostringstream csv;
    csv << "class,rank,token,score\n";
    for (int c = 0; c < C; ++c) {
      int rank = 0;
      for (const auto& t : ranking.per_class[c]) {
        csv << ds.labels.emoji(c) << ',' << ++rank << ',' << t.token << ',' << format_fixed(t.score, 6) << '\n';
      }
    }
    write_text(out / f.file, csv.str());
    for (const auto& w : ranking.warnings) ctx.log(std::string("warning (") + f.file + "): " + w);
  }
  ctx.log("stats: " + std::to_string(ds.examples.size()) + " examples, " + std::to_string(C) +
          " classes -> " + out.string());
  return 0;
}

int cmd_train(const Context& ctx) {
  const Dataset ds = load_dataset_checked(ctx);
  const ExperimentConfig exp = experiment_config(ctx);
  const SplitSettings ss = split_settings(ctx);
  const fs::path out = ctx.out_dir();
  const auto sp = make_split(ds, ss, ctx);
  std::vector<LabeledExample> train = sp.train;
  if (exp.dataset == DatasetVariant::kSemeval) {
    train = semeval_subsample(sp.train, ds.labels.size(), exp.semeval, derive_seed(exp.seed, 4));
  }
  ctx.log("training " + std::string(to_string(exp.model)) + " on " + std::to_string(train.size()) +
          " examples");
  const auto model = train_model(exp, train, sp.dev, ds.labels.size(), ds.sources.size());
  for (const auto& w : model.warnings) ctx.log("warning: " + w);

  nlohmann::json extra = {{"labels_hash", hex64(ds.labels.fingerprint())},
                          {"sources_hash", hex64(ds.sources.fingerprint())},
                          {"split", nlohmann::json::parse(ss.to_json().dump())},
                          {"config", exp.to_json()},
                          {"config_hash", exp.hash()}};
  save_model(out / "checkpoint.ckpt", model, extra);
  model.space.text.save(out / "text_vocab.tsv");
  model.space.hashtags.save(out / "hashtag_vocab.tsv");
  write_history(out / "history.csv", model.history);

  const auto dev = evaluate_model(model, sp.dev);
  ojson summary = {{"model", to_string(exp.model)},
                   {"config_hash", exp.hash()},
                   {"n_train", train.size()},
                   {"n_dev", sp.dev.size()},
                   {"dev_accuracy", dev.accuracy},
                   {"dev_macro_f1", dev.macro_f1}};
  write_text(out / "train_summary.json", summary.dump(2) + "\n");
  ctx.log("train: dev accuracy " + format_fixed(dev.accuracy, 4) + ", macro-F1 " +
          format_fixed(dev.macro_f1, 4) + " -> " + (out / "checkpoint.ckpt").string());
  return 0;
}

struct LoadedModel {
  TrainedModel model;
  nlohmann::json extra;
};

LoadedModel load_checkpoint(const Context& ctx) {
  const fs::path ckpt = ctx.checkpoint();
  require_file(ckpt, "checkpoint");
  const fs::path dir = ckpt.parent_path().empty() ? fs::path(".") : ckpt.parent_path();
  require_file(dir / "text_vocab.tsv", "text vocabulary");
  require_file(dir / "hashtag_vocab.tsv", "hashtag vocabulary");
  LoadedModel lm;
  lm.model = load_model(ckpt, Vocabulary::load(dir / "text_vocab.tsv"),
                        Vocabulary::load(dir / "hashtag_vocab.tsv"), &lm.extra);
  return lm;
}

void check_compatible(const LoadedModel& lm, const LabelSet& labels, const SourceTable& sources) {
  if (lm.extra.value("labels_hash", "") != hex64(labels.fingerprint())) {
    throw ConsistencyError("label set differs from the one the checkpoint was trained on");
  }
  if (lm.extra.value("sources_hash", "") != hex64(sources.fingerprint())) {
    throw ConsistencyError("source table differs from the one the checkpoint was trained on");
  }
  if (lm.model.num_classes() != labels.size()) {
    throw ConsistencyError("checkpoint class count does not match the label set");
  }
}

int cmd_evaluate(const Context& ctx) {
  const Dataset ds = load_dataset_checked(ctx);
  const LoadedModel lm = load_checkpoint(ctx);
  check_compatible(lm, ds.labels, ds.sources);
  const SplitSettings ss = SplitSettings::from_json(lm.extra.at("split"));
  const auto sp = make_split(ds, ss, ctx);
  const auto report = evaluate_model(lm.model, sp.test);
  ojson j = ojson::parse(report.to_json().dump());
  j["model"] = to_string(lm.model.kind);
  j["config_hash"] = lm.extra.value("config_hash", "");
  j["labels"] = ds.labels.emojis();
  const fs::path out = ctx.out_dir();
  write_text(out / "metrics.json", j.dump(2) + "\n");
  ctx.log("evaluate: n=" + std::to_string(report.n_examples) + " accuracy " +
          format_fixed(report.accuracy, 4) + " macro-F1 " + format_fixed(report.macro_f1, 4));
  return 0;
}

int cmd_suite(const Context& ctx) {
  const Dataset ds = load_dataset_checked(ctx);
  const ExperimentConfig base = experiment_config(ctx);
  const auto sp = make_split(ds, split_settings(ctx), ctx);
  const auto configs = standard_suite(base);
  std::vector<ReportRow> rows;
  for (const auto& c : configs) {
    rows.push_back(run_experiment(c, sp, ds.labels.size(), ds.sources.size()));
    ctx.log("suite: " + rows.back().model + " / " + rows.back().setting + " macro-F1 " +
            format_fixed(rows.back().metrics.macro_f1, 4) + " (" +
            format_fixed(rows.back().runtime_seconds, 1) + "s)");
  }
  const fs::path out = ctx.out_dir();
  write_text(out / "report.csv", report_csv(rows));
  const std::string table = report_table(rows);
  write_text(out / "report.txt", table);
  ctx.out << table;
  return 0;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

int cmd_predict(const Context& ctx, const std::string& text, const std::string& input,
                const std::optional<std::string>& source, const std::optional<std::string>& hashtags,
                int top_k) {
  std::vector<std::string> texts;
  if (!input.empty()) {
    require_file(input, "input file");
    std::ifstream in(input);
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) texts.push_back(line);
    }
  } else {
    texts.push_back(text);
  }
  for (const auto& t : texts) {
    if (trim(t).empty()) throw InputError("nothing to predict: the input text is empty");
  }

  const fs::path dir = ctx.dataset_dir();
  require_file(dir / kLabelsFile, "label set");
  require_file(dir / kSourcesFile, "source table");
  const LabelSet labels = LabelSet::load(dir / kLabelsFile);
  const SourceTable sources = SourceTable::load(dir / kSourcesFile, source_aliases(ctx));
  SegmentLexicon lexicon;
  if (fs::exists(dir / kLexiconFile)) lexicon = SegmentLexicon::load(dir / kLexiconFile);
  const LoadedModel lm = load_checkpoint(ctx);
  check_compatible(lm, labels, sources);

  PipelineOptions popts = pipeline_options(ctx);
  if (fs::exists(dir / kIngestSummaryFile)) {
    std::ifstream in(dir / kIngestSummaryFile);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("pipeline")) {
      popts.keep_hashtags_in_text = j["pipeline"].value("keep_hashtags_in_text", false);
    }
  }
  PreprocessResources res;
  res.lexicon = &lexicon;
  res.sources = &sources;

  for (const auto& t : texts) {
    auto p = preprocess_tweet(t, source ? std::optional<std::string_view>(*source) : std::nullopt,
                              res, popts);
    LabeledExample ex;
    ex.text_tokens = std::move(p.text_tokens);
    ex.hashtag_tokens = std::move(p.hashtag_tokens);
    ex.source_id = p.source_id;
    ex.source = p.source;
    if (hashtags) {
      ex.hashtag_tokens.clear();
      std::stringstream ss(*hashtags);
      std::string tag;
      while (std::getline(ss, tag, ',')) {
        tag = trim(tag);
        if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
        if (tag.empty()) continue;
        for (auto& w : hashtag_words(tag, lexicon)) ex.hashtag_tokens.push_back(std::move(w));
      }
    }
    const Prediction pred = lm.model.predict(ex);
    std::vector<double> probs = pred.scores;
    if (lm.model.kind == ModelKind::kLinear) {
      probs = softmax(probs);
    } else if (lm.model.kind == ModelKind::kForest) {
      double sum = 0.0;
      for (double v : probs) sum += v;
      for (double& v : probs) v = sum > 0 ? v / sum : 1.0 / static_cast<double>(probs.size());
    }
    std::vector<ClassId> order(probs.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<ClassId>(c);
    std::stable_sort(order.begin(), order.end(), [&](ClassId a, ClassId b) { return probs[a] > probs[b]; });
    if (top_k > 0 && static_cast<std::size_t>(top_k) < order.size()) order.resize(top_k);
    ctx.out << labels.emoji(pred.label);
    for (ClassId c : order) ctx.out << '\t' << labels.emoji(c) << ' ' << format_fixed(probs[c], 6);
    ctx.out << '\n';
  }
  return 0;
}

int cmd_gen_synthetic(const Context& ctx) {
  const std::string tmpl = ctx.str("paths.synthetic_template");
  const SyntheticSpec spec =
      tmpl.empty() ? SyntheticSpec::preset(ctx.str("synthetic.preset")) : SyntheticSpec::load(tmpl);
  const int n = ctx.integer("synthetic.n");
  if (n < 0) throw InputError("synthetic.n must be >= 0");
  const fs::path out = ctx.out_dir() / "corpus.jsonl";
  write_corpus(out, generate_synthetic_corpus(spec, static_cast<std::size_t>(n), ctx.seed()));
  ctx.log("gen-synthetic: " + std::to_string(n) + " tweets -> " + out.string());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emoji prediction for tweets: corpus ingestion, analysis, baselines and a BiLSTM."};
  app.name("emojipred");
  app.fallthrough();
  app.require_subcommand(1);
  app.footer(
      "Every config key can be set in the JSON file given by --config or overridden by the flag\n"
      "of the same dotted name, e.g. --pipeline.num_labels 4 --neural.h 32.\n"
      "Exit codes: 0 ok, 1 bad input, 2 missing resource, 3 inconsistent artifacts.");

  std::string config_path;
  app.add_option("-c,--config", config_path, "JSON config file");
  std::vector<std::pair<std::string, CLI::Option*>> key_options;
  std::map<std::string, std::string> values;
  for (const auto& key : config_keys()) {
    const auto& def = default_config();
    std::string shown;
    {
      const ojson* node = &def;
      std::size_t pos = 0;
      while (true) {
        const std::size_t dot = key.find('.', pos);
        node = &node->at(key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
      }
      shown = node->is_string() ? node->get<std::string>() : node->dump();
    }
    auto* opt = app.add_option("--" + key, values[key], "default: " + (shown.empty() ? "\"\"" : shown))
                    ->group("Config keys");
    key_options.emplace_back(key, opt);
  }
  const std::pair<const char*, const char*> aliases[] = {{"--out-dir", "paths.out_dir"},
                                                         {"--corpus", "paths.corpus"},
                                                         {"--dataset", "paths.dataset_dir"},
                                                         {"--checkpoint", "paths.checkpoint"}};
  std::map<std::string, std::string> alias_values;
  std::vector<std::pair<std::string, CLI::Option*>> alias_options;
  for (const auto& [flag, key] : aliases) {
    alias_options.emplace_back(key, app.add_option(flag, alias_values[key], std::string("same as --") + key));
  }

  auto* ingest = app.add_subcommand(
      "ingest", "Load, filter, label and normalize a JSONL corpus.\n"
                "Writes dataset.jsonl, labels.txt, lexicon.tsv, sources.tsv, ingest_summary.json.");
  auto* stats = app.add_subcommand(
      "stats", "Label/source distributions and per-class top features of an ingested dataset.\n"
               "Writes label_distribution.csv, source_distribution.csv, source_emoji_crosstab.csv,\n"
               "source_top_emoji.csv, top_features_text.csv, top_features_hashtags.csv.");
  auto* train = app.add_subcommand(
      "train", "Train train.model on the training split.\n"
               "Writes checkpoint.ckpt, text_vocab.tsv, hashtag_vocab.tsv, history.csv, train_summary.json.");
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a checkpoint on the test split. Writes metrics.json.");
  auto* suite = app.add_subcommand(
      "suite", "Run the seven-row model/feature comparison. Writes report.csv and report.txt.");
  auto* predict = app.add_subcommand(
      "predict", "Predict the emoji for a text (or each line of --input). Prints to stdout.");
  auto* gen = app.add_subcommand(
      "gen-synthetic", "Generate a synthetic corpus with planted signals. Writes corpus.jsonl.");

  std::string text, input;
  std::string source_override, hashtag_override;
  int top_k = 3;
  predict->add_option("text,--text", text, "Tweet text");
  predict->add_option("--input", input, "File with one tweet per line");
  auto* source_opt = predict->add_option("--source", source_override, "Application source override");
  auto* hashtag_opt = predict->add_option("--hashtags", hashtag_override, "Comma-separated hashtags override");
  predict->add_option("--top-k", top_k, "Probabilities to print (0 = all)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    Context ctx{config_path.empty() ? default_config() : load_config(config_path), out, err};
    for (const auto& [key, opt] : key_options) {
      if (opt->count() > 0) set_config_value(ctx.config, key, values[key]);
    }
    for (const auto& [key, opt] : alias_options) {
      if (opt->count() > 0) set_config_value(ctx.config, key, alias_values[key]);
    }
    if (ingest->parsed()) return cmd_ingest(ctx);
    if (stats->parsed()) return cmd_stats(ctx);
    if (train->parsed()) return cmd_train(ctx);
    if (evaluate->parsed()) return cmd_evaluate(ctx);
    if (suite->parsed()) return cmd_suite(ctx);
    if (predict->parsed()) {
      if (text.empty() && input.empty()) throw InputError("nothing to predict: give a text or --input");
      return cmd_predict(ctx, text, input,
                         source_opt->count() ? std::optional<std::string>(source_override) : std::nullopt,
                         hashtag_opt->count() ? std::optional<std::string>(hashtag_override) : std::nullopt,
                         top_k);
    }
    if (gen->parsed()) return cmd_gen_synthetic(ctx);
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed artifact: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace emojipred::cli
