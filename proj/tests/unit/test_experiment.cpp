#include <doctest.h>

#include "emojipred/experiment.hpp"
#include "emojipred/pipeline.hpp"
#include "helpers.hpp"

using namespace emojipred;

namespace {

ReportRow row(const std::string& setting, double acc, double p, double r, double f1) {
  ReportRow x;
  x.model = "BiLSTM";
  x.setting = setting;
  x.metrics.accuracy = acc;
  x.metrics.macro_precision = p;
  x.metrics.macro_recall = r;
  x.metrics.macro_f1 = f1;
  x.n_test = 10;
  x.seed = 1;
  x.config_hash = "abc";
  return x;
}

struct Fixture {
  Dataset ds;
  DatasetSplit split;
};

const Fixture& ablation_fixture() {
  static const Fixture f = [] {
    Fixture out;
    LoadResult corpus;
    corpus.tweets = generate_synthetic_corpus(SyntheticSpec::ablation(), 600, 5);
    IngestOptions opt;
    opt.pipeline.num_labels = 6;
    out.ds = ingest(corpus, opt, nullptr);
    out.split = split(out.ds.examples, {0.8, 0.1, 0.1}, 5);
    return out;
  }();
  return f;
}

ExperimentConfig small_config(ModelKind kind) {
  ExperimentConfig c;
  c.label = "Text";
  c.model = kind;
  c.vocab.text_min_freq = 1;
  c.forest.trees = 10;
  c.neural.d = 8;
  c.neural.h = 8;
  c.neural.d_s = 4;
  c.neural.max_epochs = 3;
  c.neural.learning_rate = 0.01;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("best flags match a manual max scan") {
    const std::vector<ReportRow> rows = {row("a", 0.5, 0.2, 0.9, 0.3), row("b", 0.7, 0.2, 0.1, 0.3),
                                         row("c", 0.6, 0.1, 0.3, 0.29996)};
    CHECK(best_rows(rows, 0) == std::vector<std::size_t>{1});
    CHECK(best_rows(rows, 1) == std::vector<std::size_t>{0, 1});
    CHECK(best_rows(rows, 2) == std::vector<std::size_t>{0});
    // 0.29996 prints as 0.3000, so all three tie on F1.
    CHECK(best_rows(rows, 3) == std::vector<std::size_t>{0, 1, 2});
    const auto table = report_table(rows);
    CHECK(table.find("0.7000*") != std::string::npos);
    CHECK(table.find("0.9000*") != std::string::npos);
    CHECK(table.find("0.5000*") == std::string::npos);

    const std::vector<ReportRow> one = {row("only", 0.1, 0.2, 0.3, 0.4)};
    for (int m = 0; m < 4; ++m) CHECK(best_rows(one, m) == std::vector<std::size_t>{0});
  }

  TEST_CASE("csv format") {
    const auto csv = report_csv({row("Text + Source", 0.3372, 0.2814, 0.2301, 0.2110)});
    CHECK(csv == std::string(kReportHeader) +
                     "\nBiLSTM,Text + Source,0.3372,0.2814,0.2301,0.2110,10,1,abc\n");
  }

  TEST_CASE("standard suite layout") {
    const auto suite = standard_suite(ExperimentConfig{});
    REQUIRE(suite.size() == 7);
    CHECK(suite[0].model == ModelKind::kForest);
    CHECK(suite[0].dataset == DatasetVariant::kSemeval);
    CHECK(suite[1].model == ModelKind::kLinear);
    CHECK(suite[6].label == "Text + Hashtags + Source");
    CHECK(suite[6].flags == FeatureFlags{true, true});
    CHECK(suite[3].dataset == DatasetVariant::kComplete);
    CHECK(suite[3].flags == FeatureFlags{});
    CHECK(display_name(ModelKind::kLinear) == "LinearSVC");
  }

  TEST_CASE("config hash tracks content") {
    ExperimentConfig a, b;
    CHECK(a.hash() == b.hash());
    // Only the active model's hyperparameters are hashed.
    b.linear.epochs = 3;
    CHECK(a.hash() == b.hash());
    b.neural.max_epochs = 3;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash().size() == 16);
  }

  TEST_CASE("semeval subsample skews classes and keeps order") {
    std::vector<LabeledExample> xs;
    for (int i = 0; i < 400; ++i) {
      LabeledExample ex;
      ex.tweet_id = std::to_string(i);
      ex.label = i % 4;
      xs.push_back(ex);
    }
    const auto sub = semeval_subsample(xs, 4, {}, 3);
    std::vector<int> counts(4, 0);
    for (const auto& ex : sub) ++counts[ex.label];
    CHECK(counts[0] == 50);
    CHECK(counts[0] > counts[1]);
    CHECK(counts[1] > counts[2]);
    for (std::size_t i = 1; i < sub.size(); ++i) CHECK(std::stoi(sub[i - 1].tweet_id) < std::stoi(sub[i].tweet_id));
    CHECK(semeval_subsample(xs, 4, {}, 3) == sub);
  }

  TEST_CASE("experiments are deterministic") {
    const auto& f = ablation_fixture();
    for (auto kind : {ModelKind::kLinear, ModelKind::kForest, ModelKind::kBiLstm}) {
      const auto c = small_config(kind);
      const auto a = run_experiment(c, f.split, f.ds.labels.size(), f.ds.sources.size());
      const auto b = run_experiment(c, f.split, f.ds.labels.size(), f.ds.sources.size());
      CHECK(report_csv({a}) == report_csv({b}));
      CHECK(a.n_test == f.split.test.size());
      CHECK(a.config_hash == c.hash());
    }
  }

  TEST_CASE("model save and load") {
    testing::TempDir dir("model");
    const auto& f = ablation_fixture();
    for (auto kind : {ModelKind::kLinear, ModelKind::kForest, ModelKind::kBiLstm}) {
      auto c = small_config(kind);
      c.flags = {true, true};
      const auto m = train_model(c, f.split.train, f.split.dev, f.ds.labels.size(), f.ds.sources.size());
      save_model(dir / "m.ckpt", m, {});
      const auto back = load_model(dir / "m.ckpt", m.space.text, m.space.hashtags);
      CHECK(back.kind == kind);
      CHECK(evaluate_model(back, f.split.test).macro_f1 == evaluate_model(m, f.split.test).macro_f1);
      CHECK_THROWS_AS(load_model(dir / "m.ckpt", Vocabulary({"x"}), m.space.hashtags),
                      ConsistencyError);
    }
    CHECK_THROWS_AS(load_model(dir / "none.ckpt", Vocabulary(), Vocabulary()), MissingResourceError);
  }
}
