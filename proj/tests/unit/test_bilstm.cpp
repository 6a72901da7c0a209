#include <doctest.h>

#include <cmath>

#include "emojipred/bilstm.hpp"
#include "emojipred/metrics.hpp"
#include "helpers.hpp"

using namespace emojipred;

namespace {

BiLstmDims tiny_dims() {
  BiLstmDims d;
  d.text_vocab = 9;
  d.hash_vocab = 6;
  d.source_vocab = 4;
  d.num_classes = 3;
  d.d = 4;
  d.d_s = 3;
  d.h = 4;
  return d;
}

EncodedExample random_example(Rng& rng, const BiLstmDims& dims, int max_len) {
  EncodedExample ex;
  ex.text_ids.assign(max_len, 0);
  ex.text_len = 1 + static_cast<int>(rng.below(max_len));
  for (int i = 0; i < ex.text_len; ++i) ex.text_ids[i] = 1 + static_cast<int>(rng.below(dims.text_vocab - 1));
  const std::size_t nh = rng.below(3);
  for (std::size_t i = 0; i < nh; ++i) ex.hashtag_ids.push_back(1 + static_cast<int>(rng.below(dims.hash_vocab - 1)));
  ex.source_id = static_cast<SourceId>(rng.below(dims.source_vocab));
  ex.label = static_cast<ClassId>(rng.below(dims.num_classes));
  return ex;
}

std::vector<EncodedExample> random_batch(std::uint64_t seed, const BiLstmDims& dims, int n,
                                         int max_len) {
  Rng rng(seed);
  std::vector<EncodedExample> out;
  for (int i = 0; i < n; ++i) out.push_back(random_example(rng, dims, max_len));
  return out;
}

const std::vector<FeatureFlags> kAllFlags = {{false, false}, {true, false}, {false, true}, {true, true}};

// Four classes keyed by one planted token each; noise tokens are shared.
std::vector<EncodedExample> planted_batch(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<EncodedExample> out;
  for (int i = 0; i < n; ++i) {
    EncodedExample ex;
    ex.label = i % 4;
    ex.text_ids.assign(6, 0);
    ex.text_len = 4;
    for (int k = 0; k < 4; ++k) ex.text_ids[k] = 6 + static_cast<int>(rng.below(8));
    ex.text_ids[rng.below(4)] = 2 + ex.label;
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST_SUITE("bilstm") {
  TEST_CASE("init bounds, forget bias, pad row, determinism") {
    const auto dims = tiny_dims();
    const auto p = init_params<float>(dims, {true, true}, 7);
    const int h = dims.h;
    for (const auto& [name, t] : p.tensors()) {
      for (std::size_t i = 0; i < t->size(); ++i) {
        const bool forget_bias = (name == "fwd_b" || name == "bwd_b") &&
                                 static_cast<int>(i) >= h && static_cast<int>(i) < 2 * h;
        if (forget_bias) {
          CHECK((*t)[i] == 1.0f);
        } else {
          CHECK(std::abs((*t)[i]) <= 0.08f);
        }
      }
    }
    for (int j = 0; j < dims.d; ++j) {
      CHECK(p.text_emb[j] == 0.0f);
      CHECK(p.hash_emb[j] == 0.0f);
    }
    CHECK(p.out_W.size() == static_cast<std::size_t>(dims.num_classes * p.feature_dim()));
    CHECK(init_params<float>(dims, {true, true}, 7) == p);
    CHECK_FALSE(init_params<float>(dims, {true, true}, 8) == p);
  }

  TEST_CASE("zero params give a uniform softmax and class 0") {
    auto dims = tiny_dims();
    dims.num_classes = 20;
    const auto p = BiLstmParams<double>::zeros(dims, {true, true});
    const auto batch = random_batch(1, dims, 4, 5);
    const auto caches = forward(p, batch);
    for (const auto& c : caches) {
      for (double v : c.logits) CHECK(v == 0.0);
      for (double v : c.probs) CHECK(v == doctest::Approx(1.0 / 20));
    }
    CHECK(mean_loss(caches, batch) == doctest::Approx(std::log(20.0)).epsilon(1e-12));
    CHECK(predict(p, batch[0]).label == 0);
  }

  TEST_CASE("cross entropy closed forms") {
    CHECK(cross_entropy<double>({2.0, 0.0}, 0) == doctest::Approx(std::log1p(std::exp(-2.0))));
    CHECK(cross_entropy<double>({2.0, 0.0}, 0) == doctest::Approx(0.1269).epsilon(1e-3));
    CHECK(cross_entropy<double>({1000.0, 0.0}, 0) == doctest::Approx(0.0));
    CHECK(std::isfinite(cross_entropy<double>({0.0, 1000.0}, 0)));
  }

  TEST_CASE("softmax normalization and shift invariance") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> z(1 + rng.below(20));
      for (auto& v : z) v = rng.uniform(-50, 50);
      const auto p = softmax(z);
      double s = 0.0;
      for (double v : p) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
      auto shifted = z;
      const double k = rng.uniform(-100, 100);
      for (auto& v : shifted) v += k;
      const auto q = softmax(shifted);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("id range checks") {
    const auto dims = tiny_dims();
    const auto p = init_params<double>(dims, {true, true}, 1);
    auto ex = random_batch(1, dims, 1, 5)[0];
    ex.source_id = dims.source_vocab;
    CHECK_THROWS_AS(forward(p, ex), InputError);
    ex.source_id = 0;
    ex.text_ids[0] = dims.text_vocab;
    CHECK_THROWS_AS(forward(p, ex), InputError);
  }

  TEST_CASE("padding invariance and batch independence") {
    const auto dims = tiny_dims();
    for (const auto& flags : kAllFlags) {
      const auto p = init_params<double>(dims, flags, 3, 0.5);
      const auto batch = random_batch(4, dims, 20, 5);
      const auto caches = forward(p, batch);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        auto padded = batch[i];
        padded.text_ids.resize(padded.text_ids.size() + 7, 0);
        CHECK(forward(p, padded).logits == caches[i].logits);
        CHECK(forward(p, batch[i]).logits == caches[i].logits);
      }
    }
  }

  TEST_CASE("disabled features do not affect logits") {
    const auto dims = tiny_dims();
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = init_params<double>(dims, {}, trial, 0.5);
      auto ex = random_example(rng, dims, 5);
      const auto base = forward(p, ex).logits;
      ex.source_id = static_cast<SourceId>(rng.below(dims.source_vocab));
      ex.hashtag_ids = {1 + static_cast<int>(rng.below(dims.hash_vocab - 1))};
      CHECK(forward(p, ex).logits == base);
    }
  }

  TEST_CASE("zeroed feature blocks match flags off") {
    const auto dims = tiny_dims();
    auto on = init_params<double>(dims, {true, true}, 11, 0.5);
    std::fill(on.hash_emb.begin(), on.hash_emb.end(), 0.0);
    std::fill(on.src_emb.begin(), on.src_emb.end(), 0.0);
    auto off = BiLstmParams<double>::zeros(dims, {});
    off.text_emb = on.text_emb;
    off.fwd = on.fwd;
    off.bwd = on.bwd;
    off.out_b = on.out_b;
    const int fd_on = on.feature_dim(), fd_off = off.feature_dim();
    for (int c = 0; c < dims.num_classes; ++c) {
      for (int j = 0; j < fd_off; ++j) off.out_W[c * fd_off + j] = on.out_W[c * fd_on + j];
    }
    for (const auto& ex : random_batch(6, dims, 20, 5)) {
      const auto a = forward(on, ex).logits;
      const auto b = forward(off, ex).logits;
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("output layer gradient closed form") {
    const auto dims = tiny_dims();
    const auto p = init_params<double>(dims, {true, true}, 12, 0.5);
    const auto batch = random_batch(13, dims, 6, 5);
    const auto caches = forward(p, batch);
    const auto g = backward(p, caches, batch);
    const int fd = p.feature_dim();
    const double n = static_cast<double>(batch.size());
    for (int c = 0; c < dims.num_classes; ++c) {
      double db = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        db += (caches[i].probs[c] - (batch[i].label == c ? 1.0 : 0.0)) / n;
      }
      CHECK(g.out_b[c] == doctest::Approx(db).epsilon(1e-12));
      for (int j = 0; j < fd; ++j) {
        double dw = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          dw += (caches[i].probs[c] - (batch[i].label == c ? 1.0 : 0.0)) * caches[i].features[j] / n;
        }
        CHECK(g.out_W[c * fd + j] == doctest::Approx(dw).epsilon(1e-12));
      }
    }
    for (int j = 0; j < dims.d; ++j) {
      CHECK(g.text_emb[j] == 0.0);
      CHECK(g.hash_emb[j] == 0.0);
    }
  }

  TEST_CASE("disabled features receive zero gradient") {
    const auto dims = tiny_dims();
    const auto p = init_params<double>(dims, {}, 2, 0.5);
    const auto batch = random_batch(3, dims, 4, 5);
    const auto g = backward(p, forward(p, batch), batch);
    for (double v : g.hash_emb) CHECK(v == 0.0);
    for (double v : g.src_emb) CHECK(v == 0.0);
  }

  TEST_CASE("gradient check for every flag combination") {
    const auto dims = tiny_dims();
    for (const auto& flags : kAllFlags) {
      const auto p = init_params<double>(dims, flags, 21, 0.5);
      const auto batch = random_batch(22, dims, 3, 5);
      const auto r = grad_check(p, batch);
      CAPTURE(r.worst_tensor);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.per_tensor.size() == 11);
    }
  }

  TEST_CASE("gradient check catches a broken forget-gate term") {
    const auto dims = tiny_dims();
    const auto p = init_params<double>(dims, {true, true}, 21, 0.5);
    const auto batch = random_batch(22, dims, 3, 5);
    BackwardOptions broken;
    broken.negate_forget_gate_term = true;
    CHECK(grad_check(p, batch, 1e-5, broken).max_rel_error > 1e-2);
  }

  TEST_CASE("training fits a planted corpus and is deterministic") {
    const auto train = planted_batch(1, 120);
    const auto dev = planted_batch(2, 40);
    TrainConfig cfg;
    cfg.d = 8;
    cfg.h = 8;
    cfg.learning_rate = 0.02;
    cfg.batch_size = 16;
    cfg.max_epochs = 30;
    cfg.patience = 30;
    const VocabSizes sizes{14, 2, 1, 4};
    const auto r = train_bilstm(train, dev, sizes, cfg);
    std::vector<ClassId> preds, golds;
    for (const auto& ex : train) {
      preds.push_back(predict(r.params, ex).label);
      golds.push_back(ex.label);
    }
    CHECK(evaluate_predictions(preds, golds, 4).accuracy >= 0.99);
    const auto again = train_bilstm(train, dev, sizes, cfg);
    CHECK(again.history == r.history);
    CHECK(again.params == r.params);
  }

  TEST_CASE("patience 0 stops at the first non-improving epoch") {
    const auto train = planted_batch(3, 40);
    TrainConfig cfg;
    cfg.d = 4;
    cfg.h = 4;
    cfg.learning_rate = 1e-6;
    cfg.max_epochs = 10;
    cfg.patience = 0;
    const auto r = train_bilstm(train, train, {14, 2, 1, 4}, cfg);
    // With a negligible step size dev macro-F1 cannot improve after epoch 1.
    CHECK(r.history.size() == 2);
    CHECK(r.best_epoch == 1);
  }

  TEST_CASE("empty dev split falls back to train") {
    TrainConfig cfg;
    cfg.d = 4;
    cfg.h = 4;
    cfg.max_epochs = 1;
    const auto r = train_bilstm(planted_batch(1, 8), {}, {14, 2, 1, 4}, cfg);
    CHECK(r.warnings.size() == 1);
    CHECK(r.history.size() == 1);
  }

  TEST_CASE("checkpoint and history files") {
    testing::TempDir dir("bilstm");
    const auto p = init_params<float>(tiny_dims(), {true, false}, 4);
    save_bilstm(dir / "m.ckpt", p, {{"max_len", 5}});
    nlohmann::json extra;
    CHECK(load_bilstm(dir / "m.ckpt", &extra) == p);
    CHECK(extra["max_len"] == 5);
    write_history(dir / "h.csv", {{1, 0.5, 0.25, 0.125}});
    CHECK(testing::read_file(dir / "h.csv") ==
          "epoch,train_loss,dev_acc,dev_macro_f1\n1,0.500000,0.250000,0.125000\n");
    TrainConfig cfg;
    cfg.flags.use_source = true;
    cfg.patience = 7;
    CHECK(train_config_from_json(to_json(cfg)) == cfg);
  }
}
