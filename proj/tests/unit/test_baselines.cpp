#include <doctest.h>

#include <map>

#include "emojipred/baselines.hpp"
#include "helpers.hpp"

using namespace emojipred;

namespace {

SparseVector dense(const std::vector<double>& v) {
  SparseVector x;
  x.dim = static_cast<int>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      x.index.push_back(static_cast<int>(i));
      x.value.push_back(v[i]);
    }
  }
  return x;
}

SparseDataset toy_separable() {
  SparseDataset d;
  d.dim = 2;
  d.num_classes = 2;
  for (int i = 0; i < 50; ++i) {
    d.x.push_back(dense({1, 0}));
    d.y.push_back(0);
    d.x.push_back(dense({0, 1}));
    d.y.push_back(1);
  }
  return d;
}

// Random dataset with a planted rule: class = argmax over the first C features.
SparseDataset random_planted(std::uint64_t seed, int n, int dim, int classes) {
  Rng rng(seed);
  SparseDataset d;
  d.dim = dim;
  d.num_classes = classes;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(dim, 0.0);
    const ClassId c = static_cast<ClassId>(rng.below(classes));
    v[c] = 2.0;
    for (int k = 0; k < 3; ++k) v[rng.below(dim)] += 1.0;
    d.x.push_back(dense(v));
    d.y.push_back(c);
  }
  return d;
}

double oracle_gini(const std::vector<double>& counts) {
  double n = 0.0, sq = 0.0;
  for (double c : counts) n += c;
  if (n == 0.0) return 0.0;
  for (double c : counts) sq += (c / n) * (c / n);
  return 1.0 - sq;
}

// Enumerates all midpoint thresholds on feature 0 and returns the one with
// the largest weighted impurity decrease.
double oracle_best_threshold(const std::vector<double>& xs, const std::vector<ClassId>& ys,
                             int classes) {
  std::map<double, int> distinct;
  for (double x : xs) distinct[x] = 1;
  std::vector<double> values;
  for (const auto& kv : distinct) values.push_back(kv.first);
  std::vector<double> all(classes, 0.0);
  for (ClassId y : ys) all[y] += 1.0;
  const double n = static_cast<double>(xs.size());
  double best_gain = -1.0, best_t = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double t = 0.5 * (values[i] + values[i + 1]);
    std::vector<double> l(classes, 0.0), r(classes, 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) (xs[k] <= t ? l : r)[ys[k]] += 1.0;
    double nl = 0.0;
    for (double c : l) nl += c;
    const double gain =
        oracle_gini(all) - (nl / n) * oracle_gini(l) - ((n - nl) / n) * oracle_gini(r);
    if (gain > best_gain) {
      best_gain = gain;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<double> oracle_forest_scores(const ForestModel& f, const SparseVector& x) {
  std::vector<double> dense_x(x.dim, 0.0);
  for (std::size_t i = 0; i < x.nnz(); ++i) dense_x[x.index[i]] = x.value[i];
  std::vector<double> s(f.num_classes(), 0.0);
  for (const auto& tree : f.trees()) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
      const auto& nd = tree.nodes[node];
      node = dense_x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    for (int c = 0; c < f.num_classes(); ++c) s[c] += tree.nodes[node].distribution[c];
  }
  return s;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("argmax ties go to the lowest index") {
    CHECK(argmax({3, 3}) == 0);
    CHECK(argmax({1, 2, 2}) == 1);
  }

  TEST_CASE("linear separable toy reaches perfect accuracy") {
    const auto d = toy_separable();
    const auto m = train_linear(d, {});
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(m.predict(d.x[i]).label == d.y[i]);
  }

  TEST_CASE("linear single class and determinism") {
    SparseDataset d;
    d.dim = 3;
    d.num_classes = 1;
    for (int i = 0; i < 5; ++i) {
      d.x.push_back(dense({double(i), 1, 0}));
      d.y.push_back(0);
    }
    const auto m = train_linear(d, {});
    CHECK(m.predict(dense({0, 0, 5})).label == 0);
    const auto p = random_planted(1, 100, 8, 3);
    CHECK(train_linear(p, {}) == train_linear(p, {}));
    LinearConfig other;
    other.seed = 2;
    CHECK_FALSE(train_linear(p, {}) == train_linear(p, other));
  }

  TEST_CASE("linear argmax of known scores and dimension checks") {
    LinearModel m(2, 2, {});
    m.weights() = {2, 0, 1, 0};
    CHECK(m.predict(dense({1, 0})).label == 0);
    CHECK_THROWS_AS(m.predict(dense({1, 0, 0})), InputError);
    SparseDataset bad = toy_separable();
    bad.x[3].dim = 5;
    CHECK_THROWS_AS(train_linear(bad, {}), InputError);
  }

  TEST_CASE("linear predict is invariant to positive scaling") {
    const auto d = random_planted(4, 120, 10, 4);
    const auto m = train_linear(d, {});
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
      auto scaled = m;
      const double lambda = 0.01 + 10.0 * rng.uniform();
      for (auto& w : scaled.weights()) w *= lambda;
      for (auto& b : scaled.bias()) b *= lambda;
      const auto& x = d.x[rng.below(d.size())];
      CHECK(scaled.predict(x).label == m.predict(x).label);
    }
  }

  TEST_CASE("linear objective is non-increasing on a toy set") {
    std::vector<double> obj;
    train_linear(toy_separable(), {}, &obj);
    REQUIRE(obj.size() == 20);
    for (std::size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] <= obj[i - 1] + 1e-12);
  }

  TEST_CASE("gini matches the hand formula") {
    CHECK(gini({5}) == 0.0);
    CHECK(gini({1, 1}) == doctest::Approx(0.5));
    CHECK(gini({1, 1, 1}) == doctest::Approx(2.0 / 3.0));
    for (double a = 0; a <= 4; ++a) {
      for (double b = 0; b <= 4; ++b) {
        for (double c = 0; c <= 4; ++c) {
          if (a + b + c == 0) continue;
          CHECK(gini({a, b, c}) == doctest::Approx(oracle_gini({a, b, c})).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("forest on pure data is a set of leaves") {
    SparseDataset d;
    d.dim = 2;
    d.num_classes = 3;
    for (int i = 0; i < 10; ++i) {
      d.x.push_back(dense({double(i % 3), 1}));
      d.y.push_back(2);
    }
    ForestConfig cfg;
    cfg.trees = 5;
    const auto f = train_forest(d, cfg);
    for (const auto& t : f.trees()) CHECK(t.nodes.size() == 1);
    CHECK(f.predict(dense({0, 0})).label == 2);
    cfg.trees = 0;
    CHECK_THROWS_AS(train_forest(d, cfg), InputError);
  }

  TEST_CASE("root split matches an exhaustive oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      SparseDataset d;
      d.dim = 1;
      d.num_classes = 2;
      std::vector<double> xs;
      const double cut = 1.5 + static_cast<double>(rng.below(4));
      for (int i = 0; i < 40; ++i) {
        const double x = static_cast<double>(rng.below(7));
        xs.push_back(x);
        d.x.push_back(dense({x}));
        d.y.push_back(x > cut ? 1 : 0);
      }
      ForestConfig cfg;
      cfg.trees = 1;
      cfg.bootstrap = false;
      cfg.max_features = 1;
      cfg.min_leaf = 1;
      const auto f = train_forest(d, cfg);
      const auto& root = f.trees()[0].nodes[0];
      if (root.is_leaf()) continue;  // one class only
      CHECK(root.feature == 0);
      CHECK(root.threshold == oracle_best_threshold(xs, d.y, 2));
    }
  }

  TEST_CASE("forest structure invariants and tree-walk oracle") {
    const auto d = random_planted(21, 200, 12, 3);
    ForestConfig cfg;
    cfg.trees = 15;
    cfg.max_depth = 8;
    const auto f = train_forest(d, cfg);
    for (const auto& t : f.trees()) {
      for (const auto& nd : t.nodes) {
        if (nd.is_leaf()) {
          CHECK(nd.distribution.size() == 3);
        } else {
          CHECK(nd.feature < d.dim);
          CHECK(nd.left > 0);
          CHECK(nd.right > 0);
        }
      }
    }
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> v(12, 0.0);
      for (int k = 0; k < 4; ++k) v[rng.below(12)] += 1.0;
      const auto x = dense(v);
      const auto oracle = oracle_forest_scores(f, x);
      CHECK(f.scores(x) == oracle);
      CHECK(f.predict(x).label == argmax(oracle));
    }
    CHECK(train_forest(d, cfg) == f);
    cfg.threads = 3;
    CHECK(train_forest(d, cfg).trees() == f.trees());
  }

  TEST_CASE("forest learns a planted rule") {
    const auto d = random_planted(8, 300, 10, 3);
    ForestConfig cfg;
    cfg.trees = 30;
    const auto f = train_forest(d, cfg);
    int ok = 0;
    for (std::size_t i = 0; i < d.size(); ++i) ok += f.predict(d.x[i]).label == d.y[i];
    CHECK(ok >= 270);
    const auto imp = f.feature_importance();
    double total = 0.0;
    for (double v : imp) total += v;
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("models round trip exactly") {
    testing::TempDir dir("baselines");
    const auto d = random_planted(2, 80, 6, 3);
    const auto lin = train_linear(d, {});
    save_linear(dir / "lin.ckpt", lin, {{"note", "x"}});
    nlohmann::json extra;
    CHECK(load_linear(dir / "lin.ckpt", &extra) == lin);
    CHECK(extra["note"] == "x");
    ForestConfig cfg;
    cfg.trees = 4;
    const auto f = train_forest(d, cfg);
    save_forest(dir / "f.ckpt", f, {});
    CHECK(load_forest(dir / "f.ckpt") == f);
    CHECK_THROWS_AS(load_forest(dir / "lin.ckpt"), ConsistencyError);
  }
}
