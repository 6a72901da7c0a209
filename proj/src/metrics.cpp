#include "emojipred/metrics.hpp"

#include <string>

namespace emojipred {

ConfusionMatrix confusion_matrix(const std::vector<ClassId>& preds,
                                 const std::vector<ClassId>& golds, int num_classes) {
  if (preds.size() != golds.size()) {
    throw InputError("predictions (" + std::to_string(preds.size()) + ") and gold labels (" +
                     std::to_string(golds.size()) + ") differ in length");
  }
  if (num_classes < 1) throw InputError("confusion matrix needs at least one class");
  ConfusionMatrix m(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (golds[i] < 0 || golds[i] >= num_classes || preds[i] < 0 || preds[i] >= num_classes) {
      throw InputError("label out of range at index " + std::to_string(i));
    }
    ++m[golds[i]][preds[i]];
  }
  return m;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport metrics(const ConfusionMatrix& confusion) {
  const std::size_t c = confusion.size();
  for (const auto& row : confusion) {
    if (row.size() != c) throw InputError("confusion matrix must be square");
  }
  MetricsReport r;
  r.confusion = confusion;
  r.per_class.resize(c);
  std::vector<std::size_t> col_sums(c, 0);
  std::size_t trace = 0;
  for (std::size_t g = 0; g < c; ++g) {
    for (std::size_t p = 0; p < c; ++p) {
      r.n_examples += confusion[g][p];
      col_sums[p] += confusion[g][p];
      r.per_class[g].support += confusion[g][p];
    }
    trace += confusion[g][g];
  }
  r.accuracy = ratio(trace, r.n_examples);
  for (std::size_t k = 0; k < c; ++k) {
    auto& m = r.per_class[k];
    const std::size_t tp = confusion[k][k];
    m.precision = ratio(tp, col_sums[k]);
    m.recall = ratio(tp, m.support);
    const double denom = m.precision + m.recall;
    m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  if (c > 0) {
    r.macro_precision /= static_cast<double>(c);
    r.macro_recall /= static_cast<double>(c);
    r.macro_f1 /= static_cast<double>(c);
  }
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : per_class) {
    per.push_back({{"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"support", m.support}});
  }
  return {{"n_examples", n_examples},
          {"accuracy", accuracy},
          {"macro_precision", macro_precision},
          {"macro_recall", macro_recall},
          {"macro_f1", macro_f1},
          {"per_class", per},
          {"confusion", confusion}};
}

}  // namespace emojipred
