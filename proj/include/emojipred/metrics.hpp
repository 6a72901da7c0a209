#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "emojipred/common.hpp"

namespace emojipred {

// Rows are gold labels, columns are predictions.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(const std::vector<ClassId>& preds,
                                 const std::vector<ClassId>& golds, int num_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::size_t n_examples = 0;

  nlohmann::json to_json() const;
};

// 0/0 is scored as 0 and absent classes still count in the macro means.
MetricsReport metrics(const ConfusionMatrix& confusion);

inline MetricsReport evaluate_predictions(const std::vector<ClassId>& preds,
                                          const std::vector<ClassId>& golds, int num_classes) {
  return metrics(confusion_matrix(preds, golds, num_classes));
}

}  // namespace emojipred
