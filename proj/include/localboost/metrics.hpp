#pragma once

#include "localboost/datamodel.hpp"
#include "localboost/dataset_io.hpp"

#include <optional>
#include <span>

namespace localboost {

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  /// Only for C = 2, positive class = label 2. Zero when the positive class never occurs.
  std::optional<double> binary_f1;
  Eigen::MatrixXi confusion;  // rows: gold, cols: predicted (0-based class index)
  std::size_t total = 0;

  Json to_json() const;
};

/// Macro-F1 averages over classes present in gold or predictions.
MetricsReport compute_metrics(std::span<const int> preds, std::span<const int> gold, const LabelSpace& labels);

}  // namespace localboost
