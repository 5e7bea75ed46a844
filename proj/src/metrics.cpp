#include "localboost/metrics.hpp"

#include "localboost/error.hpp"

namespace localboost {

namespace {

double f1(int tp, int fp, int fn) {
  const int denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

}  // namespace

MetricsReport compute_metrics(std::span<const int> preds, std::span<const int> gold, const LabelSpace& labels) {
  if (preds.size() != gold.size()) throw ValidationError("prediction and gold lengths differ");
  if (gold.empty()) throw ValidationError("cannot score an empty prediction set");
  const int c = labels.num_classes();
  MetricsReport r;
  r.total = gold.size();
  r.confusion = Eigen::MatrixXi::Zero(c, c);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!labels.is_label(preds[i]) || !labels.is_label(gold[i])) throw ValidationError("label outside 1..C");
    ++r.confusion(gold[i] - 1, preds[i] - 1);
  }
  r.accuracy = r.confusion.trace() / static_cast<double>(r.total);

  double f1_sum = 0.0;
  int present = 0;
  for (int k = 0; k < c; ++k) {
    const int tp = r.confusion(k, k);
    const int fn = r.confusion.row(k).sum() - tp;
    const int fp = r.confusion.col(k).sum() - tp;
    if (tp + fn + fp == 0) continue;
    f1_sum += f1(tp, fp, fn);
    ++present;
  }
  r.macro_f1 = present == 0 ? 0.0 : f1_sum / present;
  if (c == 2) {
    const int tp = r.confusion(1, 1);
    r.binary_f1 = f1(tp, r.confusion(0, 1), r.confusion(1, 0));
  }
  return r;
}

Json MetricsReport::to_json() const {
  Json conf = Json::array();
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < confusion.cols(); ++j) row.push_back(confusion(i, j));
    conf.push_back(row);
  }
  Json doc{{"accuracy", accuracy}, {"macro_f1", macro_f1}, {"total", total}, {"confusion", conf}};
  doc["binary_f1"] = binary_f1 ? Json(*binary_f1) : Json(nullptr);
  return doc;
}

}  // namespace localboost
