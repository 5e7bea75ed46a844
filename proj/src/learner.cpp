#include "localboost/learner.hpp"

#include "localboost/error.hpp"

#include <cmath>

namespace localboost {

Eigen::VectorXd BaseLearner::predict_scores(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) throw ValidationError("feature dimension differs from learner input");
  Features row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return predict_scores(row).row(0).transpose();
}

int BaseLearner::predict_label(std::span<const double> x) const {
  return argmax_label(predict_scores(x).transpose());
}

Labels BaseLearner::predict_labels(const Features& x) const {
  const Eigen::MatrixXd s = predict_scores(x);
  Labels out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_label(s.row(i));
  return out;
}

int argmax_label(const Eigen::Ref<const Eigen::RowVectorXd>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return static_cast<int>(best) + 1;
}

Eigen::MatrixXd SoftmaxClassifier::predict_scores(const Features& x) const {
  if (x.cols() != input_dim()) throw ValidationError("feature dimension differs from learner input");
  return net_.probabilities(x);
}

Json SoftmaxClassifier::to_json() const {
  return {{"type", net_.layers().size() == 1 ? "linear" : "mlp"}, {"network", net_.to_json()}};
}

ConstantLearner::ConstantLearner(Eigen::VectorXd scores, int input_dim)
    : scores_(std::move(scores)), input_dim_(input_dim) {
  if (scores_.size() < 2) throw ValidationError("constant learner needs at least 2 classes");
  if ((scores_.array() < 0.0).any() || std::abs(scores_.sum() - 1.0) > 1e-6)
    throw ValidationError("constant learner scores must lie on the simplex");
}

Eigen::MatrixXd ConstantLearner::predict_scores(const Features& x) const {
  if (x.cols() != input_dim_) throw ValidationError("feature dimension differs from learner input");
  return scores_.transpose().replicate(x.rows(), 1);
}

Json ConstantLearner::to_json() const {
  return {{"type", "constant"},
          {"input_dim", input_dim_},
          {"scores", std::vector<double>(scores_.data(), scores_.data() + scores_.size())}};
}

LearnerPtr learner_from_json(const Json& doc) {
  const auto type = doc.at("type").get<std::string>();
  if (type == "linear" || type == "mlp")
    return std::make_shared<SoftmaxClassifier>(SoftmaxMlp::from_json(doc.at("network")));
  if (type == "constant") {
    const auto s = doc.at("scores").get<std::vector<double>>();
    return std::make_shared<ConstantLearner>(Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())),
                                             doc.at("input_dim").get<int>());
  }
  throw ValidationError("unknown learner type '" + type + "'");
}

LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "linear") return LearnerKind::kLinear;
  if (name == "mlp") return LearnerKind::kMlp;
  throw ConfigError("unknown learner type '" + name + "'");
}

std::string to_string(LearnerKind kind) { return kind == LearnerKind::kLinear ? "linear" : "mlp"; }

SoftmaxClassifier untrained_learner(int input_dim, int num_classes, const LearnerSettings& settings,
                                    std::uint64_t seed) {
  if (settings.kind == LearnerKind::kLinear) return SoftmaxClassifier(SoftmaxMlp({input_dim, num_classes}));
  return SoftmaxClassifier(SoftmaxMlp::xavier({input_dim, settings.hidden, num_classes}, seed));
}

LearnerFit train_base(const Features& x, std::span<const int> labels, int num_classes,
                      const LearnerSettings& settings, std::uint64_t seed) {
  if (x.rows() == 0) throw ValidationError("cannot train a learner on an empty region");
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw ValidationError("label count differs from rows");
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(x.rows(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > num_classes) throw ValidationError("training label outside 1..C");
    targets(static_cast<Eigen::Index>(i), labels[i] - 1) = 1.0;
  }
  SoftmaxMlp net = untrained_learner(static_cast<int>(x.cols()), num_classes, settings, seed).network();
  TrainTrace trace = train_sgd(net, x, targets, settings.sgd, seed);
  return {std::make_shared<SoftmaxClassifier>(std::move(net)), std::move(trace)};
}

}  // namespace localboost
