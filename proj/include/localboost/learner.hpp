#pragma once

#include "localboost/datamodel.hpp"
#include "localboost/dataset_io.hpp"
#include "localboost/nn.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace localboost {

/// Score-based base learner: maps features to a probability vector over 1..C.
class BaseLearner {
 public:
  virtual ~BaseLearner() = default;

  virtual int num_classes() const = 0;
  virtual int input_dim() const = 0;
  /// N x C, rows on the simplex.
  virtual Eigen::MatrixXd predict_scores(const Features& x) const = 0;
  virtual Json to_json() const = 0;

  Eigen::VectorXd predict_scores(std::span<const double> x) const;
  int predict_label(std::span<const double> x) const;
  Labels predict_labels(const Features& x) const;
};

using LearnerPtr = std::shared_ptr<const BaseLearner>;

/// 1-based argmax; ties go to the smallest class.
int argmax_label(const Eigen::Ref<const Eigen::RowVectorXd>& scores);

/// Linear-softmax (no hidden layer) or one-hidden-layer classifier.
class SoftmaxClassifier final : public BaseLearner {
 public:
  explicit SoftmaxClassifier(SoftmaxMlp net) : net_(std::move(net)) {}

  int num_classes() const override { return net_.output_dim(); }
  int input_dim() const override { return net_.input_dim(); }
  Eigen::MatrixXd predict_scores(const Features& x) const override;
  Json to_json() const override;
  using BaseLearner::predict_scores;

  Eigen::MatrixXd logits(const Features& x) const { return net_.logits(x); }
  const SoftmaxMlp& network() const noexcept { return net_; }

 private:
  SoftmaxMlp net_;
};

/// Input-independent scores. Used for hand-built ensembles.
class ConstantLearner final : public BaseLearner {
 public:
  ConstantLearner(Eigen::VectorXd scores, int input_dim);

  int num_classes() const override { return static_cast<int>(scores_.size()); }
  int input_dim() const override { return input_dim_; }
  Eigen::MatrixXd predict_scores(const Features& x) const override;
  Json to_json() const override;
  using BaseLearner::predict_scores;

 private:
  Eigen::VectorXd scores_;
  int input_dim_;
};

LearnerPtr learner_from_json(const Json& doc);

enum class LearnerKind { kLinear, kMlp };

LearnerKind parse_learner_kind(const std::string& name);
std::string to_string(LearnerKind kind);

struct LearnerSettings {
  LearnerKind kind = LearnerKind::kLinear;
  int hidden = 32;
  SgdSettings sgd{30, 64, 0.5};
};

/// Zero-initialized linear learner, or Xavier hidden layer with zero head for kMlp.
SoftmaxClassifier untrained_learner(int input_dim, int num_classes, const LearnerSettings& settings,
                                    std::uint64_t seed);

struct LearnerFit {
  std::shared_ptr<const SoftmaxClassifier> learner;
  TrainTrace trace;
};

/// Fits a learner by mean cross-entropy on (features, labels in 1..C).
LearnerFit train_base(const Features& x, std::span<const int> labels, int num_classes,
                      const LearnerSettings& settings, std::uint64_t seed);

}  // namespace localboost
