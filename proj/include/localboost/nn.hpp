#pragma once

#include "localboost/datamodel.hpp"
#include "localboost/dataset_io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace localboost {

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_in x fan_out
  Eigen::VectorXd bias;    // fan_out
};

/// Feed-forward network with tanh hidden units and a softmax head, trained on soft-target
/// cross-entropy. Shared by the base learners and the conditional source function.
class SoftmaxMlp {
 public:
  SoftmaxMlp() = default;
  /// Zero-initialized network with the given widths {input, hidden..., output}.
  explicit SoftmaxMlp(std::vector<int> widths);

  /// Xavier-uniform hidden layers; the output layer starts at zero so an untrained
  /// network predicts the uniform distribution.
  static SoftmaxMlp xavier(std::vector<int> widths, std::uint64_t seed);

  int input_dim() const noexcept;
  int output_dim() const noexcept;
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  Eigen::MatrixXd logits(const Features& x) const;
  Eigen::MatrixXd probabilities(const Features& x) const;
  Eigen::VectorXd probabilities(std::span<const double> x) const;

  /// Mean over rows of -sum_c targets(i,c) * log p(i,c).
  double loss(const Features& x, const Eigen::MatrixXd& targets) const;
  /// Same objective; writes the gradient w.r.t. parameters() into `grad`.
  double loss_and_gradient(const Features& x, const Eigen::MatrixXd& targets, Eigen::VectorXd& grad) const;

  std::size_t num_parameters() const noexcept;
  /// Layer by layer: weight (row-major), then bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  Json to_json() const;
  static SoftmaxMlp from_json(const Json& doc);

 private:
  std::vector<DenseLayer> layers_;
};

/// Row-wise stable softmax of a logit matrix.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

struct SgdSettings {
  int epochs = 50;
  int batch_size = 64;
  double learning_rate = 0.1;
};

struct TrainTrace {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
};

/// Seeded minibatch gradient descent. Throws TrainingError when the loss turns non-finite.
TrainTrace train_sgd(SoftmaxMlp& net, const Features& x, const Eigen::MatrixXd& targets,
                     const SgdSettings& settings, std::uint64_t seed);

}  // namespace localboost
