#pragma once

#include "localboost/datamodel.hpp"
#include "localboost/dataset_io.hpp"
#include "localboost/nn.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace localboost {

/// Feature -> normalized match-row pairs for training the conditional source function.
struct SourceIndexSet {
  Features features;
  Eigen::MatrixXd targets;        // rows on the p-simplex
  std::vector<std::size_t> rows;  // originating row of each pair

  std::size_t size() const noexcept { return rows.size(); }
};

/// Rows without any match carry no supervision and are dropped.
SourceIndexSet build_source_index(const MatchMatrix& match, const Features& features);

struct CondFnSettings {
  std::vector<int> hidden{64, 64};
  SgdSettings sgd{30, 64, 0.1};
};

/// Learned gate Q(l|x): a two-hidden-layer softmax network over the weak sources.
class CondFn {
 public:
  CondFn() = default;
  CondFn(SoftmaxMlp net, int epochs, std::uint64_t seed) : net_(std::move(net)), epochs_(epochs), seed_(seed) {}

  int num_sources() const noexcept { return net_.output_dim(); }
  int input_dim() const noexcept { return net_.input_dim(); }
  const SoftmaxMlp& network() const noexcept { return net_; }
  int epochs() const noexcept { return epochs_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Length-p simplex vector.
  Eigen::VectorXd eval(std::span<const double> x) const;
  /// N x p, one simplex row per instance.
  Eigen::MatrixXd eval(const Features& x) const;

  Json to_json() const;
  static CondFn from_json(const Json& doc);

 private:
  SoftmaxMlp net_;
  int epochs_ = 0;
  std::uint64_t seed_ = 0;
};

/// Untrained gate: Xavier hidden layers and a zero output layer.
CondFn untrained_cond_fn(int input_dim, int num_sources, const CondFnSettings& settings, std::uint64_t seed);

struct CondFnFit {
  CondFn model;
  TrainTrace trace;
};

CondFnFit train_cond_fn(const SourceIndexSet& ds, const CondFnSettings& settings, std::uint64_t seed);

inline Eigen::VectorXd q_eval(const CondFn& q, std::span<const double> x) { return q.eval(x); }

/// Normalized LF match vector; nonzero entries count as matches. An all-zero row maps to uniform.
Eigen::VectorXd hard_matching_q(std::span<const int> lf_row);

}  // namespace localboost
