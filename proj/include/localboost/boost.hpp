#pragma once

#include "localboost/condfn.hpp"
#include "localboost/datamodel.hpp"
#include "localboost/dataset_io.hpp"
#include "localboost/learner.hpp"
#include "localboost/localize.hpp"
#include "localboost/weaksource.hpp"
#include "localboost/weighting.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace localboost {

enum class GateKind { kLearned, kUniform, kHardMatching };

std::string to_string(GateKind kind);

/// Source gate Q(l|x) used to modulate ensemble members.
class Gate {
 public:
  static Gate learned(std::shared_ptr<const CondFn> q);
  static Gate uniform(int num_sources);
  /// Indicator gate from each instance's own LF row.
  static Gate hard_matching(int num_sources);

  GateKind kind() const noexcept { return kind_; }
  int num_sources() const noexcept { return num_sources_; }
  const CondFn* cond_fn() const noexcept { return q_.get(); }
  std::shared_ptr<const CondFn> shared_cond_fn() const noexcept { return q_; }

  /// N x p. `lf_rows` is required (N x p) only by the hard-matching gate.
  Eigen::MatrixXd probabilities(const Features& x, const LabelMatrix& lf_rows = {}) const;

 private:
  Gate(GateKind kind, int p, std::shared_ptr<const CondFn> q) : kind_(kind), num_sources_(p), q_(std::move(q)) {}

  GateKind kind_ = GateKind::kUniform;
  int num_sources_ = 1;
  std::shared_ptr<const CondFn> q_;
};

struct Member {
  int t = 1;  // intra-source iteration, 1-based
  int l = 1;  // weak source, 1-based; 0 = fitted on every source, gate factor sum_l Q(l|x) = 1
  LearnerPtr learner;
};

struct EnsembleScores {
  Eigen::MatrixXd raw;         // sum_m alpha_m Q(l_m|x) f_m(x)
  Eigen::MatrixXd normalized;  // rows scaled to sum 1 (uniform when a row is all zero)
};

/// F(x) = sum over members of alpha * Q(l|x) * f(x).
class Ensemble {
 public:
  Ensemble(LabelSpace labels, Gate gate) : labels_(labels), gate_(std::move(gate)) {}

  const LabelSpace& label_space() const noexcept { return labels_; }
  const Gate& gate() const noexcept { return gate_; }
  const std::vector<Member>& members() const noexcept { return members_; }
  const WeightVector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return members_.size(); }

  /// Source map applied to raw LF rows before gating, when sources are LF groups.
  const std::optional<SourceGrouping>& grouping() const noexcept { return grouping_; }
  GroupVote group_vote() const noexcept { return group_vote_; }
  void set_grouping(std::optional<SourceGrouping> g, GroupVote vote) {
    grouping_ = std::move(g);
    group_vote_ = vote;
  }

  void add_member(Member m);
  /// Weights must be nonnegative and as many as members.
  void set_weights(WeightVector w);

  EnsembleScores scores(const Features& x, const LabelMatrix& lf_rows = {}) const;
  Labels predict(const Features& x, const LabelMatrix& lf_rows = {}) const;

  /// `gate_ref` names the file holding the learned gate, relative to the ensemble file.
  Json to_json(const std::string& gate_ref = "cond_fn.json") const;
  static Ensemble from_json(const Json& doc, const std::filesystem::path& base_dir);

 private:
  LabelSpace labels_;
  Gate gate_;
  std::vector<Member> members_;
  WeightVector weights_;
  std::optional<SourceGrouping> grouping_;
  GroupVote group_vote_ = GroupVote::kMajority;
};

inline constexpr int kEnsembleFormatVersion = 1;

/// Single-instance forms. `lf_row` is needed only for the hard-matching gate.
struct InstanceScores {
  Eigen::VectorXd raw;
  Eigen::VectorXd normalized;
};
InstanceScores ensemble_scores(const Ensemble& e, std::span<const double> x, std::span<const int> lf_row = {});
int ensemble_predict(const Ensemble& e, std::span<const double> x, std::span<const int> lf_row = {});

enum class Variant { kFull, kNoCondFn, kHardMatching, kWeakOnlyWeights, kIntegrated };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);
inline constexpr Variant kAllVariants[] = {Variant::kFull, Variant::kNoCondFn, Variant::kHardMatching,
                                          Variant::kWeakOnlyWeights, Variant::kIntegrated};

/// Rows eligible for the clusters of member (t, l).
enum class SourcePool {
  kAll,      // every trainable row of D_l
  kMatched,  // trainable rows matched by source l (all rows when source l matches none)
};
SourcePool parse_source_pool(const std::string& name);
std::string to_string(SourcePool p);

struct LocalizeSettings {
  std::size_t k = 5;
  double c1 = 4.0;
  std::size_t n_min = kDefaultMinCluster;
  std::size_t exact_threshold = kExactDistanceThreshold;
  ErrorUpdate error_update = ErrorUpdate::kSoft;
  SourcePool pool = SourcePool::kMatched;
};

struct WeightingSettings {
  std::size_t n_p = 16;
  double mu = 0.0;
  std::optional<double> sigma;  // default: 0.1 * |mean(v)| per round
  bool classic_update = false;  // update data weights from the newest learner instead of the ensemble
  /// Keep earlier weights on the alpha scale when the next estimate is appended (the selected
  /// simplex vector is rescaled by the positive mass of the vector it came from). Off: earlier
  /// weights enter the next round already normalized.
  bool carry_scale = true;
};

/// Gate applied to the init learner f_{1,1}.
enum class InitGate { kFirstSource, kAllSources };
InitGate parse_init_gate(const std::string& name);
std::string to_string(InitGate g);

struct BoostConfig {
  int T = 5;
  LocalizeSettings localize;
  WeightingSettings weighting;
  LearnerSettings learner;
  InitGate init_gate = InitGate::kAllSources;
};

struct RoundRecord {
  int t = 1;
  int l = 1;
  bool init = false;
  double clean_acc = 0.0;
  double clean_f1 = 0.0;
  std::size_t region_size = 0;
  std::optional<double> weighted_error;
  std::optional<double> alpha_est;
  double alpha_final = 0.0;
  std::vector<double> candidate_errors;
  std::size_t selected = 0;
  double selected_error = 0.0;
  double candidate0_error = 0.0;
  std::vector<std::size_t> anchors;
  std::vector<double> radii;
  std::vector<std::size_t> cluster_sizes;
  std::vector<bool> fallback;
  WeightVector weights;

  Json to_json() const;
};

struct BoostResult {
  Ensemble ensemble;
  std::vector<RoundRecord> rounds;
  bool converged = false;
  PairwiseDistance distance;
  std::size_t train_rows = 0;
};

/// Algorithm driver. `dl` needs aggregated labels; `gate` must cover dl.num_sources() sources.
/// The init learner fills slot (1,1); the loop then runs (1,2) .. (T,p).
BoostResult run_localboost(const WeakLabeledSet& dl, const CleanSet& dc, const Gate& gate, const BoostConfig& config,
                           std::uint64_t seed);

/// `learned_gate` is used by the variants that need it (full, weak_only_weights, integrated_mode).
BoostResult run_ablation(Variant variant, const WeakLabeledSet& dl, const CleanSet& dc, const Gate& learned_gate,
                         const BoostConfig& config, std::uint64_t seed);

struct Prop1Report {
  std::vector<double> alphas;
  std::vector<double> convex_losses;
  std::vector<double> gated_losses;
  double min_convex_loss = 0.0;
  /// Max gated loss over grid points with 0 < alpha < 1. At alpha = 0 or 1 one member has zero
  /// weight, the gated score on its point is the zero vector, and the zero margin counts as a loss.
  double gated_loss = 0.0;
  double seconds = 0.0;

  Json to_json() const;
};

/// Two points, two single-source LFs, two constant learners: convex combinations lose at least
/// one half everywhere on the grid, the indicator-gated ensemble loses nothing.
Prop1Report prop1_counterexample(std::size_t grid_points = 101);

}  // namespace localboost
