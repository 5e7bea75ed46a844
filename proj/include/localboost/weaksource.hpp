#pragma once

#include "localboost/datamodel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace localboost {

/// Half-space labeling function over the synthetic feature space.
///
/// The LF emits `emitted_label` or abstains. It fires on an instance of its own class when the
/// projection onto `direction` exceeds `threshold`, and on an instance of any other class when the
/// projection exceeds `confusion_threshold`. Both thresholds are population quantiles chosen so
/// that the LF's coverage is `coverage` and its accuracy on matched instances is 1 - noise_rate.
struct SyntheticLF {
  std::vector<double> direction;  // unit norm
  double threshold = 0.0;
  double confusion_threshold = 0.0;
  int emitted_label = 1;
  double noise_rate = 0.0;
  double coverage = 1.0;

  /// Emitted label or 0.
  int apply(std::span<const double> x, int true_label) const;
};

struct LfSpec {
  int emitted_label = 1;
  double noise_rate = 0.25;  // in [0, 0.5)
  double coverage = 0.25;    // in (0, 1]
  std::optional<std::vector<double>> direction;
};

struct GeneratorConfig {
  int num_classes = 4;
  int dim = 16;
  int clusters_per_class = 4;
  /// Cluster means live in a random subspace of this dimension (0 = full dim).
  int latent_dim = 0;
  double cluster_spread = 2.0;  // std of cluster means
  double cluster_std = 1.0;     // within-cluster std
  /// Mixing weight of random jitter into each LF direction, relative to the class direction.
  double direction_jitter = 0.5;
  std::size_t n_weak = 8000;
  std::size_t n_valid = 1000;
  std::size_t n_test = 2000;
  std::vector<LfSpec> lfs;

  void validate() const;
};

/// p LFs with emitted labels cycling through 1..C.
std::vector<LfSpec> uniform_lf_specs(int num_lfs, int num_classes, double accuracy, double coverage);

struct SyntheticData {
  WeakLabeledSet train;  // D_l; clean_labels hold the hidden truth
  WeakLabeledSet valid;  // pool for D_c
  WeakLabeledSet test;
  std::vector<SyntheticLF> lfs;
};

/// Seeded Gaussian-mixture benchmark. Identical (config, seed) gives bit-identical output.
SyntheticData generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

struct SourceGrouping {
  std::vector<int> group_of;  // LF index -> group index
  int num_groups = 0;

  void validate(std::size_t num_lfs) const;
};

/// Validates an explicit LF -> group mapping (e.g. a manual CDR-style split).
SourceGrouping make_grouping(std::vector<int> group_of);

/// One group per emitted label, groups numbered by ascending label. Throws GroupingError if an LF
/// column emits two distinct labels or never fires.
SourceGrouping group_lfs_by_label(const WeakLabeledSet& weak);

enum class GroupVote { kMajority, kFirstMatch };

/// Collapses LF columns into group columns; keeps `aggregated` untouched.
WeakLabeledSet apply_grouping(const WeakLabeledSet& weak, const SourceGrouping& grouping,
                              GroupVote vote = GroupVote::kMajority);
LabelMatrix apply_grouping(const LabelMatrix& weak_labels, int num_classes, const SourceGrouping& grouping,
                           GroupVote vote = GroupVote::kMajority);

GroupVote parse_group_vote(const std::string& name);

}  // namespace localboost
