#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace localboost {

using Features = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<int>;

/// Labels are 1..C; 0 is the abstain sentinel.
class LabelSpace {
 public:
  static constexpr int kAbstain = 0;

  LabelSpace() = default;
  explicit LabelSpace(int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  bool is_label(int y) const noexcept { return y >= 1 && y <= num_classes_; }
  bool is_weak_label(int y) const noexcept { return y == kAbstain || is_label(y); }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  int num_classes_ = 2;
};

/// Large weakly labeled set D_l. Also the in-memory form of a dataset file: valid and test
/// splits are read into this shape first and carry their LF rows for hard-matching gates.
struct WeakLabeledSet {
  LabelSpace label_space;
  std::vector<std::string> ids;
  Features features;                              // N x D
  LabelMatrix weak_labels;                        // N x p, entries 0..C
  std::vector<std::optional<int>> clean_labels;   // gold when known; never used for training
  std::vector<std::string> lf_names;              // length p
  std::optional<Labels> aggregated;               // output of a voting strategy

  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
  std::size_t num_sources() const noexcept { return static_cast<std::size_t>(weak_labels.cols()); }

  /// Throws ValidationError on any structural or range violation.
  void validate() const;
};

/// Small clean set D_c. weak_labels may have zero columns when LF rows are unavailable.
struct CleanSet {
  LabelSpace label_space;
  std::vector<std::string> ids;
  Features features;
  Labels gold;
  LabelMatrix weak_labels;

  std::size_t size() const noexcept { return gold.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

  void validate() const;
};

struct MatchMatrix {
  LabelMatrix entries;  // N x p, binary

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries.cols()); }
};

MatchMatrix build_match_matrix(const LabelMatrix& weak_labels);
MatchMatrix build_match_matrix(const WeakLabeledSet& weak);

/// Most frequent non-abstain label in a row; 0 for an all-abstain row; ties to the smallest label.
int majority_vote_row(std::span<const int> row, int num_classes);
int weighted_vote_row(std::span<const int> row, std::span<const double> class_prior);

Labels majority_vote(const WeakLabeledSet& weak);
/// class_prior must lie on the simplex (tolerance 1e-6).
Labels weighted_vote(const WeakLabeledSet& weak, std::span<const double> class_prior);

/// Row indices whose aggregated label is non-abstain. Requires `aggregated`.
std::vector<std::size_t> trainable_rows(const WeakLabeledSet& weak);

/// Converts a dataset split with complete gold labels into a clean set.
CleanSet to_clean_set(const WeakLabeledSet& split);

/// Rows of `split` selected by `rows`, in the given order.
WeakLabeledSet select_rows(const WeakLabeledSet& split, std::span<const std::size_t> rows);

}  // namespace localboost
