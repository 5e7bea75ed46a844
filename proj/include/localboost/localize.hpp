#pragma once

#include "localboost/datamodel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace localboost {

enum class ErrorUpdate {
  kSoft,  // 1 - score on the gold class
  kHard,  // misclassification indicator of the argmax
};

ErrorUpdate parse_error_update(const std::string& name);

/// Accumulated per-clean-instance error of the running ensemble. Entries only grow.
class ErrorMatrix {
 public:
  explicit ErrorMatrix(std::size_t num_clean) : values_(num_clean, 0.0) {}

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool all_zero() const noexcept;

  /// scores: N_c x C normalized ensemble scores on D_c; gold in 1..C.
  void update(const Eigen::MatrixXd& scores, std::span<const int> gold, ErrorUpdate mode = ErrorUpdate::kSoft);

 private:
  std::vector<double> values_;
};

ErrorMatrix update_error_matrix(ErrorMatrix m, const Eigen::MatrixXd& scores, std::span<const int> gold,
                                ErrorUpdate mode = ErrorUpdate::kSoft);

/// Indices of the k largest entries in rank order; ties go to the smaller index.
std::vector<std::size_t> top_k_errors(const ErrorMatrix& m, std::size_t k);

struct PairwiseDistance {
  double value = 0.0;
  std::size_t pairs = 0;
  bool exact = true;
};

inline constexpr std::size_t kExactDistanceThreshold = 2000;

/// Mean Euclidean distance over unordered pairs. Exact up to `exact_threshold` rows, otherwise
/// estimated from exact_threshold^2 / 2 seeded uniform pairs.
PairwiseDistance avg_pairwise_distance(const Features& x, std::uint64_t seed,
                                       std::size_t exact_threshold = kExactDistanceThreshold);

double euclidean(std::span<const double> a, std::span<const double> b);

struct ClusterSample {
  std::vector<std::size_t> members;  // ascending
  bool fallback = false;             // true when filled by nearest neighbours
};

inline constexpr std::size_t kDefaultMinCluster = 32;

/// Rows of `pool` within `radius` of `anchor`; if none, the n_min nearest rows.
ClusterSample sample_cluster(std::span<const double> anchor, const Features& pool, double radius,
                             std::size_t n_min = kDefaultMinCluster);

struct LocalRegion {
  std::vector<std::size_t> members;  // deduplicated, ascending
  std::vector<std::size_t> anchors;  // clean-set indices
  std::vector<double> radii;
  std::vector<std::size_t> cluster_sizes;
  std::vector<bool> fallback;
};

/// Anchors are the top-k positive-error clean instances (zero-error entries are skipped);
/// radius_j = c1 * d / m[anchor_j]. Throws ValidationError when no entry is positive.
LocalRegion build_local_region(const ErrorMatrix& m, const Features& pool, const Features& clean,
                               std::size_t k, double c1, double d, std::size_t n_min = kDefaultMinCluster);

/// Scales every row to unit L2 norm; zero rows stay zero.
void normalize_rows(Features& x);

}  // namespace localboost
