#include "localboost/localize.hpp"

#include "localboost/error.hpp"
#include "localboost/learner.hpp"
#include "localboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace localboost {

ErrorUpdate parse_error_update(const std::string& name) {
  if (name == "soft") return ErrorUpdate::kSoft;
  if (name == "hard") return ErrorUpdate::kHard;
  throw ConfigError("unknown error update '" + name + "'");
}

bool ErrorMatrix::all_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

void ErrorMatrix::update(const Eigen::MatrixXd& scores, std::span<const int> gold, ErrorUpdate mode) {
  if (static_cast<std::size_t>(scores.rows()) != values_.size() || gold.size() != values_.size())
    throw ValidationError("error-matrix update shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const int y = gold[i];
    if (y < 1 || y > scores.cols()) throw ValidationError("gold label outside 1..C");
    const auto ri = static_cast<Eigen::Index>(i);
    double inc = 0.0;
    if (mode == ErrorUpdate::kSoft)
      inc = std::clamp(1.0 - scores(ri, y - 1), 0.0, 1.0);
    else
      inc = argmax_label(scores.row(ri)) == y ? 0.0 : 1.0;
    values_[i] += inc;
  }
}

ErrorMatrix update_error_matrix(ErrorMatrix m, const Eigen::MatrixXd& scores, std::span<const int> gold,
                                ErrorUpdate mode) {
  m.update(scores, gold, mode);
  return m;
}

namespace {

std::vector<std::size_t> ranked(const ErrorMatrix& m) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
  return idx;
}

std::span<const double> row_of(const Features& x, Eigen::Index i) {
  return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

}  // namespace

std::vector<std::size_t> top_k_errors(const ErrorMatrix& m, std::size_t k) {
  if (k < 1 || k > m.size()) throw ValidationError("k must lie in 1..N_c");
  auto idx = ranked(m);
  idx.resize(k);
  return idx;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

PairwiseDistance avg_pairwise_distance(const Features& x, std::uint64_t seed, std::size_t exact_threshold) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw ValidationError("average distance needs at least 2 instances");
  PairwiseDistance out;
  double total = 0.0;
  if (n <= exact_threshold) {
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        total += euclidean(row_of(x, static_cast<Eigen::Index>(p)), row_of(x, static_cast<Eigen::Index>(q)));
    out.pairs = n * (n - 1) / 2;
    out.exact = true;
  } else {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::uniform_int_distribution<std::size_t> second(0, n - 2);
    out.pairs = exact_threshold * exact_threshold / 2;
    for (std::size_t s = 0; s < out.pairs; ++s) {
      const std::size_t p = first(rng);
      std::size_t q = second(rng);
      if (q >= p) ++q;
      total += euclidean(row_of(x, static_cast<Eigen::Index>(p)), row_of(x, static_cast<Eigen::Index>(q)));
    }
    out.exact = false;
  }
  out.value = total / static_cast<double>(out.pairs);
  return out;
}

ClusterSample sample_cluster(std::span<const double> anchor, const Features& pool, double radius, std::size_t n_min) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("cluster radius must be positive and finite");
  if (static_cast<Eigen::Index>(anchor.size()) != pool.cols()) throw ValidationError("anchor dimension mismatch");
  const auto n = static_cast<std::size_t>(pool.rows());
  ClusterSample out;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = euclidean(anchor, row_of(pool, static_cast<Eigen::Index>(i)));
    if (dist[i] <= radius) out.members.push_back(i);
  }
  if (out.members.empty() && n > 0) {
    const std::size_t take = std::min(std::max<std::size_t>(n_min, 1), n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    out.members = std::move(idx);
    out.fallback = true;
  }
  return out;
}

LocalRegion build_local_region(const ErrorMatrix& m, const Features& pool, const Features& clean,
                               std::size_t k, double c1, double d, std::size_t n_min) {
  if (!(d > 0.0) || !(c1 > 0.0)) throw ValidationError("c1 and d must be positive");
  if (k < 1 || k > m.size()) throw ValidationError("k must lie in 1..N_c");
  if (static_cast<std::size_t>(clean.rows()) != m.size()) throw ValidationError("clean rows differ from error matrix");
  if (pool.rows() == 0) throw ValidationError("empty weak pool");

  LocalRegion region;
  for (std::size_t j : ranked(m)) {
    if (region.anchors.size() == k || !(m[j] > 0.0)) break;
    const double radius = c1 * d / m[j];
    auto cluster = sample_cluster(row_of(clean, static_cast<Eigen::Index>(j)), pool, radius, n_min);
    region.anchors.push_back(j);
    region.radii.push_back(radius);
    region.cluster_sizes.push_back(cluster.members.size());
    region.fallback.push_back(cluster.fallback);
    region.members.insert(region.members.end(), cluster.members.begin(), cluster.members.end());
  }
  if (region.anchors.empty()) throw ValidationError("no clean instance has positive accumulated error");
  std::sort(region.members.begin(), region.members.end());
  region.members.erase(std::unique(region.members.begin(), region.members.end()), region.members.end());
  return region;
}

void normalize_rows(Features& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (n > 0.0) x.row(i) /= n;
  }
}

}  // namespace localboost
