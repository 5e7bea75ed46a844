#include "localboost/datamodel.hpp"

#include "localboost/error.hpp"

#include <cmath>
#include <numeric>

namespace localboost {

LabelSpace::LabelSpace(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 2) throw ValidationError("label space needs at least 2 classes");
}

namespace {

void check_features(const Features& x, const char* what) {
  if (!x.allFinite()) throw ValidationError(std::string(what) + ": non-finite feature value");
}

void check_weak_matrix(const LabelMatrix& m, const LabelSpace& ls, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!ls.is_weak_label(m(i, j)))
        throw ValidationError(std::string(what) + ": weak label " + std::to_string(m(i, j)) +
                              " outside 0.." + std::to_string(ls.num_classes()));
}

std::span<const int> row_span(const LabelMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

void WeakLabeledSet::validate() const {
  const auto n = features.rows();
  if (weak_labels.rows() != n) throw ValidationError("weak-label row count differs from instance count");
  if (weak_labels.cols() < 1) throw ValidationError("weak-label matrix needs at least one source");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != n)
    throw ValidationError("id count differs from instance count");
  if (!clean_labels.empty() && static_cast<Eigen::Index>(clean_labels.size()) != n)
    throw ValidationError("clean-label count differs from instance count");
  if (!lf_names.empty() && static_cast<Eigen::Index>(lf_names.size()) != weak_labels.cols())
    throw ValidationError("lf_names length differs from source count");
  check_features(features, "weak set");
  check_weak_matrix(weak_labels, label_space, "weak set");
  for (const auto& y : clean_labels)
    if (y && !label_space.is_label(*y)) throw ValidationError("clean label outside 1..C");
  if (aggregated) {
    if (static_cast<Eigen::Index>(aggregated->size()) != n)
      throw ValidationError("aggregated label count differs from instance count");
    for (Eigen::Index i = 0; i < n; ++i) {
      const int y = (*aggregated)[static_cast<std::size_t>(i)];
      if (!label_space.is_weak_label(y)) throw ValidationError("aggregated label outside 0..C");
      if (y == LabelSpace::kAbstain && (weak_labels.row(i).array() != 0).any())
        throw ValidationError("aggregated abstain on a matched row");
    }
  }
}

void CleanSet::validate() const {
  const auto n = static_cast<Eigen::Index>(gold.size());
  if (n < 1) throw ValidationError("clean set is empty");
  if (features.rows() != n) throw ValidationError("clean set feature rows differ from label count");
  if (weak_labels.size() > 0 && weak_labels.rows() != n)
    throw ValidationError("clean set weak-label rows differ from label count");
  check_features(features, "clean set");
  for (int y : gold)
    if (!label_space.is_label(y)) throw ValidationError("clean label outside 1..C");
  check_weak_matrix(weak_labels, label_space, "clean set");
}

MatchMatrix build_match_matrix(const LabelMatrix& weak_labels) {
  return MatchMatrix{(weak_labels.array() != LabelSpace::kAbstain).cast<int>().matrix()};
}

MatchMatrix build_match_matrix(const WeakLabeledSet& weak) {
  weak.validate();
  return build_match_matrix(weak.weak_labels);
}

int majority_vote_row(std::span<const int> row, int num_classes) {
  std::vector<int> counts(static_cast<std::size_t>(num_classes) + 1, 0);
  for (int y : row)
    if (y > 0 && y <= num_classes) ++counts[static_cast<std::size_t>(y)];
  int best = LabelSpace::kAbstain;
  int best_count = 0;
  for (int c = 1; c <= num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] > best_count) {
      best = c;
      best_count = counts[static_cast<std::size_t>(c)];
    }
  }
  return best;
}

int weighted_vote_row(std::span<const int> row, std::span<const double> class_prior) {
  const int num_classes = static_cast<int>(class_prior.size());
  std::vector<int> counts(class_prior.size() + 1, 0);
  bool any = false;
  for (int y : row) {
    if (y > 0 && y <= num_classes) {
      ++counts[static_cast<std::size_t>(y)];
      any = true;
    }
  }
  if (!any) return LabelSpace::kAbstain;
  int best = LabelSpace::kAbstain;
  double best_score = -1.0;
  for (int c = 1; c <= num_classes; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    if (counts[idx] == 0) continue;
    const double score = counts[idx] * class_prior[idx - 1];
    if (score > best_score) {
      best = c;
      best_score = score;
    }
  }
  return best;
}

Labels majority_vote(const WeakLabeledSet& weak) {
  Labels out(weak.size());
  const int c = weak.label_space.num_classes();
  for (Eigen::Index i = 0; i < weak.weak_labels.rows(); ++i)
    out[static_cast<std::size_t>(i)] = majority_vote_row(row_span(weak.weak_labels, i), c);
  return out;
}

Labels weighted_vote(const WeakLabeledSet& weak, std::span<const double> class_prior) {
  if (static_cast<int>(class_prior.size()) != weak.label_space.num_classes())
    throw ValidationError("class prior length differs from number of classes");
  double total = 0.0;
  for (double v : class_prior) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("class prior entries must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("class prior must sum to 1");
  Labels out(weak.size());
  for (Eigen::Index i = 0; i < weak.weak_labels.rows(); ++i)
    out[static_cast<std::size_t>(i)] = weighted_vote_row(row_span(weak.weak_labels, i), class_prior);
  return out;
}

std::vector<std::size_t> trainable_rows(const WeakLabeledSet& weak) {
  if (!weak.aggregated) throw ValidationError("weak set has no aggregated labels");
  std::vector<std::size_t> rows;
  rows.reserve(weak.size());
  for (std::size_t i = 0; i < weak.aggregated->size(); ++i)
    if ((*weak.aggregated)[i] != LabelSpace::kAbstain) rows.push_back(i);
  return rows;
}

CleanSet to_clean_set(const WeakLabeledSet& split) {
  CleanSet out;
  out.label_space = split.label_space;
  out.ids = split.ids;
  out.features = split.features;
  out.weak_labels = split.weak_labels;
  if (split.clean_labels.size() != split.size()) throw ValidationError("split has no clean labels");
  out.gold.reserve(split.size());
  for (const auto& y : split.clean_labels) {
    if (!y) throw ValidationError("split has instances without a clean label");
    out.gold.push_back(*y);
  }
  out.validate();
  return out;
}

WeakLabeledSet select_rows(const WeakLabeledSet& split, std::span<const std::size_t> rows) {
  WeakLabeledSet out;
  out.label_space = split.label_space;
  out.lf_names = split.lf_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), split.features.cols());
  out.weak_labels.resize(static_cast<Eigen::Index>(rows.size()), split.weak_labels.cols());
  if (split.aggregated) out.aggregated.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = rows[r];
    if (i >= split.size()) throw ValidationError("row index out of range");
    const auto ri = static_cast<Eigen::Index>(r);
    out.features.row(ri) = split.features.row(static_cast<Eigen::Index>(i));
    out.weak_labels.row(ri) = split.weak_labels.row(static_cast<Eigen::Index>(i));
    if (!split.ids.empty()) out.ids.push_back(split.ids[i]);
    if (!split.clean_labels.empty()) out.clean_labels.push_back(split.clean_labels[i]);
    if (split.aggregated) out.aggregated->push_back((*split.aggregated)[i]);
  }
  return out;
}

}  // namespace localboost
