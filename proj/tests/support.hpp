#pragma once

#include "localboost/datamodel.hpp"
#include "localboost/weaksource.hpp"

#include <random>
#include <string>
#include <vector>

namespace lbtest {

using namespace localboost;

inline LabelMatrix label_matrix(std::initializer_list<std::initializer_list<int>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.begin()->size());
  LabelMatrix m(n, p);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (int v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline WeakLabeledSet weak_set(const LabelMatrix& lf, int num_classes, const Features& x) {
  WeakLabeledSet w;
  w.label_space = LabelSpace(num_classes);
  w.features = x;
  w.weak_labels = lf;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    w.ids.push_back("r" + std::to_string(i));
    w.clean_labels.emplace_back(std::nullopt);
  }
  for (Eigen::Index j = 0; j < lf.cols(); ++j) w.lf_names.push_back("lf" + std::to_string(j));
  return w;
}

inline WeakLabeledSet weak_set(const LabelMatrix& lf, int num_classes) {
  return weak_set(lf, num_classes, Features::Zero(lf.rows(), 2));
}

inline Features random_features(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Features x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

inline LabelMatrix random_weak_labels(Eigen::Index n, Eigen::Index p, int num_classes, double abstain,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> lab(1, num_classes);
  LabelMatrix m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = u(rng) < abstain ? 0 : lab(rng);
  return m;
}

// Small but non-trivial benchmark for end-to-end tests.
inline GeneratorConfig small_generator(std::size_t n_weak = 600, int p = 4) {
  GeneratorConfig g;
  g.num_classes = 3;
  g.dim = 6;
  g.clusters_per_class = 2;
  g.n_weak = n_weak;
  g.n_valid = 200;
  g.n_test = 200;
  g.lfs = uniform_lf_specs(p, g.num_classes, 0.8, 0.35);
  return g;
}

}  // namespace lbtest
