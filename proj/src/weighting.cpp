#include "localboost/weighting.hpp"

#include "localboost/error.hpp"
#include "localboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace localboost {

DataWeights init_data_weights(std::size_t n) {
  if (n < 1) throw ValidationError("data weights need at least one instance");
  return DataWeights(n, 1.0 / static_cast<double>(n));
}

double weighted_error(std::span<const double> w, std::span<const int> preds, std::span<const int> labels) {
  if (w.size() != preds.size() || w.size() != labels.size()) throw ValidationError("weighted_error length mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (preds[i] != labels[i]) err += w[i];
  return err;
}

double estimate_alpha(double err) {
  if (std::isnan(err)) throw ValidationError("estimate_alpha: error is NaN");
  const double e = std::clamp(err, kErrorClamp, 1.0 - kErrorClamp);
  return std::log((1.0 - e) / e);
}

DataWeights update_data_weights(std::span<const double> w, double alpha, std::span<const int> preds,
                                std::span<const int> labels) {
  if (w.size() != preds.size() || w.size() != labels.size())
    throw ValidationError("update_data_weights length mismatch");
  const double factor = std::exp(alpha);
  DataWeights out(w.begin(), w.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (preds[i] != labels[i]) out[i] *= factor;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw std::logic_error("data weights collapsed");
  for (double& v : out) v /= total;
  return out;
}

WeightVector clip_normalize(std::span<const double> v) {
  WeightVector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? v[i] : 0.0;
    total += out[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (double& x : out) x /= total;
  return out;
}

double default_sigma(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return 0.1 * std::abs(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
}

std::vector<WeightVector> perturb_weights(std::span<const double> v, std::size_t n_p, double mu, double sigma,
                                          std::uint64_t seed) {
  if (v.empty()) throw ValidationError("cannot perturb an empty weight vector");
  if (n_p < 1) throw ValidationError("n_p must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(mu)) throw ValidationError("invalid perturbation parameters");
  std::vector<WeightVector> out;
  out.reserve(n_p + 1);
  out.push_back(clip_normalize(v));
  Rng rng(seed);
  std::normal_distribution<double> noise(mu, sigma);
  WeightVector draw(v.size());
  for (std::size_t c = 0; c < n_p; ++c) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPerturbRetries && !ok; ++attempt) {
      for (std::size_t i = 0; i < v.size(); ++i) draw[i] = v[i] + (sigma > 0.0 ? noise(rng) : mu);
      ok = std::any_of(draw.begin(), draw.end(), [](double x) { return x > 0.0; });
    }
    out.push_back(clip_normalize(draw));
  }
  return out;
}

Eigen::MatrixXd combine_scores(const MemberScores& member_scores, std::span<const double> weights) {
  if (member_scores.empty() || member_scores.size() != weights.size())
    throw ValidationError("member score count differs from weight count");
  Eigen::MatrixXd f = weights[0] * member_scores[0];
  for (std::size_t m = 1; m < member_scores.size(); ++m) f += weights[m] * member_scores[m];
  return f;
}

double clean_error(const Eigen::MatrixXd& scores, std::span<const int> gold) {
  if (static_cast<std::size_t>(scores.rows()) != gold.size()) throw ValidationError("clean_error shape mismatch");
  double err = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const int y = gold[static_cast<std::size_t>(i)] - 1;
    double best_other = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
      if (c != y) best_other = std::max(best_other, scores(i, c));
    err += std::exp(-(scores(i, y) - best_other));
  }
  return err;
}

double clean_error(const MemberScores& member_scores, std::span<const double> weights, std::span<const int> gold) {
  return clean_error(combine_scores(member_scores, weights), gold);
}

WeightSelection select_weights(std::span<const WeightVector> candidates, const MemberScores& member_scores,
                               std::span<const int> gold) {
  if (candidates.empty()) throw ValidationError("no weight candidates");
  WeightSelection sel;
  sel.errors.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    sel.errors.push_back(clean_error(member_scores, candidates[c], gold));
    if (sel.errors[c] < sel.errors[sel.index]) sel.index = c;
  }
  sel.weights = candidates[sel.index];
  return sel;
}

WeightSelection select_share_on_clean(std::span<const double> previous, const MemberScores& member_scores,
                                      std::span<const int> gold, std::size_t grid_points) {
  if (grid_points < 2) throw ValidationError("share grid needs at least 2 points");
  if (member_scores.size() != previous.size() + 1) throw ValidationError("member count must be previous + 1");
  std::vector<WeightVector> grid;
  grid.reserve(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double s = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    WeightVector w;
    w.reserve(previous.size() + 1);
    for (double p : previous) w.push_back((1.0 - s) * p);
    w.push_back(s);
    grid.push_back(clip_normalize(w));
  }
  return select_weights(grid, member_scores, gold);
}

}  // namespace localboost
