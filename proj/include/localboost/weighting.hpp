#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace localboost {

using DataWeights = std::vector<double>;
using WeightVector = std::vector<double>;

DataWeights init_data_weights(std::size_t n);

/// Sum of w over rows where preds differ from labels.
double weighted_error(std::span<const double> w, std::span<const int> preds, std::span<const int> labels);

inline constexpr double kErrorClamp = 1e-6;

/// log((1 - err) / err) with err clamped to [1e-6, 1 - 1e-6]. May be negative.
double estimate_alpha(double err);

/// w_i * exp(alpha * [preds_i != labels_i]), renormalized to sum 1.
DataWeights update_data_weights(std::span<const double> w, double alpha, std::span<const int> preds,
                                std::span<const int> labels);

/// Negatives clipped to zero, then scaled to sum 1; an all-zero result becomes uniform.
WeightVector clip_normalize(std::span<const double> v);

/// 0.1 * |mean(v)|.
double default_sigma(std::span<const double> v);

inline constexpr int kMaxPerturbRetries = 16;

/// n_p + 1 candidates: candidate 0 is clip_normalize(v), the rest are clip_normalize(v + noise)
/// with noise ~ N(mu, sigma^2) entrywise. Collapsed candidates are redrawn, then replaced by uniform.
std::vector<WeightVector> perturb_weights(std::span<const double> v, std::size_t n_p, double mu, double sigma,
                                          std::uint64_t seed);

/// Per-member gated scores on the clean set: member_scores[m](i, c) = Q(l_m | x_i) * f_m(x_i)_c.
using MemberScores = std::vector<Eigen::MatrixXd>;

/// sum_m weights[m] * member_scores[m].
Eigen::MatrixXd combine_scores(const MemberScores& member_scores, std::span<const double> weights);

/// sum_i exp(-(F_gold(x_i) - max_{j != gold} F_j(x_i))).
double clean_error(const Eigen::MatrixXd& ensemble_scores, std::span<const int> gold);
double clean_error(const MemberScores& member_scores, std::span<const double> weights, std::span<const int> gold);

struct WeightSelection {
  std::size_t index = 0;
  WeightVector weights;
  std::vector<double> errors;  // clean error per candidate
};

/// Candidate with minimal clean error; ties go to the lowest index.
WeightSelection select_weights(std::span<const WeightVector> candidates, const MemberScores& member_scores,
                               std::span<const int> gold);

/// Newest member's share s on an evenly spaced grid over [0, 1]; earlier weights are scaled by
/// (1 - s). Returns the grid point with minimal clean error (ties to the smaller share).
WeightSelection select_share_on_clean(std::span<const double> previous, const MemberScores& member_scores,
                                      std::span<const int> gold, std::size_t grid_points = 101);

}  // namespace localboost
