#include "localboost/boost.hpp"
#include "localboost/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace localboost;
using lbtest::label_matrix;

namespace {

struct Problem {
  WeakLabeledSet dl;
  CleanSet dc;
  WeakLabeledSet test;
};

Problem make_problem(std::uint64_t seed, int p = 4) {
  auto data = generate_synthetic(lbtest::small_generator(600, p), seed);
  Problem pr;
  pr.dl = data.train;
  pr.dl.aggregated = majority_vote(pr.dl);
  std::vector<std::size_t> rows(100);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  pr.dc = to_clean_set(select_rows(data.valid, rows));
  pr.test = data.test;
  return pr;
}

BoostConfig small_config(int T = 2) {
  BoostConfig c;
  c.T = T;
  c.localize.k = 5;
  c.learner.sgd.epochs = 10;
  c.weighting.n_p = 8;
  return c;
}

Gate trained_gate(const WeakLabeledSet& dl, std::uint64_t seed) {
  CondFnSettings s;
  s.hidden = {16, 16};
  s.sgd.epochs = 5;
  const auto fit = train_cond_fn(build_source_index(build_match_matrix(dl), dl.features), s, seed);
  return Gate::learned(std::make_shared<CondFn>(fit.model));
}

std::shared_ptr<ConstantLearner> constant(std::initializer_list<double> s, int dim = 1) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  Eigen::Index i = 0;
  for (double x : s) v[i++] = x;
  return std::make_shared<ConstantLearner>(v, dim);
}

std::string rounds_dump(const BoostResult& r) {
  Json j = Json::array();
  for (const auto& rec : r.rounds) j.push_back(rec.to_json());
  return j.dump();
}

}  // namespace

TEST(Ensemble, SingleMemberSingleSourceIsLearnerScore) {
  Ensemble e(LabelSpace(3), Gate::uniform(1));
  e.add_member({1, 1, constant({0.2, 0.5, 0.3})});
  e.set_weights({1.0});
  const std::vector<double> x{4.0};
  const auto s = ensemble_scores(e, x);
  EXPECT_NEAR(s.raw[1], 0.5, 1e-15);
  EXPECT_NEAR(s.normalized[2], 0.3, 1e-15);
  EXPECT_EQ(ensemble_predict(e, x), 2);
}

TEST(Ensemble, IdenticalMembersNormalizeToLearner) {
  Ensemble e(LabelSpace(2), Gate::uniform(2));
  const auto f = constant({0.7, 0.3});
  e.add_member({1, 1, f});
  e.add_member({1, 2, f});
  e.set_weights({0.4, 0.6});
  const std::vector<double> x{0.0};
  const auto s = ensemble_scores(e, x);
  EXPECT_NEAR(s.normalized[0], 0.7, 1e-12);
  EXPECT_NEAR(s.normalized[1], 0.3, 1e-12);
}

TEST(Ensemble, ZeroGateMassSilencesMember) {
  Ensemble e(LabelSpace(2), Gate::hard_matching(2));
  e.add_member({1, 1, constant({1.0, 0.0})});
  e.add_member({1, 2, constant({0.0, 1.0})});
  e.set_weights({0.9, 0.1});
  const std::vector<double> x{0.0};
  const std::vector<int> only_second{0, 2};
  const auto s = ensemble_scores(e, x, only_second);
  EXPECT_EQ(s.raw[0], 0.0);
  EXPECT_EQ(ensemble_predict(e, x, only_second), 2);
}

TEST(Ensemble, AllSourceMemberIgnoresGate) {
  Ensemble e(LabelSpace(2), Gate::hard_matching(3));
  e.add_member({1, 0, constant({0.25, 0.75})});
  e.set_weights({2.0});
  const std::vector<double> x{0.0};
  const std::vector<int> none{0, 0, 0}, first{1, 0, 0};
  EXPECT_NEAR(ensemble_scores(e, x, none).raw[1], 1.5, 1e-15);
  EXPECT_NEAR(ensemble_scores(e, x, first).raw[1], 1.5, 1e-15);
}

TEST(Ensemble, UniformScoresPredictClassOne) {
  Ensemble e(LabelSpace(4), Gate::uniform(1));
  e.add_member({1, 1, constant({0.25, 0.25, 0.25, 0.25})});
  e.set_weights({1.0});
  const std::vector<double> x{1.0};
  EXPECT_EQ(ensemble_predict(e, x), 1);
}

TEST(Ensemble, RejectsInconsistentMembers) {
  Ensemble e(LabelSpace(2), Gate::uniform(2));
  EXPECT_THROW(e.add_member({1, 3, constant({0.5, 0.5})}), ValidationError);
  EXPECT_THROW(e.add_member({1, 1, constant({0.2, 0.3, 0.5})}), ValidationError);
  e.add_member({1, 1, constant({0.5, 0.5})});
  EXPECT_THROW(e.set_weights({-0.1}), ValidationError);
  EXPECT_THROW(e.set_weights({0.5, 0.5}), ValidationError);
  e.set_weights({1.0});
  EXPECT_THROW(e.scores(Features::Zero(1, 3)), ValidationError);
}

TEST(Ensemble, OneMemberMatchesLearnerPrediction) {
  const auto x = lbtest::random_features(50, 6, 3, 2.0);
  Ensemble e(LabelSpace(3), Gate::uniform(1));
  auto net = SoftmaxMlp::xavier({6, 3}, 4);
  auto p = net.parameters();
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::sin(static_cast<double>(i));
  net.set_parameters(p);
  auto f = std::make_shared<SoftmaxClassifier>(net);
  e.add_member({1, 1, f});
  e.set_weights({1.0});
  EXPECT_EQ(e.predict(x), f->predict_labels(x));
}

TEST(Ensemble, PredictionsInvariantUnderWeightScaling) {
  const auto pr = make_problem(2);
  const auto gate = trained_gate(pr.dl, 1);
  const auto r = run_localboost(pr.dl, pr.dc, gate, small_config(), 5);
  const auto base = r.ensemble.predict(pr.test.features, pr.test.weak_labels);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> k(0.01, 50.0);
  for (int trial = 0; trial < 10; ++trial) {
    Ensemble scaled = r.ensemble;
    auto w = scaled.weights();
    const double c = k(rng);
    for (double& v : w) v *= c;
    scaled.set_weights(w);
    EXPECT_EQ(scaled.predict(pr.test.features, pr.test.weak_labels), base);
  }
}

TEST(Ensemble, JsonRoundTripWithoutLearnedGate) {
  const auto pr = make_problem(3);
  const auto r = run_ablation(Variant::kNoCondFn, pr.dl, pr.dc, Gate::uniform(4), small_config(1), 2);
  const auto doc = r.ensemble.to_json();
  const auto back = Ensemble::from_json(doc, {});
  EXPECT_EQ(back.to_json(), doc);
  EXPECT_EQ(back.scores(pr.test.features).raw, r.ensemble.scores(pr.test.features).raw);
  auto bad = doc;
  bad["version"] = 99;
  EXPECT_THROW(Ensemble::from_json(bad, {}), ValidationError);
}

TEST(RunLocalBoost, FillsEverySlotOnce) {
  const auto pr = make_problem(4);
  const auto gate = trained_gate(pr.dl, 2);
  const auto r = run_localboost(pr.dl, pr.dc, gate, small_config(3), 11);
  ASSERT_FALSE(r.converged);
  ASSERT_EQ(r.ensemble.size(), 12u);
  ASSERT_EQ(r.rounds.size(), 12u);
  EXPECT_TRUE(r.rounds[0].init);
  std::size_t m = 1;
  for (int t = 1; t <= 3; ++t)
    for (int l = 1; l <= 4; ++l) {
      if (t == 1 && l == 1) continue;
      EXPECT_EQ(r.ensemble.members()[m].t, t);
      EXPECT_EQ(r.ensemble.members()[m].l, l);
      ++m;
    }
  double total = 0.0;
  for (double w : r.ensemble.weights()) {
    EXPECT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(RunLocalBoost, SingleSourceSingleRoundIsInitOnly) {
  const auto pr = make_problem(5, 1);
  const auto r = run_localboost(pr.dl, pr.dc, Gate::uniform(1), small_config(1), 1);
  EXPECT_EQ(r.ensemble.size(), 1u);
  EXPECT_EQ(r.rounds.size(), 1u);
}

TEST(RunLocalBoost, NeverDegradesOnCleanSet) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto pr = make_problem(10 + seed);
    const auto gate = trained_gate(pr.dl, seed);
    for (auto variant : kAllVariants) {
      const auto r = run_ablation(variant, pr.dl, pr.dc, gate, small_config(2), seed);
      for (const auto& rec : r.rounds) {
        ASSERT_LE(rec.selected_error, rec.candidate0_error) << to_string(variant) << " " << rec.t << "," << rec.l;
        ASSERT_EQ(rec.selected_error, rec.candidate_errors[rec.selected]);
      }
    }
  }
}

TEST(RunLocalBoost, Deterministic) {
  const auto pr = make_problem(6);
  const auto gate = trained_gate(pr.dl, 3);
  const auto a = run_localboost(pr.dl, pr.dc, gate, small_config(), 99);
  const auto b = run_localboost(pr.dl, pr.dc, gate, small_config(), 99);
  EXPECT_EQ(a.ensemble.to_json().dump(), b.ensemble.to_json().dump());
  EXPECT_EQ(rounds_dump(a), rounds_dump(b));
}

TEST(RunLocalBoost, SingleSourceNoCondFnMatchesFull) {
  const auto pr = make_problem(7, 1);
  const auto gate = trained_gate(pr.dl, 4);
  const auto full = run_ablation(Variant::kFull, pr.dl, pr.dc, gate, small_config(4), 8);
  const auto flat = run_ablation(Variant::kNoCondFn, pr.dl, pr.dc, gate, small_config(4), 8);
  EXPECT_EQ(full.ensemble.weights(), flat.ensemble.weights());
  EXPECT_EQ(rounds_dump(full), rounds_dump(flat));
}

TEST(RunLocalBoost, StopsWhenCleanErrorsVanish) {
  WeakLabeledSet dl = lbtest::weak_set(LabelMatrix::Zero(40, 1), 2, Features::Zero(40, 1));
  for (Eigen::Index i = 0; i < 40; ++i) {
    const int y = i % 2 ? 2 : 1;
    dl.features(i, 0) = (y == 1 ? -5.0 : 5.0) + 0.01 * static_cast<double>(i);
    dl.weak_labels(i, 0) = y;
  }
  dl.aggregated = majority_vote(dl);
  auto valid = dl;
  valid.clean_labels.clear();
  for (Eigen::Index i = 0; i < 40; ++i) valid.clean_labels.emplace_back(valid.weak_labels(i, 0));
  const auto dc = to_clean_set(valid);
  auto cfg = small_config(3);
  cfg.localize.error_update = ErrorUpdate::kHard;
  const auto r = run_localboost(dl, dc, Gate::uniform(1), cfg, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.ensemble.size(), 1u);
}

TEST(RunLocalBoost, RejectsBadInputs) {
  auto pr = make_problem(8);
  const auto gate = trained_gate(pr.dl, 5);
  auto cfg = small_config();
  cfg.T = 0;
  EXPECT_THROW(run_localboost(pr.dl, pr.dc, gate, cfg, 1), ValidationError);
  EXPECT_THROW(run_localboost(pr.dl, pr.dc, Gate::uniform(3), small_config(), 1), ValidationError);
  auto no_agg = pr.dl;
  no_agg.aggregated.reset();
  EXPECT_THROW(run_localboost(no_agg, pr.dc, gate, small_config(), 1), ValidationError);
}

TEST(Variants, ParseAndPrint) {
  for (auto v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("everything"), ConfigError);
  EXPECT_EQ(parse_init_gate(to_string(InitGate::kFirstSource)), InitGate::kFirstSource);
}

TEST(Prop1, ConvexLosesGatedWins) {
  const auto r = prop1_counterexample();
  ASSERT_EQ(r.alphas.size(), 101u);
  for (double l : r.convex_losses) EXPECT_GE(l, 0.5);
  EXPECT_GE(r.min_convex_loss, 0.5);
  EXPECT_EQ(r.gated_loss, 0.0);
  EXPECT_EQ(r.convex_losses[50], 1.0);
  for (std::size_t g = 1; g + 1 < r.alphas.size(); ++g) EXPECT_EQ(r.gated_losses[g], 0.0);
  EXPECT_LT(r.seconds, 1.0);
}
