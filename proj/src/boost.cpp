#include "localboost/boost.hpp"

#include "localboost/error.hpp"
#include "localboost/metrics.hpp"
#include "localboost/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace localboost {

InitGate parse_init_gate(const std::string& name) {
  if (name == "first_source") return InitGate::kFirstSource;
  if (name == "all_sources") return InitGate::kAllSources;
  throw ConfigError("unknown init gate '" + name + "'");
}

std::string to_string(InitGate g) { return g == InitGate::kAllSources ? "all_sources" : "first_source"; }

SourcePool parse_source_pool(const std::string& name) {
  if (name == "all") return SourcePool::kAll;
  if (name == "matched") return SourcePool::kMatched;
  throw ConfigError("unknown source pool '" + name + "'");
}

std::string to_string(SourcePool p) { return p == SourcePool::kAll ? "all" : "matched"; }

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::kLearned: return "learned";
    case GateKind::kUniform: return "uniform";
    case GateKind::kHardMatching: return "hard_matching";
  }
  return "unknown";
}

Gate Gate::learned(std::shared_ptr<const CondFn> q) {
  if (!q) throw ValidationError("learned gate needs a conditional function");
  const int p = q->num_sources();
  return Gate(GateKind::kLearned, p, std::move(q));
}

Gate Gate::uniform(int num_sources) {
  if (num_sources < 1) throw ValidationError("gate needs at least one source");
  return Gate(GateKind::kUniform, num_sources, nullptr);
}

Gate Gate::hard_matching(int num_sources) {
  if (num_sources < 1) throw ValidationError("gate needs at least one source");
  return Gate(GateKind::kHardMatching, num_sources, nullptr);
}

Eigen::MatrixXd Gate::probabilities(const Features& x, const LabelMatrix& lf_rows) const {
  switch (kind_) {
    case GateKind::kLearned:
      return q_->eval(x);
    case GateKind::kUniform:
      return Eigen::MatrixXd::Constant(x.rows(), num_sources_, 1.0 / num_sources_);
    case GateKind::kHardMatching: {
      if (lf_rows.rows() != x.rows() || lf_rows.cols() != num_sources_)
        throw ValidationError("hard-matching gate needs an N x p LF row matrix");
      Eigen::MatrixXd g(x.rows(), num_sources_);
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        g.row(i) = hard_matching_q({lf_rows.data() + i * lf_rows.cols(), static_cast<std::size_t>(num_sources_)}).transpose();
      return g;
    }
  }
  throw std::logic_error("unhandled gate kind");
}

void Ensemble::add_member(Member m) {
  if (!m.learner) throw ValidationError("member has no learner");
  if (m.learner->num_classes() != labels_.num_classes()) throw ValidationError("member class count differs");
  if (m.l < 0 || m.l > gate_.num_sources()) throw ValidationError("member source index outside 0..p");
  if (!members_.empty() && m.learner->input_dim() != members_.front().learner->input_dim())
    throw ValidationError("member input dimension differs");
  members_.push_back(std::move(m));
}

void Ensemble::set_weights(WeightVector w) {
  if (w.size() != members_.size()) throw ValidationError("weight count differs from member count");
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("ensemble weights must be finite and >= 0");
  weights_ = std::move(w);
}

namespace {

Eigen::MatrixXd normalize_score_rows(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd out = raw;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s > 0.0)
      out.row(i) /= s;
    else
      out.row(i).setConstant(1.0 / static_cast<double>(out.cols()));
  }
  return out;
}

// Source 0 marks a member fitted on every source; its gate factor is sum_l Q(l|x) = 1.
Eigen::MatrixXd gated(const Eigen::MatrixXd& gate_probs, int source, const Eigen::MatrixXd& learner_scores) {
  if (source == 0) return learner_scores;
  return gate_probs.col(source - 1).asDiagonal() * learner_scores;
}

Labels argmax_rows(const Eigen::MatrixXd& s) {
  Labels out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_label(s.row(i));
  return out;
}

}  // namespace

EnsembleScores Ensemble::scores(const Features& x, const LabelMatrix& lf_rows) const {
  if (members_.empty()) throw ValidationError("ensemble has no members");
  if (weights_.size() != members_.size()) throw ValidationError("ensemble weights not set");
  if (x.cols() != members_.front().learner->input_dim()) throw ValidationError("feature dimension differs from ensemble");
  const Eigen::MatrixXd g = gate_.probabilities(x, lf_rows);
  EnsembleScores out;
  out.raw = Eigen::MatrixXd::Zero(x.rows(), labels_.num_classes());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    if (weights_[m] == 0.0) continue;
    out.raw += weights_[m] * gated(g, members_[m].l, members_[m].learner->predict_scores(x));
  }
  out.normalized = normalize_score_rows(out.raw);
  return out;
}

Labels Ensemble::predict(const Features& x, const LabelMatrix& lf_rows) const {
  return argmax_rows(scores(x, lf_rows).raw);
}

Json Ensemble::to_json(const std::string& gate_ref) const {
  Json doc;
  doc["format"] = "localboost.ensemble";
  doc["version"] = kEnsembleFormatVersion;
  doc["label_space"] = labels_.num_classes();
  doc["num_sources"] = gate_.num_sources();
  doc["input_dim"] = members_.empty() ? 0 : members_.front().learner->input_dim();
  Json gate{{"type", to_string(gate_.kind())}};
  if (gate_.kind() == GateKind::kLearned) gate["path"] = gate_ref;
  doc["gate"] = gate;
  if (grouping_)
    doc["grouping"] = {{"group_of", grouping_->group_of},
                       {"num_groups", grouping_->num_groups},
                       {"vote", group_vote_ == GroupVote::kMajority ? "majority" : "first_match"}};
  else
    doc["grouping"] = nullptr;
  Json members = Json::array();
  for (const auto& m : members_) members.push_back({{"t", m.t}, {"l", m.l}, {"learner", m.learner->to_json()}});
  doc["members"] = std::move(members);
  doc["weights"] = weights_;
  return doc;
}

Ensemble Ensemble::from_json(const Json& doc, const std::filesystem::path& base_dir) {
  try {
    if (doc.value("format", std::string()) != "localboost.ensemble")
      throw ValidationError("not a localboost ensemble document");
    if (doc.at("version").get<int>() != kEnsembleFormatVersion)
      throw ValidationError("unsupported ensemble version " + doc.at("version").dump());
    const int p = doc.at("num_sources").get<int>();
    const auto type = doc.at("gate").at("type").get<std::string>();
    std::optional<Gate> gate;
    if (type == "learned") {
      const auto path = base_dir / doc.at("gate").at("path").get<std::string>();
      auto q = std::make_shared<CondFn>(CondFn::from_json(read_json_file(path)));
      if (q->num_sources() != p) throw ValidationError("gate source count differs from ensemble");
      gate = Gate::learned(std::move(q));
    } else if (type == "uniform") {
      gate = Gate::uniform(p);
    } else if (type == "hard_matching") {
      gate = Gate::hard_matching(p);
    } else {
      throw ValidationError("unknown gate type '" + type + "'");
    }
    Ensemble e(LabelSpace(doc.at("label_space").get<int>()), *gate);
    if (doc.contains("grouping") && !doc.at("grouping").is_null()) {
      const auto& g = doc.at("grouping");
      e.set_grouping(make_grouping(g.at("group_of").get<std::vector<int>>()),
                     parse_group_vote(g.value("vote", std::string("majority"))));
    }
    for (const auto& m : doc.at("members"))
      e.add_member({m.at("t").get<int>(), m.at("l").get<int>(), learner_from_json(m.at("learner"))});
    e.set_weights(doc.at("weights").get<WeightVector>());
    return e;
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("malformed ensemble document: ") + ex.what());
  }
}

InstanceScores ensemble_scores(const Ensemble& e, std::span<const double> x, std::span<const int> lf_row) {
  Features row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  LabelMatrix lf;
  if (!lf_row.empty())
    lf = Eigen::Map<const Eigen::Matrix<int, 1, Eigen::Dynamic>>(lf_row.data(), static_cast<Eigen::Index>(lf_row.size()));
  const auto s = e.scores(row, lf);
  return {s.raw.row(0).transpose(), s.normalized.row(0).transpose()};
}

int ensemble_predict(const Ensemble& e, std::span<const double> x, std::span<const int> lf_row) {
  return argmax_label(ensemble_scores(e, x, lf_row).raw.transpose());
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "no_cond_fn") return Variant::kNoCondFn;
  if (name == "hard_matching") return Variant::kHardMatching;
  if (name == "weak_only_weights") return Variant::kWeakOnlyWeights;
  if (name == "integrated_mode") return Variant::kIntegrated;
  throw ConfigError("unknown variant '" + name + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoCondFn: return "no_cond_fn";
    case Variant::kHardMatching: return "hard_matching";
    case Variant::kWeakOnlyWeights: return "weak_only_weights";
    case Variant::kIntegrated: return "integrated_mode";
  }
  return "unknown";
}

Json RoundRecord::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"t", t},
          {"l", l},
          {"init", init},
          {"clean_acc", clean_acc},
          {"clean_f1", clean_f1},
          {"region_size", region_size},
          {"weighted_error", opt(weighted_error)},
          {"alpha_est", opt(alpha_est)},
          {"alpha_final", alpha_final},
          {"candidate_errors", candidate_errors},
          {"selected", selected},
          {"selected_error", selected_error},
          {"candidate0_error", candidate0_error},
          {"anchors", anchors},
          {"radii", radii},
          {"cluster_sizes", cluster_sizes},
          {"fallback", fallback},
          {"weights", weights}};
}

namespace {

Features rows_of(const Features& x, std::span<const std::size_t> rows) {
  Features out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

LabelMatrix rows_of(const LabelMatrix& x, std::span<const std::size_t> rows) {
  LabelMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void record_clean_metrics(RoundRecord& rec, const Eigen::MatrixXd& clean_raw, const CleanSet& dc) {
  const Labels preds = argmax_rows(clean_raw);
  const auto m = compute_metrics(preds, dc.gold, dc.label_space);
  rec.clean_acc = m.accuracy;
  rec.clean_f1 = m.macro_f1;
}

BoostResult run_core(Variant variant, const WeakLabeledSet& dl, const CleanSet& dc, const Gate& gate,
                     const BoostConfig& cfg, std::uint64_t seed) {
  dl.validate();
  dc.validate();
  if (!dl.aggregated) throw ValidationError("weak set has no aggregated labels");
  if (cfg.T < 1) throw ValidationError("T must be >= 1");
  if (dl.label_space != dc.label_space) throw ValidationError("weak and clean label spaces differ");
  if (dl.dim() != dc.dim()) throw ValidationError("weak and clean feature dimensions differ");
  const int p = static_cast<int>(dl.num_sources());
  if (gate.num_sources() != p) throw ValidationError("gate source count differs from weak sources");
  const int num_classes = dl.label_space.num_classes();

  const auto train = trainable_rows(dl);
  if (train.empty()) throw ValidationError("every weak row abstains after aggregation");
  const Features pool = rows_of(dl.features, train);
  const LabelMatrix pool_lf = rows_of(dl.weak_labels, train);
  Labels pool_labels;
  pool_labels.reserve(train.size());
  for (auto i : train) pool_labels.push_back((*dl.aggregated)[i]);

  BoostResult result{Ensemble(dl.label_space, gate), {}, false, {}, train.size()};
  result.distance = avg_pairwise_distance(dl.features, derive_seed(seed, Stream::kDistance), cfg.localize.exact_threshold);
  const double d = result.distance.value;
  if (!(d > 0.0)) throw ValidationError("weak instances are all identical; average distance is zero");

  const Eigen::MatrixXd gate_dc = gate.probabilities(dc.features, dc.weak_labels);
  const Eigen::MatrixXd gate_pool = gate.probabilities(pool, pool_lf);
  MemberScores member_dc;
  MemberScores member_pool;
  Ensemble& ens = result.ensemble;

  // Slot (1,1): fitted on every trainable row with alpha = 1.
  {
    auto fit = train_base(pool, pool_labels, num_classes, cfg.learner, derive_seed(seed, Stream::kLearner, 0));
    const int src = cfg.init_gate == InitGate::kAllSources ? 0 : 1;
    ens.add_member({1, src, fit.learner});
    ens.set_weights({1.0});
    member_dc.push_back(gated(gate_dc, src, fit.learner->predict_scores(dc.features)));
    member_pool.push_back(gated(gate_pool, src, fit.learner->predict_scores(pool)));
    RoundRecord rec;
    rec.init = true;
    rec.region_size = pool.rows();
    rec.alpha_est = 1.0;
    rec.alpha_final = 1.0;
    const Eigen::MatrixXd raw = combine_scores(member_dc, ens.weights());
    rec.candidate0_error = rec.selected_error = clean_error(raw, dc.gold);
    rec.candidate_errors = {rec.selected_error};
    rec.weights = ens.weights();
    record_clean_metrics(rec, raw, dc);
    result.rounds.push_back(std::move(rec));
  }

  // Candidate rows (into pool) for each source's clusters.
  std::vector<std::vector<std::size_t>> source_rows(static_cast<std::size_t>(p));
  std::vector<Features> source_x(static_cast<std::size_t>(p));
  if (cfg.localize.pool == SourcePool::kMatched) {
    for (int l = 1; l <= p; ++l) {
      auto& rows = source_rows[static_cast<std::size_t>(l - 1)];
      for (Eigen::Index i = 0; i < pool_lf.rows(); ++i)
        if (pool_lf(i, l - 1) != 0) rows.push_back(static_cast<std::size_t>(i));
      if (!rows.empty()) source_x[static_cast<std::size_t>(l - 1)] = rows_of(pool, rows);
    }
  }

  ErrorMatrix errors(dc.size());
  DataWeights w = init_data_weights(pool_labels.size());
  // Selected weights expressed on the scale of the estimated alphas.
  WeightVector alphas{1.0};
  const bool keep_scale = cfg.weighting.carry_scale;
  std::size_t round = 0;

  for (int t = 1; t <= cfg.T; ++t) {
    for (int l = 1; l <= p; ++l) {
      if (t == 1 && l == 1) continue;
      ++round;
      RoundRecord rec;
      rec.t = t;
      rec.l = l;

      // Inference of the preceding ensemble on D_c.
      const Eigen::MatrixXd before = normalize_score_rows(combine_scores(member_dc, ens.weights()));
      errors.update(before, dc.gold, cfg.localize.error_update);
      if (errors.all_zero()) {
        result.converged = true;
        return result;
      }

      const std::size_t k = std::min(cfg.localize.k, dc.size());
      const auto& srows = source_rows[static_cast<std::size_t>(l - 1)];
      const bool restricted = !srows.empty();
      LocalRegion region = build_local_region(errors, restricted ? source_x[static_cast<std::size_t>(l - 1)] : pool,
                                              dc.features, k, cfg.localize.c1, d, cfg.localize.n_min);
      if (restricted)
        for (auto& m : region.members) m = srows[m];
      rec.anchors = region.anchors;
      rec.radii = region.radii;
      rec.cluster_sizes = region.cluster_sizes;
      rec.fallback = region.fallback;
      rec.region_size = region.members.size();

      const Features rx = rows_of(pool, region.members);
      Labels ry;
      ry.reserve(region.members.size());
      for (auto i : region.members) ry.push_back(pool_labels[i]);
      auto fit = train_base(rx, ry, num_classes, cfg.learner, derive_seed(seed, Stream::kLearner, round));
      const auto& learner = fit.learner;

      ens.add_member({t, l, learner});
      member_dc.push_back(gated(gate_dc, l, learner->predict_scores(dc.features)));
      const Eigen::MatrixXd learner_pool = learner->predict_scores(pool);
      member_pool.push_back(gated(gate_pool, l, learner_pool));

      WeightVector v = keep_scale ? alphas : ens.weights();
      double alpha = 0.0;
      Labels learner_preds;
      if (variant != Variant::kIntegrated) {
        learner_preds = argmax_rows(learner_pool);
        const double err = weighted_error(w, learner_preds, pool_labels);
        alpha = estimate_alpha(err);
        rec.weighted_error = err;
        rec.alpha_est = alpha;
        v.push_back(alpha);
      }

      WeightSelection sel;
      if (variant == Variant::kIntegrated) {
        sel = select_share_on_clean(ens.weights(), member_dc, dc.gold);
        rec.candidate0_error = sel.errors.front();
      } else if (variant == Variant::kWeakOnlyWeights) {
        const std::vector<WeightVector> only{clip_normalize(v)};
        sel = select_weights(only, member_dc, dc.gold);
        rec.candidate0_error = sel.errors.front();
      } else {
        const double sigma = cfg.weighting.sigma ? *cfg.weighting.sigma : default_sigma(v);
        const auto candidates =
            perturb_weights(v, cfg.weighting.n_p, cfg.weighting.mu, sigma, derive_seed(seed, Stream::kPerturb, round));
        sel = select_weights(candidates, member_dc, dc.gold);
        rec.candidate0_error = sel.errors.front();
      }
      rec.candidate_errors = sel.errors;
      rec.selected = sel.index;
      rec.selected_error = sel.errors[sel.index];
      if (variant != Variant::kIntegrated) {
        double mass = 0.0;
        for (double a : v) mass += std::max(a, 0.0);
        alphas = sel.weights;
        for (double& a : alphas) a *= mass;
      }
      ens.set_weights(sel.weights);
      rec.alpha_final = sel.weights.back();
      rec.weights = sel.weights;

      if (variant != Variant::kIntegrated) {
        const Labels update_preds =
            cfg.weighting.classic_update ? learner_preds : argmax_rows(combine_scores(member_pool, ens.weights()));
        w = update_data_weights(w, alpha, update_preds, pool_labels);
      }

      record_clean_metrics(rec, combine_scores(member_dc, ens.weights()), dc);
      result.rounds.push_back(std::move(rec));
    }
  }
  return result;
}

}  // namespace

BoostResult run_localboost(const WeakLabeledSet& dl, const CleanSet& dc, const Gate& gate, const BoostConfig& config,
                           std::uint64_t seed) {
  return run_core(Variant::kFull, dl, dc, gate, config, seed);
}

BoostResult run_ablation(Variant variant, const WeakLabeledSet& dl, const CleanSet& dc, const Gate& learned_gate,
                         const BoostConfig& config, std::uint64_t seed) {
  const int p = static_cast<int>(dl.num_sources());
  switch (variant) {
    case Variant::kNoCondFn:
      return run_core(variant, dl, dc, Gate::uniform(p), config, seed);
    case Variant::kHardMatching:
      return run_core(variant, dl, dc, Gate::hard_matching(p), config, seed);
    default:
      return run_core(variant, dl, dc, learned_gate, config, seed);
  }
}

Json Prop1Report::to_json() const {
  return {{"alphas", alphas},
          {"convex_losses", convex_losses},
          {"gated_losses", gated_losses},
          {"min_convex_loss", min_convex_loss},
          {"gated_loss", gated_loss},
          {"seconds", seconds}};
}

Prop1Report prop1_counterexample(std::size_t grid_points) {
  if (grid_points < 2) throw ValidationError("alpha grid needs at least 2 points");
  const auto start = std::chrono::steady_clock::now();
  const LabelSpace labels(2);
  // x1 is matched only by LF1 (emits class 1), x2 only by LF2 (emits class 2).
  Features x(2, 1);
  x << 0.0, 1.0;
  LabelMatrix lf(2, 2);
  lf << 1, 0, 0, 2;
  const Labels gold{1, 2};
  auto f1 = std::make_shared<ConstantLearner>(Eigen::Vector2d(1.0, 0.0), 1);
  auto f2 = std::make_shared<ConstantLearner>(Eigen::Vector2d(0.0, 1.0), 1);

  auto zero_one = [&](const Ensemble& e) {
    const Eigen::MatrixXd raw = e.scores(x, lf).raw;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const int y = gold[static_cast<std::size_t>(i)] - 1;
      const double margin = raw(i, y) - raw(i, 1 - y);
      if (margin <= 0.0) loss += 0.5;
    }
    return loss;
  };

  Ensemble convex(labels, Gate::uniform(2));
  Ensemble gated_e(labels, Gate::hard_matching(2));
  for (Ensemble* e : {&convex, &gated_e}) {
    e->add_member({1, 1, f1});
    e->add_member({1, 2, f2});
  }

  Prop1Report r;
  r.min_convex_loss = 1.0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double a = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    convex.set_weights({a, 1.0 - a});
    gated_e.set_weights({a, 1.0 - a});
    r.alphas.push_back(a);
    r.convex_losses.push_back(zero_one(convex));
    r.gated_losses.push_back(zero_one(gated_e));
    r.min_convex_loss = std::min(r.min_convex_loss, r.convex_losses.back());
    if (a > 0.0 && a < 1.0) r.gated_loss = std::max(r.gated_loss, r.gated_losses.back());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace localboost
