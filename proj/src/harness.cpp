#include "localboost/harness.hpp"

#include "localboost/error.hpp"
#include "localboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace localboost {

namespace fs = std::filesystem;

const std::vector<Profile>& profiles() {
  static const std::vector<Profile> table{
      {"imdb", 10, 4.0, 500},     {"yelp", 10, 4.0, 500},     {"youtube", 5, 8.0, 120},
      {"agnews", 10, 4.0, 1000},  {"trec", 5, 10.0, 500},     {"cdr", 5, 10.0, 500},
      {"semeval", 5, 10.0, 200},  {"synthetic", 5, 4.0, 500},
  };
  return table;
}

const Profile& find_profile(const std::string& name) {
  for (const auto& p : profiles())
    if (p.name == name) return p;
  throw ConfigError("unknown profile '" + name + "'");
}

// ---------------------------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const Json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

GeneratorConfig parse_generator(const Json& g) {
  check_keys(g,
             {"num_classes", "dim", "clusters_per_class", "latent_dim", "cluster_spread", "cluster_std",
              "direction_jitter", "n_weak", "n_valid", "n_test", "lfs", "uniform_lfs"},
             "generator");
  GeneratorConfig cfg;
  read_if(g, "num_classes", cfg.num_classes);
  read_if(g, "dim", cfg.dim);
  read_if(g, "clusters_per_class", cfg.clusters_per_class);
  read_if(g, "latent_dim", cfg.latent_dim);
  read_if(g, "cluster_spread", cfg.cluster_spread);
  read_if(g, "cluster_std", cfg.cluster_std);
  read_if(g, "direction_jitter", cfg.direction_jitter);
  read_if(g, "n_weak", cfg.n_weak);
  read_if(g, "n_valid", cfg.n_valid);
  read_if(g, "n_test", cfg.n_test);
  if (g.contains("lfs") && g.contains("uniform_lfs")) throw ConfigError("generator: give either lfs or uniform_lfs");
  if (g.contains("lfs")) {
    for (const auto& lf : g.at("lfs")) {
      check_keys(lf, {"label", "noise_rate", "coverage", "direction"}, "generator.lfs[]");
      LfSpec spec;
      read_if(lf, "label", spec.emitted_label);
      read_if(lf, "noise_rate", spec.noise_rate);
      read_if(lf, "coverage", spec.coverage);
      if (lf.contains("direction") && !lf.at("direction").is_null())
        spec.direction = lf.at("direction").get<std::vector<double>>();
      cfg.lfs.push_back(spec);
    }
  } else {
    int count = 8;
    double accuracy = 0.75, coverage = 0.25;
    if (g.contains("uniform_lfs")) {
      const auto& u = g.at("uniform_lfs");
      check_keys(u, {"count", "accuracy", "coverage"}, "generator.uniform_lfs");
      read_if(u, "count", count);
      read_if(u, "accuracy", accuracy);
      read_if(u, "coverage", coverage);
    }
    cfg.lfs = uniform_lf_specs(count, cfg.num_classes, accuracy, coverage);
  }
  return cfg;
}

Json generator_to_json(const GeneratorConfig& cfg) {
  Json lfs = Json::array();
  for (const auto& lf : cfg.lfs) {
    Json j{{"label", lf.emitted_label}, {"noise_rate", lf.noise_rate}, {"coverage", lf.coverage}};
    j["direction"] = lf.direction ? Json(*lf.direction) : Json(nullptr);
    lfs.push_back(j);
  }
  return {{"num_classes", cfg.num_classes},   {"dim", cfg.dim},
          {"clusters_per_class", cfg.clusters_per_class}, {"latent_dim", cfg.latent_dim},
          {"cluster_spread", cfg.cluster_spread}, {"cluster_std", cfg.cluster_std},
          {"direction_jitter", cfg.direction_jitter}, {"n_weak", cfg.n_weak},
          {"n_valid", cfg.n_valid},           {"n_test", cfg.n_test},
          {"lfs", lfs}};
}

std::string aggregation_name(Aggregation a) { return a == Aggregation::kMajority ? "majority" : "weighted"; }

std::string grouping_name(GroupingPolicy g) {
  switch (g) {
    case GroupingPolicy::kNone: return "none";
    case GroupingPolicy::kByLabel: return "by_label";
    case GroupingPolicy::kManual: return "manual";
  }
  return "none";
}

}  // namespace

void RunConfig::validate() const {
  const bool files = train_path.has_value();
  if (files == generator.has_value()) throw ConfigError("config needs exactly one of 'data' or 'generator'");
  if (files && !valid_path) throw ConfigError("data.valid is required");
  if (generator) generator->validate();
  if (clean_size < 1) throw ConfigError("clean_size must be >= 1");
  if (boost.T < 1) throw ConfigError("T must be >= 1");
  if (boost.localize.k < 1) throw ConfigError("k must be >= 1");
  if (!(boost.localize.c1 > 0.0)) throw ConfigError("c1 must be > 0");
  if (boost.localize.exact_threshold < 2) throw ConfigError("exact_threshold must be >= 2");
  if (boost.weighting.n_p < 1) throw ConfigError("n_p must be >= 1");
  if (boost.weighting.sigma && !(*boost.weighting.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (boost.learner.sgd.epochs < 1 || boost.learner.sgd.batch_size < 1 || !(boost.learner.sgd.learning_rate > 0.0))
    throw ConfigError("invalid learner SGD settings");
  if (boost.learner.hidden < 1) throw ConfigError("learner.hidden must be >= 1");
  if (gate.sgd.epochs < 1 || gate.sgd.batch_size < 1 || !(gate.sgd.learning_rate > 0.0))
    throw ConfigError("invalid gate SGD settings");
  for (int h : gate.hidden)
    if (h < 1) throw ConfigError("gate hidden widths must be >= 1");
  if (grouping == GroupingPolicy::kManual && group_of.empty()) throw ConfigError("manual grouping needs group_of");
  if (class_prior) {
    double s = 0.0;
    for (double v : *class_prior) {
      if (!(v >= 0.0)) throw ConfigError("class_prior entries must be >= 0");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw ConfigError("class_prior must sum to 1");
  }
}

RunConfig parse_run_config(const Json& doc, const fs::path& base_dir) {
  try {
    check_keys(doc,
               {"profile", "data", "generator", "clean_size", "T", "k", "c1", "aggregation", "class_prior",
                "grouping", "localize", "weighting", "learner", "gate", "init_gate", "variant", "seed", "seeds"},
               "config");
    RunConfig cfg;
    read_if(doc, "profile", cfg.profile);
    const Profile& prof = find_profile(cfg.profile);
    cfg.boost.localize.k = prof.k;
    cfg.boost.localize.c1 = prof.c1;
    cfg.clean_size = prof.clean_size;

    if (doc.contains("data")) {
      const auto& d = doc.at("data");
      check_keys(d, {"train", "valid", "test"}, "data");
      cfg.train_path = resolve(base_dir, d.at("train").get<std::string>());
      cfg.valid_path = resolve(base_dir, d.at("valid").get<std::string>());
      if (d.contains("test") && !d.at("test").is_null()) cfg.test_path = resolve(base_dir, d.at("test").get<std::string>());
    }
    if (doc.contains("generator")) cfg.generator = parse_generator(doc.at("generator"));

    read_if(doc, "clean_size", cfg.clean_size);
    read_if(doc, "T", cfg.boost.T);
    read_if(doc, "k", cfg.boost.localize.k);
    read_if(doc, "c1", cfg.boost.localize.c1);
    if (doc.contains("aggregation")) {
      const auto a = doc.at("aggregation").get<std::string>();
      if (a == "majority")
        cfg.aggregation = Aggregation::kMajority;
      else if (a == "weighted")
        cfg.aggregation = Aggregation::kWeighted;
      else
        throw ConfigError("unknown aggregation '" + a + "'");
    }
    if (doc.contains("class_prior") && !doc.at("class_prior").is_null())
      cfg.class_prior = doc.at("class_prior").get<std::vector<double>>();

    if (doc.contains("grouping")) {
      const auto& g = doc.at("grouping");
      check_keys(g, {"policy", "group_of", "vote"}, "grouping");
      const auto policy = g.value("policy", std::string("none"));
      if (policy == "none")
        cfg.grouping = GroupingPolicy::kNone;
      else if (policy == "by_label")
        cfg.grouping = GroupingPolicy::kByLabel;
      else if (policy == "manual")
        cfg.grouping = GroupingPolicy::kManual;
      else
        throw ConfigError("unknown grouping policy '" + policy + "'");
      read_if(g, "group_of", cfg.group_of);
      if (g.contains("vote")) cfg.group_vote = parse_group_vote(g.at("vote").get<std::string>());
    }

    if (doc.contains("localize")) {
      const auto& l = doc.at("localize");
      check_keys(l, {"n_min", "exact_threshold", "error_update", "pool", "unit_norm"}, "localize");
      read_if(l, "n_min", cfg.boost.localize.n_min);
      read_if(l, "exact_threshold", cfg.boost.localize.exact_threshold);
      if (l.contains("error_update")) cfg.boost.localize.error_update = parse_error_update(l.at("error_update").get<std::string>());
      if (l.contains("pool")) cfg.boost.localize.pool = parse_source_pool(l.at("pool").get<std::string>());
      read_if(l, "unit_norm", cfg.unit_norm);
    }
    if (doc.contains("weighting")) {
      const auto& w = doc.at("weighting");
      check_keys(w, {"n_p", "mu", "sigma", "classic_update", "carry_scale"}, "weighting");
      read_if(w, "n_p", cfg.boost.weighting.n_p);
      read_if(w, "mu", cfg.boost.weighting.mu);
      if (w.contains("sigma") && !w.at("sigma").is_null()) cfg.boost.weighting.sigma = w.at("sigma").get<double>();
      read_if(w, "classic_update", cfg.boost.weighting.classic_update);
      read_if(w, "carry_scale", cfg.boost.weighting.carry_scale);
    }
    if (doc.contains("learner")) {
      const auto& l = doc.at("learner");
      check_keys(l, {"type", "hidden", "epochs", "batch_size", "learning_rate"}, "learner");
      if (l.contains("type")) cfg.boost.learner.kind = parse_learner_kind(l.at("type").get<std::string>());
      read_if(l, "hidden", cfg.boost.learner.hidden);
      read_if(l, "epochs", cfg.boost.learner.sgd.epochs);
      read_if(l, "batch_size", cfg.boost.learner.sgd.batch_size);
      read_if(l, "learning_rate", cfg.boost.learner.sgd.learning_rate);
    }
    if (doc.contains("gate")) {
      const auto& g = doc.at("gate");
      check_keys(g, {"hidden", "epochs", "batch_size", "learning_rate"}, "gate");
      read_if(g, "hidden", cfg.gate.hidden);
      read_if(g, "epochs", cfg.gate.sgd.epochs);
      read_if(g, "batch_size", cfg.gate.sgd.batch_size);
      read_if(g, "learning_rate", cfg.gate.sgd.learning_rate);
    }
    if (doc.contains("init_gate")) cfg.boost.init_gate = parse_init_gate(doc.at("init_gate").get<std::string>());
    if (doc.contains("variant")) cfg.variant = parse_variant(doc.at("variant").get<std::string>());
    read_if(doc, "seed", cfg.seed);
    read_if(doc, "seeds", cfg.seeds);
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig read_run_config(const fs::path& path) {
  Json doc;
  try {
    doc = read_json_file(path);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

Json RunConfig::to_json() const {
  Json doc;
  doc["profile"] = profile;
  if (train_path) {
    Json d{{"train", train_path->string()}, {"valid", valid_path->string()}};
    d["test"] = test_path ? Json(test_path->string()) : Json(nullptr);
    doc["data"] = d;
  }
  if (generator) doc["generator"] = generator_to_json(*generator);
  doc["clean_size"] = clean_size;
  doc["T"] = boost.T;
  doc["k"] = boost.localize.k;
  doc["c1"] = boost.localize.c1;
  doc["aggregation"] = aggregation_name(aggregation);
  doc["class_prior"] = class_prior ? Json(*class_prior) : Json(nullptr);
  doc["grouping"] = {{"policy", grouping_name(grouping)},
                     {"group_of", group_of},
                     {"vote", group_vote == GroupVote::kMajority ? "majority" : "first_match"}};
  doc["localize"] = {{"n_min", boost.localize.n_min},
                     {"exact_threshold", boost.localize.exact_threshold},
                     {"error_update", boost.localize.error_update == ErrorUpdate::kSoft ? "soft" : "hard"},
                     {"pool", to_string(boost.localize.pool)},
                     {"unit_norm", unit_norm}};
  doc["weighting"] = {{"n_p", boost.weighting.n_p},
                      {"mu", boost.weighting.mu},
                      {"sigma", boost.weighting.sigma ? Json(*boost.weighting.sigma) : Json(nullptr)},
                      {"classic_update", boost.weighting.classic_update},
                      {"carry_scale", boost.weighting.carry_scale}};
  doc["learner"] = {{"type", to_string(boost.learner.kind)},
                    {"hidden", boost.learner.hidden},
                    {"epochs", boost.learner.sgd.epochs},
                    {"batch_size", boost.learner.sgd.batch_size},
                    {"learning_rate", boost.learner.sgd.learning_rate}};
  doc["gate"] = {{"hidden", gate.hidden},
                 {"epochs", gate.sgd.epochs},
                 {"batch_size", gate.sgd.batch_size},
                 {"learning_rate", gate.sgd.learning_rate}};
  doc["init_gate"] = to_string(boost.init_gate);
  doc["variant"] = to_string(variant);
  doc["seed"] = seed;
  doc["seeds"] = seeds;
  return doc;
}

// ---------------------------------------------------------------------------------------------
// Experiment preparation

CleanSet draw_clean_subset(const WeakLabeledSet& valid, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(valid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(n, order.size()));
  return to_clean_set(select_rows(valid, order));
}

namespace {

std::vector<double> clean_class_frequencies(const CleanSet& dc) {
  std::vector<double> prior(static_cast<std::size_t>(dc.label_space.num_classes()), 0.0);
  for (int y : dc.gold) prior[static_cast<std::size_t>(y - 1)] += 1.0;
  for (double& v : prior) v /= static_cast<double>(dc.gold.size());
  return prior;
}

}  // namespace

Experiment prepare_experiment(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  WeakLabeledSet train, valid;
  std::optional<WeakLabeledSet> test;
  if (cfg.generator) {
    auto data = generate_synthetic(*cfg.generator, seed);
    train = std::move(data.train);
    valid = std::move(data.valid);
    if (data.test.size() > 0) test = std::move(data.test);
  } else {
    train = read_dataset(*cfg.train_path);
    valid = read_dataset(*cfg.valid_path);
    if (cfg.test_path) test = read_dataset(*cfg.test_path);
  }
  if (valid.label_space != train.label_space || valid.num_sources() != train.num_sources() ||
      valid.dim() != train.dim())
    throw ValidationError("train and valid splits disagree on label space, LFs or dimension");
  if (test && (test->label_space != train.label_space || test->num_sources() != train.num_sources() ||
               test->dim() != train.dim()))
    throw ValidationError("train and test splits disagree on label space, LFs or dimension");
  if (cfg.unit_norm) {
    normalize_rows(train.features);
    normalize_rows(valid.features);
    if (test) normalize_rows(test->features);
  }

  Experiment exp;
  exp.clean = draw_clean_subset(valid, cfg.clean_size, derive_seed(seed, Stream::kCleanSubset));
  exp.class_prior = cfg.class_prior ? *cfg.class_prior : clean_class_frequencies(exp.clean);
  if (static_cast<int>(exp.class_prior.size()) != train.label_space.num_classes())
    throw ConfigError("class_prior length differs from number of classes");
  train.aggregated = cfg.aggregation == Aggregation::kMajority ? majority_vote(train) : weighted_vote(train, exp.class_prior);

  if (cfg.grouping == GroupingPolicy::kByLabel) exp.grouping = group_lfs_by_label(train);
  if (cfg.grouping == GroupingPolicy::kManual) exp.grouping = make_grouping(cfg.group_of);
  if (exp.grouping) {
    exp.grouping->validate(train.num_sources());
    const int c = train.label_space.num_classes();
    train = apply_grouping(train, *exp.grouping, cfg.group_vote);
    exp.clean.weak_labels = apply_grouping(exp.clean.weak_labels, c, *exp.grouping, cfg.group_vote);
    if (test) *test = apply_grouping(*test, *exp.grouping, cfg.group_vote);
  }
  exp.weak = std::move(train);
  exp.test = std::move(test);
  exp.weak.validate();
  return exp;
}

GateFit fit_gate(const Experiment& exp, const RunConfig& cfg, std::uint64_t seed) {
  const auto ds = build_source_index(build_match_matrix(exp.weak), exp.weak.features);
  auto fit = train_cond_fn(ds, cfg.gate, derive_seed(seed, Stream::kCondFn));
  return {std::make_shared<CondFn>(std::move(fit.model)), std::move(fit.trace), ds.size()};
}

namespace {

bool needs_learned_gate(Variant v) {
  return v == Variant::kFull || v == Variant::kWeakOnlyWeights || v == Variant::kIntegrated;
}

}  // namespace

MetricsReport evaluate_ensemble(const Ensemble& e, const WeakLabeledSet& split) {
  Labels gold;
  gold.reserve(split.size());
  for (const auto& y : split.clean_labels) {
    if (!y) throw ValidationError("evaluation split has instances without a clean label");
    gold.push_back(*y);
  }
  if (gold.size() != split.size()) throw ValidationError("evaluation split has no clean labels");
  return compute_metrics(e.predict(split.features, split.weak_labels), gold, e.label_space());
}

MetricsReport evaluate_raw_split(const Ensemble& e, WeakLabeledSet split, bool unit_norm) {
  if (unit_norm) normalize_rows(split.features);
  if (e.grouping()) split = apply_grouping(split, *e.grouping(), e.group_vote());
  return evaluate_ensemble(e, split);
}

VariantOutcome run_variant(const Experiment& exp, const RunConfig& cfg, Variant variant, const GateFit& gate,
                           std::uint64_t seed) {
  const int p = static_cast<int>(exp.weak.num_sources());
  const Gate learned = gate.cond_fn ? Gate::learned(gate.cond_fn) : Gate::uniform(p);
  if (needs_learned_gate(variant) && !gate.cond_fn) throw ValidationError("variant needs a trained gate");
  VariantOutcome out{variant, run_ablation(variant, exp.weak, exp.clean, learned, cfg.boost, seed), {}, {}};
  out.result.ensemble.set_grouping(exp.grouping, cfg.group_vote);
  if (exp.test) {
    out.test = evaluate_ensemble(out.result.ensemble, *exp.test);
    Ensemble single(exp.weak.label_space, Gate::uniform(p));
    single.add_member(out.result.ensemble.members().front());
    single.set_weights({1.0});
    out.single_learner_test = evaluate_ensemble(single, *exp.test);
  }
  return out;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

Json majority_vote_test_baseline(const WeakLabeledSet& test) {
  const Labels votes = majority_vote(test);
  std::size_t covered = 0, correct = 0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i] == LabelSpace::kAbstain) continue;
    ++covered;
    if (test.clean_labels[i] && *test.clean_labels[i] == votes[i]) ++correct;
  }
  return {{"coverage", covered / static_cast<double>(votes.size())},
          {"accuracy_on_covered", covered == 0 ? 0.0 : correct / static_cast<double>(covered)}};
}

Json build_report(const RunConfig& cfg, const Experiment& exp, const VariantOutcome& o, const GateFit* gate,
                  std::uint64_t seed) {
  const auto& r = o.result;
  Json doc;
  doc["variant"] = to_string(o.variant);
  doc["seed"] = seed;
  doc["profile"] = cfg.profile;
  doc["converged"] = r.converged;
  doc["members"] = r.ensemble.size();
  doc["num_sources"] = exp.weak.num_sources();
  doc["weak_rows"] = exp.weak.size();
  doc["train_rows"] = r.train_rows;
  doc["clean_size"] = exp.clean.size();
  doc["avg_distance"] = {{"value", r.distance.value}, {"pairs", r.distance.pairs}, {"exact", r.distance.exact}};
  if (gate && gate->cond_fn && r.ensemble.gate().kind() == GateKind::kLearned)
    doc["gate"] = {{"type", "learned"},
                   {"source_index_size", gate->source_index_size},
                   {"initial_loss", gate->trace.initial_loss},
                   {"final_loss", gate->trace.epoch_losses.empty() ? gate->trace.initial_loss : gate->trace.epoch_losses.back()}};
  else
    doc["gate"] = {{"type", to_string(r.ensemble.gate().kind())}};
  const auto& last = r.rounds.back();
  doc["clean"] = {{"accuracy", last.clean_acc}, {"macro_f1", last.clean_f1}, {"exp_error", last.selected_error}};
  doc["test"] = o.test ? o.test->to_json() : Json(nullptr);
  Json baselines;
  baselines["single_learner_test"] = o.single_learner_test ? o.single_learner_test->to_json() : Json(nullptr);
  baselines["majority_vote_test"] = exp.test ? majority_vote_test_baseline(*exp.test) : Json(nullptr);
  doc["baselines"] = baselines;
  doc["final_weights"] = r.ensemble.weights();
  return doc;
}

}  // namespace

void write_run_directory(const fs::path& dir, const RunConfig& cfg, const Experiment& exp,
                         const VariantOutcome& outcome, const GateFit* gate, std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  RunConfig resolved = cfg;
  resolved.seed = seed;
  resolved.variant = outcome.variant;
  write_json_file(dir / "config.resolved.json", resolved.to_json());

  const auto& e = outcome.result.ensemble;
  if (e.gate().kind() == GateKind::kLearned) write_json_file(dir / "cond_fn.json", e.gate().cond_fn()->to_json());
  Json ens = e.to_json("cond_fn.json");
  ens["preprocess"] = {{"unit_norm", cfg.unit_norm}};
  write_json_file(dir / "ensemble.json", ens);

  std::ofstream log(dir / "metrics.jsonl", std::ios::binary);
  if (!log) throw IoError("cannot open " + (dir / "metrics.jsonl").string());
  for (const auto& rec : outcome.result.rounds) log << rec.to_json().dump() << '\n';
  if (!log) throw IoError("failed writing metrics log");

  write_json_file(dir / "report.json", build_report(cfg, exp, outcome, gate, seed));
}

Json train_run(const RunConfig& cfg, std::uint64_t seed, const fs::path& out_dir) {
  const Experiment exp = prepare_experiment(cfg, seed);
  GateFit gate;
  if (needs_learned_gate(cfg.variant)) gate = fit_gate(exp, cfg, seed);
  const VariantOutcome outcome = run_variant(exp, cfg, cfg.variant, gate, seed);
  write_run_directory(out_dir, cfg, exp, outcome, &gate, seed);
  return build_report(cfg, exp, outcome, &gate, seed);
}

Json SweepSummary::to_json() const {
  Json per_seed = Json::array();
  for (std::size_t i = 0, j = 0; i < seeds.size(); ++i) {
    if (std::find(failed.begin(), failed.end(), seeds[i]) != failed.end()) continue;
    per_seed.push_back({{"seed", seeds[i]}, {"accuracy", accuracy[j]}, {"macro_f1", macro_f1[j]}});
    ++j;
  }
  return {{"seeds", seeds},
          {"per_seed", per_seed},
          {"failed", failed},
          {"failures", failures},
          {"complete", complete},
          {"accuracy", {{"mean", accuracy_stats.mean}, {"std", accuracy_stats.std}, {"n", accuracy_stats.n}}},
          {"macro_f1", {{"mean", macro_f1_stats.mean}, {"std", macro_f1_stats.std}, {"n", macro_f1_stats.n}}}};
}

SweepSummary seed_sweep(const RunConfig& cfg, std::span<const std::uint64_t> seeds,
                        const std::optional<fs::path>& out_dir) {
  if (seeds.size() < 2) throw ConfigError("a sweep needs at least 2 seeds");
  SweepSummary s;
  s.seeds.assign(seeds.begin(), seeds.end());
  for (auto seed : seeds) {
    try {
      const Experiment exp = prepare_experiment(cfg, seed);
      if (!exp.test) throw ValidationError("sweep needs a test split");
      GateFit gate;
      if (needs_learned_gate(cfg.variant)) gate = fit_gate(exp, cfg, seed);
      const VariantOutcome o = run_variant(exp, cfg, cfg.variant, gate, seed);
      if (out_dir) write_run_directory(*out_dir / ("seed-" + std::to_string(seed)), cfg, exp, o, &gate, seed);
      s.accuracy.push_back(o.test->accuracy);
      s.macro_f1.push_back(o.test->macro_f1);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      s.failed.push_back(seed);
      s.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
      s.complete = false;
    }
  }
  s.accuracy_stats = summarize(s.accuracy);
  s.macro_f1_stats = summarize(s.macro_f1);
  return s;
}

}  // namespace localboost
