#include "localboost/error.hpp"
#include "localboost/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace localboost {

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string variant;
  std::string profile;
};

RunConfig load_config(const CommonArgs& a) {
  Json doc;
  try {
    doc = read_json_file(a.config);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (!a.profile.empty()) {
    if (!doc.is_object()) throw ConfigError("config must be an object");
    // Profile defaults apply below explicit k / c1 / clean_size keys, so only the name changes.
    doc["profile"] = a.profile;
  }
  RunConfig cfg = parse_run_config(doc, fs::path(a.config).parent_path());
  if (a.seed) cfg.seed = *a.seed;
  if (!a.variant.empty()) {
    try {
      cfg.variant = parse_variant(a.variant);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

void emit(const Json& doc, const std::string& out) {
  if (out.empty())
    std::cout << doc.dump(2) << '\n';
  else
    write_json_file(out, doc);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

int cmd_generate(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  if (!cfg.generator) throw ConfigError("generate needs a 'generator' section");
  const auto data = generate_synthetic(*cfg.generator, cfg.seed);
  const fs::path out = a.out.empty() ? fs::path("synthetic") : fs::path(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string());
  write_dataset(out / "train.json", data.train);
  write_dataset(out / "valid.json", data.valid);
  write_dataset(out / "test.json", data.test);
  std::cout << "wrote " << data.train.size() << "/" << data.valid.size() << "/" << data.test.size()
            << " rows to " << out.string() << '\n';
  return 0;
}

int cmd_train(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  const fs::path out = a.out.empty() ? fs::path("run") : fs::path(a.out);
  const Json report = train_run(cfg, cfg.seed, out);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_ablate(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  const fs::path out = a.out.empty() ? fs::path("ablation") : fs::path(a.out);
  std::vector<Variant> variants(std::begin(kAllVariants), std::end(kAllVariants));
  if (!a.variant.empty()) variants = {cfg.variant};

  const Experiment exp = prepare_experiment(cfg, cfg.seed);
  const GateFit gate = fit_gate(exp, cfg, cfg.seed);
  Json summary = Json::object();
  for (Variant v : variants) {
    const VariantOutcome o = run_variant(exp, cfg, v, gate, cfg.seed);
    write_run_directory(out / to_string(v), cfg, exp, o, &gate, cfg.seed);
    summary[to_string(v)] = o.test ? o.test->to_json() : Json(nullptr);
    std::cerr << to_string(v) << ": " << (o.test ? std::to_string(o.test->accuracy) : "no test split") << '\n';
  }
  write_json_file(out / "ablation.json", summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_evaluate(const std::string& run, const std::string& ensemble_path, const std::string& data,
                 const std::string& out) {
  fs::path ens_file;
  if (!ensemble_path.empty())
    ens_file = ensemble_path;
  else if (!run.empty())
    ens_file = fs::path(run) / "ensemble.json";
  else
    throw ConfigError("evaluate needs --run or --ensemble");
  const Json doc = read_json_file(ens_file);
  const Ensemble e = Ensemble::from_json(doc, ens_file.parent_path());
  bool unit_norm = false;
  if (doc.contains("preprocess")) unit_norm = doc.at("preprocess").value("unit_norm", false);
  const MetricsReport r = evaluate_raw_split(e, read_dataset(data), unit_norm);
  emit(r.to_json(), out);
  return 0;
}

int cmd_sweep(const CommonArgs& a, const std::string& seed_list) {
  RunConfig cfg = load_config(a);
  std::vector<std::uint64_t> seeds = !seed_list.empty() ? parse_seed_list(seed_list) : cfg.seeds;
  if (seeds.empty()) seeds = {0, 1, 2, 3, 4};
  std::optional<fs::path> out;
  if (!a.out.empty()) out = fs::path(a.out);
  const SweepSummary s = seed_sweep(cfg, seeds, out);
  for (const auto& f : s.failures) std::cerr << "warning: " << f << '\n';
  const Json doc = s.to_json();
  if (out) write_json_file(*out / "summary.json", doc);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_config = true) {
  auto* c = cmd->add_option("--config", a.config, "run config (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--seed", a.seed, "master seed (overrides config)");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--variant", a.variant, "full | no_cond_fn | hard_matching | weak_only_weights | integrated_mode");
  cmd->add_option("--profile", a.profile, "dataset profile for k, c1 and |D_c| defaults");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"localized boosting over weakly labeled data"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, ablate_args, sweep_args;
  std::string eval_run, eval_ensemble, eval_data, eval_out, prop_out, seed_list;
  std::size_t prop_grid = 101;

  auto* gen = app.add_subcommand("generate", "write synthetic train/valid/test splits");
  add_common(gen, gen_args);
  auto* train = app.add_subcommand("train", "train one ensemble and write a run directory");
  add_common(train, train_args);
  auto* ablate = app.add_subcommand("ablate", "train every ablation variant on one seed");
  add_common(ablate, ablate_args);
  auto* eval = app.add_subcommand("evaluate", "score a saved ensemble on a dataset");
  eval->add_option("--run", eval_run, "run directory holding ensemble.json");
  eval->add_option("--ensemble", eval_ensemble, "ensemble.json path");
  eval->add_option("--data", eval_data, "dataset JSON with clean labels")->required();
  eval->add_option("--out", eval_out, "write metrics here instead of stdout");
  auto* prop = app.add_subcommand("prop1", "convex combination vs gated ensemble counterexample");
  prop->add_option("--out", prop_out, "write report here instead of stdout");
  prop->add_option("--grid", prop_grid, "alpha grid points")->check(CLI::Range(2, 100001));
  auto* sweep = app.add_subcommand("sweep", "train and test over several seeds");
  add_common(sweep, sweep_args);
  sweep->add_option("--seeds", seed_list, "comma-separated seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(gen_args);
    if (*train) return cmd_train(train_args);
    if (*ablate) return cmd_ablate(ablate_args);
    if (*eval) return cmd_evaluate(eval_run, eval_ensemble, eval_data, eval_out);
    if (*prop) {
      emit(prop1_counterexample(prop_grid).to_json(), prop_out);
      return 0;
    }
    if (*sweep) return cmd_sweep(sweep_args, seed_list);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace localboost
