#include "localboost/error.hpp"
#include "localboost/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace localboost;
namespace fs = std::filesystem;

namespace {

Json tiny_config() {
  return Json::parse(R"({
    "generator": {"num_classes": 3, "dim": 5, "clusters_per_class": 2, "n_weak": 400, "n_valid": 150,
                  "n_test": 150, "uniform_lfs": {"count": 3, "accuracy": 0.8, "coverage": 0.4}},
    "clean_size": 80, "T": 2, "k": 4,
    "learner": {"epochs": 8},
    "gate": {"hidden": [8, 8], "epochs": 4},
    "weighting": {"n_p": 6}
  })");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("localboost_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "localboost");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Summarize, HandExamples) {
  const std::vector<double> two{0.8, 0.9}, same{0.7, 0.7, 0.7};
  const auto s = summarize(two);
  EXPECT_NEAR(s.mean, 0.85, 1e-15);
  EXPECT_NEAR(s.std, 0.0707106781, 1e-9);
  EXPECT_NEAR(summarize(same).std, 0.0, 1e-15);
}

TEST(Profiles, DefaultsAndOverrides) {
  const auto trec = parse_run_config(Json::parse(R"({"profile": "trec", "generator": {}})"));
  EXPECT_EQ(trec.boost.localize.k, 5u);
  EXPECT_EQ(trec.boost.localize.c1, 10.0);
  const auto imdb = parse_run_config(Json::parse(R"({"profile": "imdb", "generator": {}, "k": 3})"));
  EXPECT_EQ(imdb.boost.localize.k, 3u);
  EXPECT_EQ(imdb.boost.localize.c1, 4.0);
  EXPECT_EQ(imdb.clean_size, 500u);
  const auto syn = parse_run_config(Json::parse(R"({"generator": {}})"));
  EXPECT_EQ(syn.boost.localize.k, 5u);
  EXPECT_EQ(syn.boost.localize.c1, 4.0);
  EXPECT_THROW(find_profile("mnist"), ConfigError);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "TT": 5})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {"dims": 3}})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "weighting": {"np": 3}})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "T": 0})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "c1": -1})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "weighting": {"sigma": -0.1}})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "T": "five"})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "variant": "bogus"})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {}, "data": {"train": "a", "valid": "b"}})")),
               ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"generator": {"uniform_lfs": {"count": 2, "coverage": 0}}})")),
               ConfigError);
}

TEST(RunConfig, ResolvedJsonRoundTrips) {
  auto doc = tiny_config();
  doc["variant"] = "hard_matching";
  doc["aggregation"] = "weighted";
  doc["weighting"]["sigma"] = 0.05;
  doc["localize"] = {{"error_update", "hard"}, {"unit_norm", true}};
  const auto cfg = parse_run_config(doc);
  const auto again = parse_run_config(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
  EXPECT_EQ(again.variant, Variant::kHardMatching);
  EXPECT_EQ(again.boost.weighting.sigma, 0.05);
  EXPECT_TRUE(again.unit_norm);
}

TEST(Experiment, CleanSubsetIsSeededAndSized) {
  const auto cfg = parse_run_config(tiny_config());
  const auto a = prepare_experiment(cfg, 3);
  const auto b = prepare_experiment(cfg, 3);
  EXPECT_EQ(a.clean.size(), 80u);
  EXPECT_EQ(a.clean.ids, b.clean.ids);
  EXPECT_EQ(a.clean.gold, b.clean.gold);
  ASSERT_TRUE(a.weak.aggregated);
  ASSERT_TRUE(a.test);
  EXPECT_NEAR(std::accumulate(a.class_prior.begin(), a.class_prior.end(), 0.0), 1.0, 1e-12);
}

TEST(Experiment, GroupingByLabelCollapsesSources) {
  auto doc = tiny_config();
  doc["generator"]["uniform_lfs"]["count"] = 6;
  doc["grouping"] = {{"policy", "by_label"}};
  const auto exp = prepare_experiment(parse_run_config(doc), 1);
  EXPECT_EQ(exp.weak.num_sources(), 3u);
  EXPECT_EQ(exp.clean.weak_labels.cols(), 3);
  ASSERT_TRUE(exp.grouping);
  EXPECT_EQ(exp.grouping->num_groups, 3);
}

TEST(TrainRun, WritesCompleteReproducibleRunDirectory) {
  const auto cfg = parse_run_config(tiny_config());
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto report = train_run(cfg, 7, a);
  train_run(cfg, 7, b);
  for (const char* f : {"config.resolved.json", "metrics.jsonl", "ensemble.json", "report.json", "cond_fn.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(report.at("members"), 6);
  const double acc = report.at("test").at("accuracy").get<double>();
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);

  // Re-evaluation from the run directory alone.
  const auto e = Ensemble::from_json(read_json_file(a / "ensemble.json"), a);
  const auto exp = prepare_experiment(cfg, 7);
  const auto m = evaluate_ensemble(e, *exp.test);
  EXPECT_DOUBLE_EQ(m.accuracy, acc);
  EXPECT_DOUBLE_EQ(m.accuracy, m.confusion.trace() / static_cast<double>(m.total));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SeedSweep, IdenticalSeedsHaveZeroSpread) {
  const auto cfg = parse_run_config(tiny_config());
  const std::vector<std::uint64_t> seeds{4, 4};
  const auto s = seed_sweep(cfg, seeds);
  EXPECT_TRUE(s.complete);
  EXPECT_EQ(s.accuracy_stats.n, 2u);
  EXPECT_EQ(s.accuracy_stats.std, 0.0);
  const std::vector<std::uint64_t> one{1};
  EXPECT_THROW(seed_sweep(cfg, one), ConfigError);
}

TEST(SeedSweep, FailingSeedIsRecorded) {
  auto doc = tiny_config();
  doc.erase("generator");
  const auto dir = scratch("sweep_fail");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"format\": \"nope\"}";
  doc["data"] = {{"train", (dir / "bad.json").string()}, {"valid", (dir / "bad.json").string()}};
  const auto cfg = parse_run_config(doc);
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto s = seed_sweep(cfg, seeds);
  EXPECT_FALSE(s.complete);
  EXPECT_EQ(s.failed.size(), 2u);
  EXPECT_EQ(s.to_json().at("complete"), false);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli({"prop1", "--out", (dir / "prop1.json").string()}), 0);
  const auto report = read_json_file(dir / "prop1.json");
  EXPECT_GE(report.at("min_convex_loss").get<double>(), 0.5);
  EXPECT_EQ(report.at("gated_loss").get<double>(), 0.0);

  std::ofstream(dir / "typo.json") << R"({"generator": {}, "TT": 3})";
  EXPECT_EQ(run_cli({"train", "--config", (dir / "typo.json").string(), "--out", (dir / "x").string()}), 2);
  EXPECT_EQ(run_cli({"train", "--config", (dir / "missing.json").string()}), 3);
  EXPECT_EQ(run_cli({"frobnicate"}), 2);
  EXPECT_EQ(run_cli({"--help"}), 0);
  fs::remove_all(dir);
}
