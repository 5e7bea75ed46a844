#pragma once

#include "localboost/boost.hpp"
#include "localboost/condfn.hpp"
#include "localboost/dataset_io.hpp"
#include "localboost/metrics.hpp"
#include "localboost/weaksource.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace localboost {

/// k and c1 per dataset profile, plus the clean-set size used with it.
struct Profile {
  std::string name;
  std::size_t k;
  double c1;
  std::size_t clean_size;
};

/// imdb, yelp, youtube, agnews, trec, cdr, semeval, synthetic.
const std::vector<Profile>& profiles();
const Profile& find_profile(const std::string& name);

enum class Aggregation { kMajority, kWeighted };
enum class GroupingPolicy { kNone, kByLabel, kManual };

struct RunConfig {
  std::string profile = "synthetic";

  // Either dataset files or generator settings.
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> valid_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<GeneratorConfig> generator;

  std::size_t clean_size = 500;
  Aggregation aggregation = Aggregation::kMajority;
  std::optional<std::vector<double>> class_prior;  // weighted vote; default: clean-set class frequencies
  GroupingPolicy grouping = GroupingPolicy::kNone;
  std::vector<int> group_of;                       // manual grouping
  GroupVote group_vote = GroupVote::kMajority;
  bool unit_norm = false;

  BoostConfig boost;
  CondFnSettings gate;
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // sweep

  void validate() const;
  Json to_json() const;
};

/// Parses a config document; unknown keys are rejected with ConfigError. Relative dataset paths
/// resolve against `base_dir`. Profile defaults apply first, explicit keys override them.
RunConfig parse_run_config(const Json& doc, const std::filesystem::path& base_dir = {});
RunConfig read_run_config(const std::filesystem::path& path);

/// Weak set with aggregated labels, clean subset and optional test split, all in source space
/// (grouped columns when a grouping applies).
struct Experiment {
  WeakLabeledSet weak;
  CleanSet clean;
  std::optional<WeakLabeledSet> test;
  std::optional<SourceGrouping> grouping;
  std::vector<double> class_prior;
};

/// Seeded shuffle of the validation split, first `n` rows (all rows when n >= size).
CleanSet draw_clean_subset(const WeakLabeledSet& valid, std::size_t n, std::uint64_t seed);

Experiment prepare_experiment(const RunConfig& config, std::uint64_t seed);

struct GateFit {
  std::shared_ptr<const CondFn> cond_fn;
  TrainTrace trace;
  std::size_t source_index_size = 0;
};

GateFit fit_gate(const Experiment& exp, const RunConfig& config, std::uint64_t seed);

struct VariantOutcome {
  Variant variant = Variant::kFull;
  BoostResult result;
  std::optional<MetricsReport> test;
  std::optional<MetricsReport> single_learner_test;  // init learner alone: majority-vote baseline
};

VariantOutcome run_variant(const Experiment& exp, const RunConfig& config, Variant variant, const GateFit& gate,
                           std::uint64_t seed);

/// Scores an ensemble on a split whose LF columns are already in source space.
MetricsReport evaluate_ensemble(const Ensemble& e, const WeakLabeledSet& split);

/// Applies the ensemble's stored grouping to a raw split before scoring.
MetricsReport evaluate_raw_split(const Ensemble& e, WeakLabeledSet split, bool unit_norm);

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

SummaryStats summarize(std::span<const double> values);

/// Writes config.resolved.json, metrics.jsonl, ensemble.json, report.json and cond_fn.json (for
/// learned gates) into `dir`.
void write_run_directory(const std::filesystem::path& dir, const RunConfig& config, const Experiment& exp,
                         const VariantOutcome& outcome, const GateFit* gate, std::uint64_t seed);

/// Full train pipeline for one seed and the configured variant; returns the report document.
Json train_run(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir);

struct SweepSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> failed;
  std::vector<std::string> failures;
  std::vector<double> accuracy;
  std::vector<double> macro_f1;
  SummaryStats accuracy_stats;
  SummaryStats macro_f1_stats;
  bool complete = true;

  Json to_json() const;
};

/// Runs train + test evaluation per seed. A failing seed is recorded and skipped.
SweepSummary seed_sweep(const RunConfig& config, std::span<const std::uint64_t> seeds,
                        const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Command-line entry point. Exit codes: 0 ok, 1 runtime failure, 2 malformed config or
/// arguments, 3 IO failure.
int cli_main(int argc, const char* const* argv);

}  // namespace localboost
