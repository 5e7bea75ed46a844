#include "localboost/boost.hpp"
#include "localboost/condfn.hpp"
#include "localboost/harness.hpp"
#include "localboost/learner.hpp"
#include "localboost/localize.hpp"
#include "localboost/weighting.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace localboost;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kAlphaTol = 1e-12;
constexpr double kSimplexTol = 1e-9;
constexpr double kDistanceTol = 1e-12;
constexpr double kGradRelTol = 1e-4;
constexpr double kOutputSimplexTol = 1e-6;
constexpr double kProp1Seconds = 1.0;
constexpr double kGradSeconds = 5.0;
constexpr double kAblationGap = 0.01;  // one accuracy point
constexpr double kBaselineGap = 0.02;
constexpr int kBenchmarkSeeds = 10;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Features gaussian(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Features x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

std::span<const double> row(const Features& x, Eigen::Index i) {
  return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

// ---------------------------------------------------------------- 1

Outcome prop1() {
  const auto r = prop1_counterexample();
  Outcome o;
  for (double l : r.convex_losses) o.pass = o.pass && l >= 0.5;
  o.pass = o.pass && r.gated_loss == 0.0 && r.seconds < kProp1Seconds;
  o.detail = "min convex loss " + fmt("%.3f", r.min_convex_loss) + ", gated loss " + fmt("%.3f", r.gated_loss) +
             ", " + fmt("%.4f s", r.seconds);
  return o;
}

// ---------------------------------------------------------------- 2

Outcome weighting_math() {
  Outcome o;
  const bool half = estimate_alpha(0.5) == 0.0;
  const bool quarter = std::abs(estimate_alpha(0.25) - std::log(3.0)) <= kAlphaTol;

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0), a(-8.0, 8.0);
  std::uniform_int_distribution<int> size(1, 80), lab(1, 5);
  double worst_w = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    DataWeights w(n);
    std::vector<int> preds(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = u(rng) + 1e-3;
      preds[i] = lab(rng);
      labels[i] = lab(rng);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
    const auto out = update_data_weights(w, a(rng), preds, labels);
    worst_w = std::max(worst_w, std::abs(std::accumulate(out.begin(), out.end(), 0.0) - 1.0));
  }

  double worst_c = 0.0;
  bool zero_sigma = true;
  std::uniform_real_distribution<double> entry(-0.5, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(1 + trial % 12));
    for (double& x : v) x = entry(rng);
    for (const auto& c : perturb_weights(v, 16, 0.0, 0.5, static_cast<std::uint64_t>(trial)))
      worst_c = std::max(worst_c, std::abs(std::accumulate(c.begin(), c.end(), 0.0) - 1.0));
    zero_sigma = zero_sigma && perturb_weights(v, 4, 0.0, 0.0, 1)[0] == clip_normalize(v);
  }
  o.pass = half && quarter && worst_w <= kSimplexTol && worst_c <= kSimplexTol && zero_sigma;
  o.detail = std::string("alpha(0.5)=0 ") + (half ? "yes" : "no") + ", alpha(0.25)=log3 " + (quarter ? "yes" : "no") +
             ", max |sum w - 1| " + fmt("%.2e", worst_w) + ", max |sum cand - 1| " + fmt("%.2e", worst_c);
  return o;
}

// ---------------------------------------------------------------- 4

std::vector<std::size_t> brute_force(std::span<const double> anchor, const Features& pool, double radius,
                                     std::size_t n_min) {
  std::vector<std::size_t> inside;
  std::vector<std::pair<double, std::size_t>> all;
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < pool.cols(); ++j) {
      const double d = pool(i, j) - anchor[static_cast<std::size_t>(j)];
      s += d * d;
    }
    const double dist = std::sqrt(s);
    all.emplace_back(dist, static_cast<std::size_t>(i));
    if (dist <= radius) inside.push_back(static_cast<std::size_t>(i));
  }
  if (!inside.empty()) return inside;
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> nearest;
  for (std::size_t i = 0; i < std::min(n_min, all.size()); ++i) nearest.push_back(all[i].second);
  std::sort(nearest.begin(), nearest.end());
  return nearest;
}

Outcome localization() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::size_t cases = 0, mismatches = 0;
  for (Eigen::Index n : {2, 17, 64, 200, 333, 500}) {
    const auto pool = gaussian(n, 5, rng);
    const auto anchors = gaussian(8, 5, rng, 1.5);
    for (Eigen::Index a = 0; a < anchors.rows(); ++a) {
      for (double radius : {0.05, 1.0, 2.0, 3.5, 50.0}) {
        ++cases;
        if (sample_cluster(row(anchors, a), pool, radius, 16).members != brute_force(row(anchors, a), pool, radius, 16))
          ++mismatches;
      }
    }
  }
  Features line(3, 1);
  line << 0.0, 1.0, 2.0;
  const double d = avg_pairwise_distance(line, 0).value;

  bool halves = true;
  const Features clean = Features::Zero(1, 2);
  const auto pool = gaussian(40, 2, rng);
  const std::vector<int> gold{1};
  for (double err : {0.2, 0.5, 0.9, 1.0}) {
    Eigen::MatrixXd s(1, 2);
    s << 1.0 - err, err;
    ErrorMatrix once(1), twice(1);
    once.update(s, gold);
    twice.update(s, gold);
    twice.update(s, gold);
    const double r1 = build_local_region(once, pool, clean, 1, 4.0, 1.3, 3).radii[0];
    const double r2 = build_local_region(twice, pool, clean, 1, 4.0, 1.3, 3).radii[0];
    halves = halves && r2 * 2.0 == r1;
  }
  o.pass = mismatches == 0 && std::abs(d - 4.0 / 3.0) <= kDistanceTol && halves;
  o.detail = std::to_string(cases - mismatches) + "/" + std::to_string(cases) + " clusters match brute force, " +
             "collinear distance " + fmt("%.15f", d) + ", radius halves " + (halves ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------- 5

double worst_relative_gradient_error(SoftmaxMlp net, const Features& x, const Eigen::MatrixXd& t) {
  Eigen::VectorXd grad;
  net.loss_and_gradient(x, t, grad);
  const Eigen::VectorXd p0 = net.parameters();
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    Eigen::VectorXd p = p0;
    p[i] = p0[i] + h;
    net.set_parameters(p);
    const double up = net.loss(x, t);
    p[i] = p0[i] - h;
    net.set_parameters(p);
    const double down = net.loss(x, t);
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(numeric - grad[i]) / std::max(1e-8, std::abs(numeric) + std::abs(grad[i])));
  }
  return worst;
}

SoftmaxMlp jitter(SoftmaxMlp net, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.5);
  auto p = net.parameters();
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] += g(rng);
  net.set_parameters(p);
  return net;
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  double worst_learner = 0.0, worst_gate = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    // Base learner: D=3, H=4, C=2, one-hot targets.
    LearnerSettings ls;
    ls.kind = LearnerKind::kMlp;
    ls.hidden = 4;
    const auto learner = untrained_learner(3, 2, ls, static_cast<std::uint64_t>(trial));
    const auto x = gaussian(8, 3, rng);
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(8, 2);
    for (Eigen::Index i = 0; i < 8; ++i) onehot(i, i % 2) = 1.0;
    worst_learner = std::max(worst_learner, worst_relative_gradient_error(jitter(learner.network(), rng), x, onehot));

    // Gate: D=3, H=4, p=2, normalized match rows.
    CondFnSettings cs;
    cs.hidden = {4, 4};
    const auto gate = untrained_cond_fn(3, 2, cs, static_cast<std::uint64_t>(trial));
    MatchMatrix m;
    m.entries = LabelMatrix(6, 2);
    m.entries << 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0;
    const auto ds = build_source_index(m, gaussian(6, 3, rng));
    worst_gate = std::max(worst_gate, worst_relative_gradient_error(jitter(gate.network(), rng), ds.features, ds.targets));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_learner <= kGradRelTol && worst_gate <= kGradRelTol && secs < kGradSeconds;
  o.detail = "learner rel err " + fmt("%.2e", worst_learner) + ", gate rel err " + fmt("%.2e", worst_gate) + ", " +
             fmt("%.3f s", secs);
  return o;
}

// ---------------------------------------------------------------- 6

Outcome simplex() {
  std::mt19937_64 rng(6);
  const int d = 6;
  const auto x = gaussian(600, d, rng);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(600, 3);
  Labels labels(600);
  MatchMatrix m;
  m.entries = LabelMatrix::Zero(600, 4);
  std::uniform_int_distribution<int> bit(0, 1);
  for (Eigen::Index i = 0; i < 600; ++i) {
    labels[static_cast<std::size_t>(i)] = x(i, 0) > 0 ? (x(i, 1) > 0 ? 1 : 2) : 3;
    for (Eigen::Index l = 0; l < 4; ++l) m.entries(i, l) = bit(rng);
  }
  CondFnSettings cs;
  cs.hidden = {16, 16};
  cs.sgd.epochs = 5;
  const auto q = train_cond_fn(build_source_index(m, x), cs, 1).model;
  LearnerSettings ls;
  ls.kind = LearnerKind::kMlp;
  ls.sgd.epochs = 5;
  const auto f = train_base(x, labels, 3, ls, 2).learner;

  std::normal_distribution<double> scale(0.0, 3.0);
  double worst_q = 0.0, worst_f = 0.0;
  bool nonneg = true;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> v(d);
    for (double& e : v) e = scale(rng) * (i % 100 == 0 ? 100.0 : 1.0);
    const auto qv = q_eval(q, v);
    const auto fv = f->predict_scores(std::span<const double>(v));
    worst_q = std::max(worst_q, std::abs(qv.sum() - 1.0));
    worst_f = std::max(worst_f, std::abs(fv.sum() - 1.0));
    nonneg = nonneg && qv.minCoeff() >= 0.0 && fv.minCoeff() >= 0.0;
  }

  bool monotone = true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> lab(1, 4);
  ErrorMatrix em(100);
  std::vector<int> gold(100);
  for (int& g : gold) g = lab(rng);
  for (int step = 0; step < 300; ++step) {
    Eigen::MatrixXd s(100, 4);
    for (Eigen::Index i = 0; i < 100; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) s(i, j) = u(rng);
      s.row(i) /= s.row(i).sum();
    }
    const auto before = em.values();
    em.update(s, gold, step % 2 ? ErrorUpdate::kHard : ErrorUpdate::kSoft);
    for (std::size_t i = 0; i < 100; ++i) monotone = monotone && em[i] >= before[i];
  }
  Outcome o;
  o.pass = worst_q <= kOutputSimplexTol && worst_f <= kOutputSimplexTol && nonneg && monotone;
  o.detail = "q_eval max |sum - 1| " + fmt("%.2e", worst_q) + ", predict_scores " + fmt("%.2e", worst_f) +
             ", error matrix monotone " + (monotone ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------- 3, 7, 8

// Eight single-source LFs at 75% accuracy and 25% coverage over four classes, 16 features,
// 8000 weakly labeled rows, 500 clean rows, T = 5.
const char* kBenchmark = R"({
  "generator": {"num_classes": 4, "dim": 16, "clusters_per_class": 8, "latent_dim": 6, "cluster_spread": 3.0,
                "n_weak": 8000, "n_valid": 1000, "n_test": 2000,
                "uniform_lfs": {"count": 8, "accuracy": 0.75, "coverage": 0.25}},
  "clean_size": 500,
  "T": 5,
  "localize": {"pool": "matched"},
  "weighting": {"sigma": 0.3}
})";

struct Benchmark {
  std::map<Variant, std::vector<double>> acc;
  std::vector<double> single;
  std::size_t rounds_checked = 0;
  std::size_t violations = 0;
  double seconds = 0.0;
};

Benchmark run_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = parse_run_config(Json::parse(kBenchmark));
  Benchmark b;
  for (int s = 1; s <= kBenchmarkSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto exp = prepare_experiment(cfg, seed);
    const auto gate = fit_gate(exp, cfg, seed);
    for (Variant v : kAllVariants) {
      const auto out = run_variant(exp, cfg, v, gate, seed);
      b.acc[v].push_back(out.test->accuracy);
      if (v == Variant::kFull) b.single.push_back(out.single_learner_test->accuracy);
      // Variants that pick among perturbed candidates on the clean set.
      if (v == Variant::kWeakOnlyWeights || v == Variant::kIntegrated) continue;
      for (const auto& r : out.result.rounds) {
        if (r.init) continue;
        ++b.rounds_checked;
        if (!(r.selected_error <= r.candidate0_error)) ++b.violations;
      }
    }
    std::printf("  benchmark seed %d done (%.1f s)\n", s, seconds_since(t0));
    std::fflush(stdout);
  }
  b.seconds = seconds_since(t0);
  return b;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

Outcome non_degradation(const Benchmark& b) {
  Outcome o;
  o.pass = b.rounds_checked > 0 && b.violations == 0;
  o.detail = std::to_string(b.rounds_checked - b.violations) + "/" + std::to_string(b.rounds_checked) +
             " rounds with selected error <= candidate-0 error";
  return o;
}

Outcome ablation(const Benchmark& b) {
  const double full = mean(b.acc.at(Variant::kFull)), hard = mean(b.acc.at(Variant::kHardMatching)),
               none = mean(b.acc.at(Variant::kNoCondFn)), integ = mean(b.acc.at(Variant::kIntegrated)),
               weak = mean(b.acc.at(Variant::kWeakOnlyWeights));
  Outcome o;
  o.pass = full >= hard && hard >= none && full >= integ && integ >= weak && full - none >= kAblationGap &&
           full - weak >= kAblationGap;
  o.detail = "full " + fmt("%.2f", 100 * full) + ", hard_matching " + fmt("%.2f", 100 * hard) + ", no_cond_fn " +
             fmt("%.2f", 100 * none) + ", integrated_mode " + fmt("%.2f", 100 * integ) + ", weak_only_weights " +
             fmt("%.2f", 100 * weak) + " (" + fmt("%.0f s", b.seconds) + ")";
  return o;
}

Outcome baseline(const Benchmark& b) {
  const double full = mean(b.acc.at(Variant::kFull)), single = mean(b.single);
  Outcome o;
  o.pass = full - single >= kBaselineGap;
  o.detail = "full " + fmt("%.2f", 100 * full) + " vs majority-vote learner " + fmt("%.2f", 100 * single);
  return o;
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto cfg = parse_run_config(Json::parse(R"({
    "generator": {"num_classes": 3, "dim": 8, "n_weak": 1500, "n_valid": 300, "n_test": 300,
                  "uniform_lfs": {"count": 4, "accuracy": 0.75, "coverage": 0.3}},
    "clean_size": 200, "T": 2
  })"));
  const auto base = fs::temp_directory_path() / "localboost_acceptance_determinism";
  fs::remove_all(base);
  train_run(cfg, 11, base / "a");
  train_run(cfg, 11, base / "b");
  Outcome o;
  for (const char* f : {"ensemble.json", "metrics.jsonl"}) {
    const auto a = slurp(base / "a" / f), b = slurp(base / "b" / f);
    const bool same = !a.empty() && a == b;
    o.pass = o.pass && same;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + f + (same ? " identical" : " differs");
  }
  fs::remove_all(base);
  return o;
}

}  // namespace

int main() {
  std::map<int, Outcome> results;
  auto guard = [&](int id, const std::function<Outcome()>& fn) {
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
  };
  guard(1, prop1);
  guard(2, weighting_math);
  guard(4, localization);
  guard(5, gradients);
  guard(6, simplex);
  guard(9, determinism);

  std::optional<Benchmark> bench;
  std::string bench_error;
  try {
    bench = run_benchmark();
  } catch (const std::exception& e) {
    bench_error = std::string("exception: ") + e.what();
  }
  const std::map<int, Outcome (*)(const Benchmark&)> bench_checks{{3, non_degradation}, {7, ablation}, {8, baseline}};
  for (const auto& [id, fn] : bench_checks) results[id] = bench ? fn(*bench) : Outcome{false, bench_error};

  const std::map<int, const char*> names{{1, "convex vs gated counterexample"}, {2, "weighting math"},
                                         {3, "non-degradation"},            {4, "localization oracle"},
                                         {5, "gradient checks"},            {6, "simplex invariants"},
                                         {7, "directional ablation"},       {8, "baseline dominance"},
                                         {9, "determinism"}};
  bool all = true;
  for (const auto& [id, r] : results) {
    std::printf("%s criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", id, names.at(id), r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
