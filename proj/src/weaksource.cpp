#include "localboost/weaksource.hpp"

#include "localboost/error.hpp"
#include "localboost/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace localboost {

int SyntheticLF::apply(std::span<const double> x, int true_label) const {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * direction[j];
  const double cut = true_label == emitted_label ? threshold : confusion_threshold;
  return s > cut ? emitted_label : LabelSpace::kAbstain;
}

void GeneratorConfig::validate() const {
  if (num_classes < 2) throw ValidationError("generator needs at least 2 classes");
  if (dim < 2) throw ValidationError("generator needs dimension >= 2");
  if (clusters_per_class < 1) throw ValidationError("need at least one cluster per class");
  if (latent_dim < 0 || latent_dim > dim) throw ValidationError("latent_dim must be in 0..dim");
  if (!(cluster_spread >= 0.0) || !(cluster_std > 0.0)) throw ValidationError("invalid cluster scales");
  if (!(direction_jitter >= 0.0)) throw ValidationError("direction_jitter must be >= 0");
  if (n_weak < 2 || n_valid < 1) throw ValidationError("split sizes too small");
  if (lfs.empty()) throw ValidationError("generator needs at least one LF");
  for (const auto& lf : lfs) {
    if (lf.emitted_label < 1 || lf.emitted_label > num_classes) throw ValidationError("LF label outside 1..C");
    if (!(lf.noise_rate >= 0.0 && lf.noise_rate < 0.5)) throw ValidationError("LF noise_rate must be in [0, 0.5)");
    if (!(lf.coverage > 0.0 && lf.coverage <= 1.0)) throw ValidationError("LF coverage must be in (0, 1]");
    if (lf.direction && static_cast<int>(lf.direction->size()) != dim)
      throw ValidationError("LF direction has wrong dimension");
  }
}

std::vector<LfSpec> uniform_lf_specs(int num_lfs, int num_classes, double accuracy, double coverage) {
  std::vector<LfSpec> out;
  for (int j = 0; j < num_lfs; ++j) out.push_back({j % num_classes + 1, 1.0 - accuracy, coverage, std::nullopt});
  return out;
}

namespace {

// P(N(mean, sd^2) mixture with equal weights > t).
double mixture_survival(const std::vector<double>& means, double sd, double t) {
  double s = 0.0;
  for (double m : means) s += 0.5 * std::erfc((t - m) / (sd * std::sqrt(2.0)));
  return s / static_cast<double>(means.size());
}

// Threshold t with survival(t) = q, q in (0, 1).
double mixture_upper_quantile(const std::vector<double>& means, double sd, double q) {
  double lo = *std::min_element(means.begin(), means.end()) - 40.0 * sd;
  double hi = *std::max_element(means.begin(), means.end()) + 40.0 * sd;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_survival(means, sd, mid) > q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd unit(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw ValidationError("LF direction must be nonzero");
  return v / n;
}

void sample_split(const GeneratorConfig& cfg, const std::vector<Eigen::VectorXd>& means,
                  const std::vector<SyntheticLF>& lfs, std::size_t n, const std::string& prefix,
                  std::uint64_t seed, WeakLabeledSet& out) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(means.size()) - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  const auto p = static_cast<Eigen::Index>(lfs.size());
  out.label_space = LabelSpace(cfg.num_classes);
  out.features.resize(static_cast<Eigen::Index>(n), d);
  out.weak_labels.resize(static_cast<Eigen::Index>(n), p);
  out.ids.clear();
  out.clean_labels.clear();
  out.lf_names.clear();
  for (Eigen::Index j = 0; j < p; ++j) out.lf_names.push_back("lf" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    const int k = pick(rng);
    const int y = k % cfg.num_classes + 1;
    const auto ri = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d; ++j) out.features(ri, j) = means[static_cast<std::size_t>(k)][j] + cfg.cluster_std * gauss(rng);
    std::span<const double> x(out.features.row(ri).data(), static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < p; ++j) out.weak_labels(ri, j) = lfs[static_cast<std::size_t>(j)].apply(x, y);
    out.ids.push_back(prefix + std::to_string(i));
    out.clean_labels.emplace_back(y);
  }
}

}  // namespace

SyntheticData generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, Stream::kGenerator));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int c = cfg.num_classes;
  const int k_total = c * cfg.clusters_per_class;
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  const int latent = cfg.latent_dim == 0 ? cfg.dim : cfg.latent_dim;

  // Orthonormal embedding of the latent space.
  Eigen::MatrixXd basis(d, latent);
  for (Eigen::Index i = 0; i < d; ++i)
    for (int j = 0; j < latent; ++j) basis(i, j) = gauss(rng);
  if (latent == cfg.dim) {
    basis = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, latent);
  }

  std::vector<Eigen::VectorXd> means;
  for (int k = 0; k < k_total; ++k) {
    Eigen::VectorXd z(latent);
    for (int j = 0; j < latent; ++j) z[j] = cfg.cluster_spread * gauss(rng);
    means.push_back(basis * z);
  }

  Eigen::VectorXd global = Eigen::VectorXd::Zero(d);
  for (const auto& m : means) global += m;
  global /= static_cast<double>(k_total);

  const double class_share = 1.0 / static_cast<double>(c);
  SyntheticData data;
  for (const auto& spec : cfg.lfs) {
    Eigen::VectorXd u;
    if (spec.direction) {
      u = unit(Eigen::Map<const Eigen::VectorXd>(spec.direction->data(), d));
    } else {
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
      for (int k = spec.emitted_label - 1; k < k_total; k += c) centroid += means[static_cast<std::size_t>(k)];
      centroid /= static_cast<double>(cfg.clusters_per_class);
      Eigen::VectorXd toward = centroid - global;
      Eigen::VectorXd jitter(d);
      for (Eigen::Index j = 0; j < d; ++j) jitter[j] = gauss(rng);
      const double scale = toward.norm() > 0.0 ? toward.norm() : 1.0;
      u = unit(toward + cfg.direction_jitter * scale * jitter.normalized());
    }

    std::vector<double> own, other;
    for (int k = 0; k < k_total; ++k)
      (k % c + 1 == spec.emitted_label ? own : other).push_back(u.dot(means[static_cast<std::size_t>(k)]));

    const double noise = spec.noise_rate;
    const double q_own = std::min(1.0, spec.coverage * (1.0 - noise) / class_share);
    const double q_other = q_own * class_share * noise / ((1.0 - noise) * (1.0 - class_share));
    if (q_other > 1.0) throw ValidationError("infeasible LF: coverage/noise cannot be realized");

    SyntheticLF lf;
    lf.direction.assign(u.data(), u.data() + d);
    lf.emitted_label = spec.emitted_label;
    lf.noise_rate = noise;
    lf.coverage = spec.coverage;
    constexpr double inf = std::numeric_limits<double>::infinity();
    lf.threshold = q_own >= 1.0 ? -inf : mixture_upper_quantile(own, cfg.cluster_std, q_own);
    lf.confusion_threshold = q_other <= 0.0 ? inf : mixture_upper_quantile(other, cfg.cluster_std, q_other);
    data.lfs.push_back(std::move(lf));
  }

  sample_split(cfg, means, data.lfs, cfg.n_weak, "train-", derive_seed(seed, Stream::kGenerator, 1), data.train);
  sample_split(cfg, means, data.lfs, cfg.n_valid, "valid-", derive_seed(seed, Stream::kGenerator, 2), data.valid);
  sample_split(cfg, means, data.lfs, cfg.n_test, "test-", derive_seed(seed, Stream::kGenerator, 3), data.test);
  return data;
}

void SourceGrouping::validate(std::size_t num_lfs) const {
  if (group_of.size() != num_lfs) throw ValidationError("group_of length differs from LF count");
  if (num_groups < 1) throw ValidationError("grouping needs at least one group");
  std::vector<bool> hit(static_cast<std::size_t>(num_groups), false);
  for (int g : group_of) {
    if (g < 0 || g >= num_groups) throw ValidationError("group index out of range");
    hit[static_cast<std::size_t>(g)] = true;
  }
  if (std::find(hit.begin(), hit.end(), false) != hit.end()) throw ValidationError("empty group in grouping");
}

SourceGrouping make_grouping(std::vector<int> group_of) {
  SourceGrouping g;
  g.num_groups = group_of.empty() ? 0 : *std::max_element(group_of.begin(), group_of.end()) + 1;
  g.group_of = std::move(group_of);
  g.validate(g.group_of.size());
  return g;
}

SourceGrouping group_lfs_by_label(const WeakLabeledSet& weak) {
  const auto p = weak.num_sources();
  std::vector<int> emitted(p, 0);
  for (std::size_t j = 0; j < p; ++j) {
    std::set<int> seen;
    for (Eigen::Index i = 0; i < weak.weak_labels.rows(); ++i) {
      const int y = weak.weak_labels(i, static_cast<Eigen::Index>(j));
      if (y != LabelSpace::kAbstain) seen.insert(y);
    }
    const std::string name = j < weak.lf_names.size() ? weak.lf_names[j] : "lf" + std::to_string(j);
    if (seen.size() > 1) throw GroupingError("LF " + name + " emits more than one label; provide group_of manually");
    if (seen.empty()) throw GroupingError("LF " + name + " never fires; provide group_of manually");
    emitted[j] = *seen.begin();
  }
  std::vector<int> labels(emitted);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  SourceGrouping g;
  g.num_groups = static_cast<int>(labels.size());
  for (int y : emitted)
    g.group_of.push_back(static_cast<int>(std::lower_bound(labels.begin(), labels.end(), y) - labels.begin()));
  return g;
}

LabelMatrix apply_grouping(const LabelMatrix& weak_labels, int num_classes, const SourceGrouping& grouping,
                           GroupVote vote) {
  grouping.validate(static_cast<std::size_t>(weak_labels.cols()));
  LabelMatrix out = LabelMatrix::Zero(weak_labels.rows(), grouping.num_groups);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(grouping.num_groups));
  std::vector<int> votes;
  for (Eigen::Index i = 0; i < weak_labels.rows(); ++i) {
    for (auto& m : members) m.clear();
    for (Eigen::Index j = 0; j < weak_labels.cols(); ++j)
      members[static_cast<std::size_t>(grouping.group_of[static_cast<std::size_t>(j)])].push_back(weak_labels(i, j));
    for (int g = 0; g < grouping.num_groups; ++g) {
      const auto& m = members[static_cast<std::size_t>(g)];
      int y = LabelSpace::kAbstain;
      if (vote == GroupVote::kMajority) {
        y = majority_vote_row(m, num_classes);
      } else {
        for (int v : m)
          if (v != LabelSpace::kAbstain) {
            y = v;
            break;
          }
      }
      out(i, g) = y;
    }
  }
  return out;
}

WeakLabeledSet apply_grouping(const WeakLabeledSet& weak, const SourceGrouping& grouping, GroupVote vote) {
  WeakLabeledSet out = weak;
  out.weak_labels = apply_grouping(weak.weak_labels, weak.label_space.num_classes(), grouping, vote);
  out.lf_names.clear();
  for (int g = 0; g < grouping.num_groups; ++g) {
    std::string name = "group" + std::to_string(g);
    out.lf_names.push_back(name);
  }
  return out;
}

GroupVote parse_group_vote(const std::string& name) {
  if (name == "majority") return GroupVote::kMajority;
  if (name == "first_match") return GroupVote::kFirstMatch;
  throw ConfigError("unknown group vote policy '" + name + "'");
}

}  // namespace localboost
