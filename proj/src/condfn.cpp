#include "localboost/condfn.hpp"

#include "localboost/error.hpp"

namespace localboost {

SourceIndexSet build_source_index(const MatchMatrix& match, const Features& features) {
  if (static_cast<Eigen::Index>(match.rows()) != features.rows())
    throw ValidationError("match matrix rows differ from feature rows");
  SourceIndexSet ds;
  for (Eigen::Index i = 0; i < match.entries.rows(); ++i)
    if ((match.entries.row(i).array() != 0).any()) ds.rows.push_back(static_cast<std::size_t>(i));
  const auto n = static_cast<Eigen::Index>(ds.rows.size());
  ds.features.resize(n, features.cols());
  ds.targets.resize(n, match.entries.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(ds.rows[static_cast<std::size_t>(r)]);
    ds.features.row(r) = features.row(i);
    const Eigen::RowVectorXd m = (match.entries.row(i).array() != 0).cast<double>().matrix();
    ds.targets.row(r) = m / m.sum();
  }
  return ds;
}

Eigen::VectorXd CondFn::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) throw ValidationError("feature dimension differs from gate input");
  return net_.probabilities(x);
}

Eigen::MatrixXd CondFn::eval(const Features& x) const {
  if (x.cols() != input_dim()) throw ValidationError("feature dimension differs from gate input");
  return net_.probabilities(x);
}

Json CondFn::to_json() const {
  return {{"format", "localboost.cond_fn"},
          {"version", 1},
          {"num_sources", num_sources()},
          {"input_dim", input_dim()},
          {"epochs", epochs_},
          {"seed", seed_},
          {"network", net_.to_json()}};
}

CondFn CondFn::from_json(const Json& doc) {
  try {
    CondFn q(SoftmaxMlp::from_json(doc.at("network")), doc.value("epochs", 0), doc.value("seed", std::uint64_t{0}));
    if (doc.contains("num_sources") && doc.at("num_sources").get<int>() != q.num_sources())
      throw ValidationError("gate num_sources disagrees with network shape");
    return q;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed gate document: ") + e.what());
  }
}

CondFn untrained_cond_fn(int input_dim, int num_sources, const CondFnSettings& settings, std::uint64_t seed) {
  std::vector<int> widths{input_dim};
  widths.insert(widths.end(), settings.hidden.begin(), settings.hidden.end());
  widths.push_back(num_sources);
  return CondFn(SoftmaxMlp::xavier(std::move(widths), seed), 0, seed);
}

CondFnFit train_cond_fn(const SourceIndexSet& ds, const CondFnSettings& settings, std::uint64_t seed) {
  if (ds.size() == 0) throw ValidationError("source-index set is empty");
  if (ds.targets.cols() < 1) throw ValidationError("need at least one weak source");
  CondFn init = untrained_cond_fn(static_cast<int>(ds.features.cols()), static_cast<int>(ds.targets.cols()), settings, seed);
  SoftmaxMlp net = init.network();
  TrainTrace trace = train_sgd(net, ds.features, ds.targets, settings.sgd, seed);
  return {CondFn(std::move(net), settings.sgd.epochs, seed), std::move(trace)};
}

Eigen::VectorXd hard_matching_q(std::span<const int> lf_row) {
  const auto p = static_cast<Eigen::Index>(lf_row.size());
  if (p == 0) throw ValidationError("empty LF row");
  Eigen::VectorXd q(p);
  double total = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    q[j] = lf_row[static_cast<std::size_t>(j)] != 0 ? 1.0 : 0.0;
    total += q[j];
  }
  if (total == 0.0) return Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  return q / total;
}

}  // namespace localboost
