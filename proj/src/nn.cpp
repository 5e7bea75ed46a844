#include "localboost/nn.hpp"

#include "localboost/error.hpp"
#include "localboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace localboost {

SoftmaxMlp::SoftmaxMlp(std::vector<int> widths) {
  if (widths.size() < 2) throw ValidationError("network needs an input and an output width");
  for (int w : widths)
    if (w < 1) throw ValidationError("network widths must be positive");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    layers_.push_back({Eigen::MatrixXd::Zero(widths[i], widths[i + 1]), Eigen::VectorXd::Zero(widths[i + 1])});
}

SoftmaxMlp SoftmaxMlp::xavier(std::vector<int> widths, std::uint64_t seed) {
  SoftmaxMlp net(std::move(widths));
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < net.layers_.size(); ++l) {
    auto& w = net.layers_[l].weight;
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  }
  return net;
}

int SoftmaxMlp::input_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.rows());
}

int SoftmaxMlp::output_dim() const noexcept {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.cols());
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

namespace {

// Forward pass keeping the hidden activations; returns logits.
Eigen::MatrixXd forward(const std::vector<DenseLayer>& layers, const Features& x,
                        std::vector<Eigen::MatrixXd>* activations) {
  Eigen::MatrixXd a = x;
  if (activations) activations->push_back(a);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = a * layers[l].weight;
    z.rowwise() += layers[l].bias.transpose();
    if (l + 1 < layers.size()) {
      a = z.array().tanh().matrix();
      if (activations) activations->push_back(a);
    } else {
      return z;
    }
  }
  return a;
}

double cross_entropy(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (targets(i, c) != 0.0) total -= targets(i, c) * (logits(i, c) - lse);
  }
  return total / static_cast<double>(logits.rows());
}

void check_shapes(const SoftmaxMlp& net, const Features& x, const Eigen::MatrixXd& targets) {
  if (x.cols() != net.input_dim()) throw ValidationError("feature dimension differs from network input");
  if (targets.rows() != x.rows() || targets.cols() != net.output_dim())
    throw ValidationError("target shape differs from network output");
  if (x.rows() == 0) throw ValidationError("empty training batch");
}

}  // namespace

Eigen::MatrixXd SoftmaxMlp::logits(const Features& x) const {
  if (x.cols() != input_dim()) throw ValidationError("feature dimension differs from network input");
  return forward(layers_, x, nullptr);
}

Eigen::MatrixXd SoftmaxMlp::probabilities(const Features& x) const { return softmax_rows(logits(x)); }

Eigen::VectorXd SoftmaxMlp::probabilities(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw ValidationError("feature dimension differs from network input");
  Features row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return softmax_rows(forward(layers_, row, nullptr)).row(0).transpose();
}

double SoftmaxMlp::loss(const Features& x, const Eigen::MatrixXd& targets) const {
  check_shapes(*this, x, targets);
  return cross_entropy(forward(layers_, x, nullptr), targets);
}

double SoftmaxMlp::loss_and_gradient(const Features& x, const Eigen::MatrixXd& targets,
                                     Eigen::VectorXd& grad) const {
  check_shapes(*this, x, targets);
  std::vector<Eigen::MatrixXd> acts;
  const Eigen::MatrixXd z = forward(layers_, x, &acts);
  const double value = cross_entropy(z, targets);

  // d/dz of -sum_c t_c log p_c is p * sum(t) - t.
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd delta = softmax_rows(z);
  for (Eigen::Index i = 0; i < delta.rows(); ++i) delta.row(i) = delta.row(i) * targets.row(i).sum() - targets.row(i);
  delta /= n;

  grad.resize(static_cast<Eigen::Index>(num_parameters()));
  std::vector<Eigen::Index> offsets(layers_.size());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = off;
    off += layers_[l].weight.size() + layers_[l].bias.size();
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const Eigen::MatrixXd gw = acts[l].transpose() * delta;
    const Eigen::VectorXd gb = delta.colwise().sum().transpose();
    Eigen::Index o = offsets[l];
    for (Eigen::Index i = 0; i < gw.rows(); ++i)
      for (Eigen::Index j = 0; j < gw.cols(); ++j) grad[o++] = gw(i, j);
    grad.segment(o, gb.size()) = gb;
    if (l > 0) {
      Eigen::MatrixXd back = delta * layer.weight.transpose();
      delta = back.array() * (1.0 - acts[l].array().square());
    }
  }
  return value;
}

std::size_t SoftmaxMlp::num_parameters() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd SoftmaxMlp::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index o = 0;
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) flat[o++] = l.weight(i, j);
    flat.segment(o, l.bias.size()) = l.bias;
    o += l.bias.size();
  }
  return flat;
}

void SoftmaxMlp::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_parameters())
    throw ValidationError("parameter vector has the wrong length");
  Eigen::Index o = 0;
  for (auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = flat[o++];
    l.bias = flat.segment(o, l.bias.size());
    o += l.bias.size();
  }
}

Json SoftmaxMlp::to_json() const {
  Json doc;
  doc["activation"] = "tanh";
  Json layers = Json::array();
  for (const auto& l : layers_) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) w.push_back(l.weight(i, j));
    layers.push_back({{"fan_in", l.weight.rows()},
                      {"fan_out", l.weight.cols()},
                      {"weight", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  doc["layers"] = std::move(layers);
  return doc;
}

SoftmaxMlp SoftmaxMlp::from_json(const Json& doc) {
  if (doc.value("activation", std::string("tanh")) != "tanh")
    throw ValidationError("unsupported activation " + doc.at("activation").dump());
  SoftmaxMlp net;
  for (const auto& l : doc.at("layers")) {
    const auto fan_in = l.at("fan_in").get<Eigen::Index>();
    const auto fan_out = l.at("fan_out").get<Eigen::Index>();
    const auto w = l.at("weight").get<std::vector<double>>();
    const auto b = l.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != fan_in * fan_out || static_cast<Eigen::Index>(b.size()) != fan_out)
      throw ValidationError("layer parameter arrays do not match declared shape");
    if (!net.layers_.empty() && net.layers_.back().weight.cols() != fan_in)
      throw ValidationError("consecutive layer shapes do not chain");
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd(fan_out)};
    for (Eigen::Index i = 0; i < fan_in; ++i)
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weight(i, j) = w[static_cast<std::size_t>(i * fan_out + j)];
    for (Eigen::Index j = 0; j < fan_out; ++j) layer.bias[j] = b[static_cast<std::size_t>(j)];
    net.layers_.push_back(std::move(layer));
  }
  if (net.layers_.empty()) throw ValidationError("network has no layers");
  return net;
}

TrainTrace train_sgd(SoftmaxMlp& net, const Features& x, const Eigen::MatrixXd& targets,
                     const SgdSettings& settings, std::uint64_t seed) {
  check_shapes(net, x, targets);
  if (settings.epochs < 1 || settings.batch_size < 1 || !(settings.learning_rate > 0.0))
    throw ValidationError("invalid SGD settings");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto batch = std::min<std::size_t>(static_cast<std::size_t>(settings.batch_size), n);

  TrainTrace trace;
  trace.initial_loss = net.loss(x, targets);
  if (!std::isfinite(trace.initial_loss)) throw TrainingError("non-finite initial loss", 0);

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Features bx(static_cast<Eigen::Index>(batch), x.cols());
  Eigen::MatrixXd bt(static_cast<Eigen::Index>(batch), targets.cols());
  Eigen::VectorXd grad;
  Eigen::VectorXd params = net.parameters();

  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      if (len != static_cast<std::size_t>(bx.rows())) {
        bx.resize(static_cast<Eigen::Index>(len), x.cols());
        bt.resize(static_cast<Eigen::Index>(len), targets.cols());
      }
      for (std::size_t r = 0; r < len; ++r) {
        bx.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(order[start + r]));
        bt.row(static_cast<Eigen::Index>(r)) = targets.row(static_cast<Eigen::Index>(order[start + r]));
      }
      const double batch_loss = net.loss_and_gradient(bx, bt, grad);
      if (!std::isfinite(batch_loss) || !grad.allFinite()) throw TrainingError("loss diverged", epoch);
      params -= settings.learning_rate * grad;
      net.set_parameters(params);
    }
    const double epoch_loss = net.loss(x, targets);
    if (!std::isfinite(epoch_loss)) throw TrainingError("loss diverged", epoch);
    trace.epoch_losses.push_back(epoch_loss);
  }
  return trace;
}

}  // namespace localboost
