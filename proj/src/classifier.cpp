#include "dptm/classifier.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dptm/errors.hpp"
#include "dptm/rng.hpp"

namespace dptm {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const Grid& x) {
  return {x.values().data(), static_cast<Eigen::Index>(x.size())};
}

void check_input(const SoftmaxClassifier& model, const Grid& x) {
  if (x.size() != model.input_dim()) {
    throw DimensionError("classifier expects " + std::to_string(model.input_dim()) +
                         " inputs, got " + std::to_string(x.size()));
  }
}

void check_labels(const SoftmaxClassifier& model, std::span<const LabeledSample> data) {
  for (const auto& s : data) {
    if (s.label < 0 || s.label >= model.classes()) {
      throw ValidationError("label " + std::to_string(s.label) + " out of range");
    }
    check_input(model, s.x);
  }
}

// Accumulates the cross-entropy gradient over data[idx] into g (without decay).
void accumulate_gradient(const SoftmaxClassifier& model, std::span<const LabeledSample> data,
                         std::span<const std::size_t> idx, Gradient& g) {
  g.weights.setZero(model.classes(), static_cast<Eigen::Index>(model.input_dim()));
  g.bias.setZero(model.classes());
  for (std::size_t i : idx) {
    const auto x = as_vector(data[i].x);
    Eigen::VectorXd residual = softmax(model.weights() * x + model.bias());
    residual[data[i].label] -= 1.0;
    g.weights.noalias() += residual * x.transpose();
    g.bias += residual;
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  g.weights *= inv;
  g.bias *= inv;
}

}  // namespace

SoftmaxClassifier::SoftmaxClassifier(int classes, std::size_t input_dim)
    : weights_(Eigen::MatrixXd::Zero(classes, static_cast<Eigen::Index>(input_dim))),
      bias_(Eigen::VectorXd::Zero(classes)) {
  if (classes < 1) throw ConfigError("classifier needs at least one class");
}

SoftmaxClassifier::SoftmaxClassifier(Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() != bias_.size()) throw DimensionError("weights/bias class count mismatch");
}

Eigen::VectorXd SoftmaxClassifier::logits(const Grid& x) const {
  check_input(*this, x);
  return weights_ * as_vector(x) + bias_;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

Eigen::VectorXd predict_probs(const SoftmaxClassifier& model, const Grid& x) {
  return softmax(model.logits(x));
}

int argmax_lowest(const Eigen::VectorXd& p) {
  int best = 0;
  for (int c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

int pseudo_label(const SoftmaxClassifier& model, const Grid& x) {
  return argmax_lowest(predict_probs(model, x));
}

double entropy(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw ValidationError("entropy of an empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ValidationError("probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("probabilities must sum to 1");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double training_loss(const SoftmaxClassifier& model, std::span<const LabeledSample> data,
                     double weight_decay) {
  if (data.empty()) throw ValidationError("loss over an empty dataset");
  check_labels(model, data);
  double loss = 0.0;
  for (const auto& s : data) {
    const Eigen::VectorXd z = model.logits(s.x);
    const double top = z.maxCoeff();
    loss += top + std::log((z.array() - top).exp().sum()) - z[s.label];
  }
  loss /= static_cast<double>(data.size());
  return loss + 0.5 * weight_decay * model.weights().squaredNorm();
}

Gradient training_gradient(const SoftmaxClassifier& model, std::span<const LabeledSample> data,
                           double weight_decay) {
  if (data.empty()) throw ValidationError("gradient over an empty dataset");
  check_labels(model, data);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Gradient g;
  accumulate_gradient(model, data, idx, g);
  g.weights += weight_decay * model.weights();
  return g;
}

SoftmaxClassifier train_ce(SoftmaxClassifier model, std::span<const LabeledSample> data,
                           const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ValidationError("training set is empty");
  check_labels(model, data);

  Rng rng = make_rng(cfg.seed, "shuffle");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(model.weights().rows(), model.weights().cols());
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(model.bias().size());
  Gradient g;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      accumulate_gradient(model, data, std::span<const std::size_t>(order).subspan(start, len), g);
      g.weights += cfg.weight_decay * model.weights();
      vel_w = cfg.momentum * vel_w + g.weights;
      vel_b = cfg.momentum * vel_b + g.bias;
      model.weights() -= cfg.learning_rate * vel_w;
      model.bias() -= cfg.learning_rate * vel_b;
    }
    if (!model.weights().allFinite() || !model.bias().allFinite()) {
      throw NumericalError("training diverged in epoch " + std::to_string(epoch));
    }
  }
  return model;
}

Eigen::MatrixXd probability_matrix(const SoftmaxClassifier& model, std::span<const Grid> xs) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(xs.size()), model.classes());
  for (std::size_t i = 0; i < xs.size(); ++i)
    p.row(static_cast<Eigen::Index>(i)) = predict_probs(model, xs[i]).transpose();
  return p;
}

double nuclear_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw ValidationError("nuclear norm of an empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

double accuracy(const SoftmaxClassifier& model, std::span<const LabeledSample> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data)
    if (pseudo_label(model, s.x) == s.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace dptm
