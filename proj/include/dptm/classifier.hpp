#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dptm/grid.hpp"

namespace dptm {

struct LabeledSample {
  Grid x;
  int label = 0;
};

/// Multinomial logistic regression on flattened grids:
/// p(y | x) = softmax(W * vec(x) + b).
class SoftmaxClassifier {
 public:
  SoftmaxClassifier() = default;
  SoftmaxClassifier(int classes, std::size_t input_dim);
  SoftmaxClassifier(Eigen::MatrixXd weights, Eigen::VectorXd bias);

  int classes() const { return static_cast<int>(weights_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(weights_.cols()); }

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  Eigen::MatrixXd& weights() { return weights_; }
  Eigen::VectorXd& bias() { return bias_; }

  Eigen::VectorXd logits(const Grid& x) const;

  friend bool operator==(const SoftmaxClassifier& a, const SoftmaxClassifier& b) {
    return a.weights_ == b.weights_ && a.bias_ == b.bias_;
  }

 private:
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Max-subtracted softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

Eigen::VectorXd predict_probs(const SoftmaxClassifier& model, const Grid& x);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax_lowest(const Eigen::VectorXd& p);

int pseudo_label(const SoftmaxClassifier& model, const Grid& x);

/// Shannon entropy in nats with 0 ln 0 = 0. Throws ValidationError unless p
/// is nonnegative and sums to 1 within 1e-6.
double entropy(const Eigen::VectorXd& p);

/// Mean cross-entropy plus (weight_decay / 2) * ||W||_F^2.
double training_loss(const SoftmaxClassifier& model, std::span<const LabeledSample> data,
                     double weight_decay);

struct Gradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Closed-form gradient of training_loss:
///   dW = mean_i (p_i - onehot(y_i)) x_i^T + weight_decay * W,  db = mean_i (p_i - onehot(y_i)).
Gradient training_gradient(const SoftmaxClassifier& model, std::span<const LabeledSample> data,
                           double weight_decay);

/// Mini-batch SGD with heavy-ball momentum (v <- m v + g; theta <- theta - lr v),
/// starting from `model`. Shuffling is driven by cfg.seed.
SoftmaxClassifier train_ce(SoftmaxClassifier model, std::span<const LabeledSample> data,
                           const TrainConfig& cfg);

/// Rows are per-sample softmax outputs.
Eigen::MatrixXd probability_matrix(const SoftmaxClassifier& model, std::span<const Grid> xs);

/// Sum of singular values. Throws ValidationError on an empty matrix.
double nuclear_norm(const Eigen::MatrixXd& m);

double accuracy(const SoftmaxClassifier& model, std::span<const LabeledSample> data);

}  // namespace dptm
