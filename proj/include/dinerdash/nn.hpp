#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dinerdash/rng.hpp"

// Small dense-network kernel: fully connected layers, ReLU, inverted
// dropout, softmax cross-entropy and first-order optimizers. Batches are
// row-per-sample matrices.
namespace dinerdash::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { kIdentity, kRelu };

struct LayerSpec {
  int width = 0;
  Activation activation = Activation::kIdentity;
  double dropout = 0.0;  // applied to this layer's output in training mode
};

struct DenseLayer {
  Matrix weight;  // out x in
  RowVector bias;
  Activation activation = Activation::kIdentity;
  double dropout = 0.0;
};

struct ForwardCache {
  std::vector<Matrix> inputs;  // input of every layer
  std::vector<Matrix> pre;     // pre-activation of every layer
  std::vector<Matrix> masks;   // scaled dropout masks; empty when unused
};

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<RowVector> bias;
  Matrix input;
};

// Mutable view of one parameter tensor and its gradient, flattened.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  const double* grad = nullptr;
  std::size_t size = 0;
};

class DenseNet {
 public:
  DenseNet() = default;
  // Weights ~ U(-sqrt(6/(in+out)), +sqrt(6/(in+out))) from stream kInit of
  // `seed`, biases zero. Dropout masks draw from stream kDropout.
  DenseNet(int input_width, const std::vector<LayerSpec>& layers, uint64_t seed);

  int input_width() const { return input_width_; }
  int output_width() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  // Training-mode forward draws dropout masks: for each dropout layer, one
  // uniform per (row, unit) in row-major order; a unit is kept when the draw
  // is >= rate and then scaled by 1 / (1 - rate). Eval mode never drops.
  Matrix forward(const Matrix& x, bool train, ForwardCache* cache = nullptr);
  Matrix predict(const Matrix& x) const;
  Eigen::VectorXd predict(std::span<const double> x) const;

  Gradients backward(const ForwardCache& cache, const Matrix& grad_output) const;

  // Parameter views paired with gradients, named "layer<i>.weight"/".bias".
  std::vector<ParamRef> parameters(const Gradients& grads);

  Rng& dropout_rng() { return dropout_rng_; }

  // Text checkpoint; see save() for the layout.
  void save(std::ostream& out) const;
  static DenseNet load(std::istream& in);
  std::string to_text() const;
  static DenseNet from_text(const std::string& text);

 private:
  int input_width_ = 0;
  std::vector<DenseLayer> layers_;
  Rng dropout_rng_;
};

struct CrossEntropy {
  double loss = 0.0;
  Eigen::VectorXd grad;  // d loss / d logits
};

// -log softmax(logits)[label] with max-subtraction. Throws
// std::out_of_range for a bad label.
CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label);

// Mean loss over rows; the gradient is already divided by the batch size.
struct BatchCrossEntropy {
  double loss = 0.0;
  Matrix grad;
  int correct = 0;  // rows whose argmax equals the label
};
BatchCrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

Eigen::VectorXd softmax(std::span<const double> logits);

// Index of the largest entry, ties to the lowest index.
int argmax(std::span<const double> values);

struct OptimizerConfig {
  enum class Algorithm { kSgd, kAdam };
  Algorithm algorithm = Algorithm::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// SGD:  p -= lr * g
// Adam: m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2;
//       p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  // Throws std::runtime_error naming the parameter when a gradient is not
  // finite (nothing is updated), std::invalid_argument on shape changes.
  void step(std::span<const ParamRef> params);

  const OptimizerConfig& config() const { return config_; }
  long steps() const { return t_; }

 private:
  OptimizerConfig config_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace dinerdash::nn
