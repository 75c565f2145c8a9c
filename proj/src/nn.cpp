#include "dinerdash/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dinerdash/errors.hpp"

namespace dinerdash::nn {

namespace {

void apply_activation(Activation a, Matrix& m) {
  if (a == Activation::kRelu) m = m.cwiseMax(0.0);
}

const char* activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw DataError("densenet checkpoint: unknown activation '" + s + "'");
}

void write_hex(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  out << buf;
}

double read_hex(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw DataError("densenet checkpoint: truncated");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw DataError("densenet checkpoint: bad number '" + tok + "'");
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word)
    throw DataError("densenet checkpoint: expected '" + word + "', got '" + tok + "'");
}

}  // namespace

DenseNet::DenseNet(int input_width, const std::vector<LayerSpec>& layers, uint64_t seed)
    : input_width_(input_width), dropout_rng_(seed, stream::kDropout) {
  if (input_width < 1 || layers.empty()) throw std::invalid_argument("DenseNet: empty architecture");
  Rng init(seed, stream::kInit);
  int in = input_width;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& spec = layers[i];
    if (spec.width < 1) throw std::invalid_argument("DenseNet: layer width must be >= 1");
    if (!(spec.dropout >= 0.0 && spec.dropout < 1.0))
      throw std::invalid_argument("DenseNet: dropout rate must be in [0, 1)");
    DenseLayer layer;
    layer.weight.resize(spec.width, in);
    const double limit = std::sqrt(6.0 / (in + spec.width));
    for (int r = 0; r < spec.width; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = (2.0 * init.uniform() - 1.0) * limit;
    layer.bias = RowVector::Zero(spec.width);
    layer.activation = spec.activation;
    layer.dropout = spec.dropout;
    layers_.push_back(std::move(layer));
    in = spec.width;
  }
}

int DenseNet::output_width() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

Matrix DenseNet::forward(const Matrix& x, bool train, ForwardCache* cache) {
  if (x.cols() != input_width_)
    throw std::invalid_argument("DenseNet: input width " + std::to_string(x.cols()) + ", expected " +
                                std::to_string(input_width_));
  if (cache) *cache = ForwardCache{};
  Matrix h = x;
  for (const DenseLayer& layer : layers_) {
    Matrix pre = (h * layer.weight.transpose()).rowwise() + layer.bias;
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(pre);
    }
    h = std::move(pre);
    apply_activation(layer.activation, h);
    Matrix mask;
    if (train && layer.dropout > 0.0) {
      const double scale = 1.0 / (1.0 - layer.dropout);
      mask.resize(h.rows(), h.cols());
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          mask(r, c) = dropout_rng_.uniform() >= layer.dropout ? scale : 0.0;
      h = h.cwiseProduct(mask);
    }
    if (cache) cache->masks.push_back(std::move(mask));
  }
  return h;
}

Matrix DenseNet::predict(const Matrix& x) const {
  if (x.cols() != input_width_)
    throw std::invalid_argument("DenseNet: input width " + std::to_string(x.cols()) + ", expected " +
                                std::to_string(input_width_));
  Matrix h = x;
  for (const DenseLayer& layer : layers_) {
    h = (h * layer.weight.transpose()).rowwise() + layer.bias;
    apply_activation(layer.activation, h);
  }
  return h;
}

Eigen::VectorXd DenseNet::predict(std::span<const double> x) const {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  return predict(row).row(0).transpose();
}

Gradients DenseNet::backward(const ForwardCache& cache, const Matrix& grad_output) const {
  if (cache.inputs.size() != layers_.size())
    throw std::invalid_argument("DenseNet::backward: cache does not match network");
  if (grad_output.rows() != cache.inputs.front().rows() || grad_output.cols() != output_width())
    throw std::invalid_argument("DenseNet::backward: gradient shape mismatch");
  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Matrix delta = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const DenseLayer& layer = layers_[i];
    if (cache.masks[i].size() > 0) delta = delta.cwiseProduct(cache.masks[i]);
    if (layer.activation == Activation::kRelu)
      delta = delta.cwiseProduct((cache.pre[i].array() > 0.0).cast<double>().matrix());
    g.weight[i] = delta.transpose() * cache.inputs[i];
    g.bias[i] = delta.colwise().sum();
    delta = delta * layer.weight;
  }
  g.input = std::move(delta);
  return g;
}

std::vector<ParamRef> DenseNet::parameters(const Gradients& grads) {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    out.push_back({prefix + ".weight", layers_[i].weight.data(), grads.weight.at(i).data(),
                   static_cast<std::size_t>(layers_[i].weight.size())});
    out.push_back({prefix + ".bias", layers_[i].bias.data(), grads.bias.at(i).data(),
                   static_cast<std::size_t>(layers_[i].bias.size())});
  }
  return out;
}

// Layout (whitespace separated, numbers in C99 hex-float so save/load is exact):
//   dinerdash-densenet 1
//   input <width>
//   layers <count>
//   layer <in> <out> <relu|identity> <dropout>
//   weight <out*in values, row-major>
//   bias <out values>
//   ... repeated per layer ...
//   rng <dropout stream state, decimal>
void DenseNet::save(std::ostream& out) const {
  out << "dinerdash-densenet 1\n";
  out << "input " << input_width_ << "\n";
  out << "layers " << layers_.size() << "\n";
  for (const DenseLayer& layer : layers_) {
    out << "layer " << layer.weight.cols() << " " << layer.weight.rows() << " "
        << activation_name(layer.activation) << " ";
    write_hex(out, layer.dropout);
    out << "\nweight";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        out << " ";
        write_hex(out, layer.weight(r, c));
      }
    out << "\nbias";
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c) {
      out << " ";
      write_hex(out, layer.bias(c));
    }
    out << "\n";
  }
  out << "rng " << dropout_rng_.state() << "\n";
}

DenseNet DenseNet::load(std::istream& in) {
  expect(in, "dinerdash-densenet");
  expect(in, "1");
  DenseNet net;
  std::size_t count = 0;
  expect(in, "input");
  if (!(in >> net.input_width_) || net.input_width_ < 1) throw DataError("densenet checkpoint: bad input width");
  expect(in, "layers");
  if (!(in >> count) || count == 0) throw DataError("densenet checkpoint: bad layer count");
  int prev = net.input_width_;
  for (std::size_t i = 0; i < count; ++i) {
    expect(in, "layer");
    int fan_in = 0, fan_out = 0;
    std::string act;
    if (!(in >> fan_in >> fan_out >> act)) throw DataError("densenet checkpoint: bad layer header");
    if (fan_in != prev || fan_out < 1) throw DataError("densenet checkpoint: layer widths do not chain");
    DenseLayer layer;
    layer.activation = parse_activation(act);
    layer.dropout = read_hex(in);
    expect(in, "weight");
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = read_hex(in);
    expect(in, "bias");
    layer.bias.resize(fan_out);
    for (int c = 0; c < fan_out; ++c) layer.bias(c) = read_hex(in);
    net.layers_.push_back(std::move(layer));
    prev = fan_out;
  }
  expect(in, "rng");
  uint64_t state = 0;
  if (!(in >> state)) throw DataError("densenet checkpoint: bad rng state");
  net.dropout_rng_.set_state(state);
  return net;
}

std::string DenseNet::to_text() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

DenseNet DenseNet::from_text(const std::string& text) {
  std::istringstream in(text);
  return load(in);
}

Eigen::VectorXd softmax(std::span<const double> logits) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(logits.size()));
  double mx = -INFINITY;
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p(static_cast<Eigen::Index>(i)) = std::exp(logits[i] - mx);
    sum += p(static_cast<Eigen::Index>(i));
  }
  return p / sum;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
  double mx = -INFINITY;
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  CrossEntropy out;
  out.loss = std::log(sum) - (logits[label] - mx);
  out.grad.resize(static_cast<Eigen::Index>(logits.size()));
  for (std::size_t i = 0; i < logits.size(); ++i)
    out.grad(static_cast<Eigen::Index>(i)) = std::exp(logits[i] - mx) / sum;
  out.grad(label) -= 1.0;
  return out;
}

BatchCrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw std::invalid_argument("softmax_cross_entropy: batch size mismatch");
  BatchCrossEntropy out;
  out.grad.resize(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 0 || label >= logits.cols())
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
    Eigen::Index best = 0;
    const double mx = logits.row(r).maxCoeff(&best);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double e = std::exp(logits(r, c) - mx);
      out.grad(r, c) = e;
      sum += e;
    }
    out.loss += (std::log(sum) - (logits(r, label) - mx)) * inv;
    out.grad.row(r) *= inv / sum;
    out.grad(r, label) -= inv;
    // maxCoeff returns the first maximal index
    if (best == label) ++out.correct;
  }
  return out;
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

void Optimizer::step(std::span<const ParamRef> params) {
  for (const ParamRef& p : params)
    for (std::size_t i = 0; i < p.size; ++i)
      if (!std::isfinite(p.grad[i])) throw std::runtime_error("non-finite gradient in parameter " + p.name);

  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k].assign(params[k].size, 0.0);
      v_[k].assign(params[k].size, 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("optimizer: parameter count changed");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (m_[k].size() != params[k].size)
      throw std::invalid_argument("optimizer: shape of " + params[k].name + " changed");

  ++t_;
  const auto& c = config_;
  if (c.algorithm == OptimizerConfig::Algorithm::kSgd) {
    for (const ParamRef& p : params)
      for (std::size_t i = 0; i < p.size; ++i) p.value[i] -= c.lr * p.grad[i];
    return;
  }
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamRef& p = params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size; ++i) {
      const double g = p.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      p.value[i] -= c.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.eps);
    }
  }
}

}  // namespace dinerdash::nn
