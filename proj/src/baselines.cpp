#include "dinerdash/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dinerdash/errors.hpp"

namespace dinerdash {

Eigen::VectorXd BcPolicy::logits(std::span<const double> state) const {
  if (state.size() != kStateDim) throw std::invalid_argument("BC input must have 40 entries");
  StateVec x{};
  for (int i = 0; i < kStateDim; ++i) x[i] = state[static_cast<std::size_t>(i)] * scale[i];
  return net.predict(x);
}

std::string BcPolicy::to_text() const {
  std::ostringstream out;
  out << "dinerdash-bc 1\nscale";
  char buf[40];
  for (double s : scale) {
    std::snprintf(buf, sizeof(buf), " %a", s);
    out << buf;
  }
  out << "\n";
  net.save(out);
  return out.str();
}

BcPolicy BcPolicy::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  if (!(in >> tok) || tok != "dinerdash-bc" || !(in >> tok) || tok != "1")
    throw DataError("not a BC checkpoint");
  if (!(in >> tok) || tok != "scale") throw DataError("BC checkpoint: missing scale");
  BcPolicy p;
  for (double& s : p.scale) {
    if (!(in >> tok)) throw DataError("BC checkpoint: truncated scale");
    s = std::strtod(tok.c_str(), nullptr);
  }
  p.net = nn::DenseNet::load(in);
  if (p.net.input_width() != kStateDim || p.net.output_width() != kNumActions)
    throw DataError("BC checkpoint: net must map 40 -> 57");
  return p;
}

void BcPolicy::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_text();
}

BcPolicy BcPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

BcTrainResult bc_train(const Dataset& dataset, const EnvConfig& config, const BcTrainConfig& train) {
  const std::size_t n = dataset.transitions.size();
  if (n == 0) throw std::invalid_argument("bc_train: empty dataset");
  BcTrainResult result;
  BcPolicy& policy = result.policy;
  policy.net = nn::DenseNet(kStateDim,
                            {{train.hidden, nn::Activation::kRelu, train.dropout},
                             {kNumActions, nn::Activation::kIdentity, 0.0}},
                            train.seed);
  const StateVec hi = state_upper_bounds(config);
  for (int i = 0; i < kStateDim; ++i) policy.scale[i] = hi[i] > 0 ? 1.0 / hi[i] : 1.0;

  nn::Matrix inputs(static_cast<Eigen::Index>(n), kStateDim);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& tr = dataset.transitions[i];
    for (int d = 0; d < kStateDim; ++d) inputs(static_cast<Eigen::Index>(i), d) = tr.state[d] * policy.scale[d];
    labels[i] = tr.action;
  }

  nn::Optimizer opt({nn::OptimizerConfig::Algorithm::kAdam, train.lr});
  Rng shuffle_rng(train.seed, stream::kShuffle);
  std::vector<std::size_t> order(n);
  const std::size_t batch = static_cast<std::size_t>(std::max(1, train.batch_size));
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<int>(i - 1)))]);
    double loss_sum = 0.0;
    long correct = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      nn::Matrix xb(static_cast<Eigen::Index>(end - start), kStateDim);
      std::vector<int> yb(end - start);
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = inputs.row(static_cast<Eigen::Index>(order[k]));
        yb[k - start] = labels[order[k]];
      }
      nn::ForwardCache cache;
      const nn::Matrix out = policy.net.forward(xb, true, &cache);
      const auto ce = nn::softmax_cross_entropy(out, yb);
      if (!std::isfinite(ce.loss)) throw std::runtime_error("bc_train: non-finite loss");
      const auto grads = policy.net.backward(cache, ce.grad);
      const auto params = policy.net.parameters(grads);
      opt.step(params);
      loss_sum += ce.loss * static_cast<double>(end - start);
      correct += ce.correct;
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(n));
    result.accuracy_trace.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  return result;
}

int bc_act(const BcPolicy& policy, std::span<const double> state) {
  const Eigen::VectorXd logits = policy.logits(state);
  return nn::argmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
}

double bc_accuracy(const BcPolicy& policy, const Dataset& dataset) {
  if (dataset.transitions.empty()) return 0.0;
  long hits = 0;
  for (const Transition& tr : dataset.transitions) hits += bc_act(policy, tr.state) == tr.action;
  return static_cast<double>(hits) / static_cast<double>(dataset.transitions.size());
}

int random_act(Rng& rng, std::span<const double> state) {
  (void)state;
  return rng.uniform_int(0, kNumActions - 1);
}

int RandomAgent::act(const Env& env) {
  (void)env;
  return random_act(rng_, {});
}

}  // namespace dinerdash
