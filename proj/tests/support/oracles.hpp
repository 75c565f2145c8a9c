#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dinerdash/factor_graph.hpp"
#include "dinerdash/nn.hpp"
#include "dinerdash/rng.hpp"

namespace oracles {

using dinerdash::FactorGraphModel;
using dinerdash::LabeledSubstate;
using dinerdash::Rng;

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Random model: 1..3 variables with 2..4 categories, 1..3 factors, every
// variable in some scope, theta uniform in [-3, 3].
inline FactorGraphModel random_factor_graph(Rng& rng) {
  const int nvars = rng.uniform_int(1, 3);
  std::vector<int> cards(nvars);
  for (int& c : cards) c = rng.uniform_int(2, 4);
  const int nfactors = rng.uniform_int(1, 3);
  std::vector<std::vector<int>> scopes(nfactors);
  for (auto& s : scopes) {
    for (int v = 0; v < nvars; ++v)
      if (rng.uniform() < 0.5) s.push_back(v);
    if (s.empty()) s.push_back(rng.uniform_int(0, nvars - 1));
  }
  for (int v = 0; v < nvars; ++v) {
    bool covered = false;
    for (const auto& s : scopes) covered |= std::find(s.begin(), s.end(), v) != s.end();
    if (!covered) {
      auto& s = scopes[rng.uniform_int(0, nfactors - 1)];
      s.push_back(v);
      std::sort(s.begin(), s.end());
    }
  }
  FactorGraphModel model(cards, scopes);
  for (std::size_t f = 0; f < model.num_factors(); ++f)
    for (Eigen::Index i = 0; i < model.theta(f).size(); ++i) model.theta(f).data()[i] = rng.uniform() * 6.0 - 3.0;
  return model;
}

// Every full assignment of the model's variables, first variable slowest.
inline std::vector<std::vector<int>> all_assignments(const std::vector<int>& cards) {
  std::vector<std::vector<int>> out{{}};
  for (int c : cards) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out)
      for (int v = 0; v < c; ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

// Builds the normalized joint p(x, y) = prod_i phi_i / Z over every cell
// and conditions on x. The factor lookup is recomputed here from the scope
// definition rather than through FactorGraphModel::cell.
inline double joint_conditional(const FactorGraphModel& model, const std::vector<int>& x) {
  const auto& cards = model.cardinalities();
  auto factor_row = [&](std::size_t f, const std::vector<int>& assignment) {
    int row = 0;
    for (int v : model.scopes()[f]) row = row * cards[v] + assignment[v];
    return row;
  };
  auto unnormalized = [&](const std::vector<int>& assignment, int y) {
    double prod = 1.0;
    for (std::size_t f = 0; f < model.num_factors(); ++f) prod *= std::exp(model.theta(f)(factor_row(f, assignment), y));
    return prod;
  };
  double z = 0.0;
  for (const auto& a : all_assignments(cards)) z += unnormalized(a, 0) + unnormalized(a, 1);
  const double p0 = unnormalized(x, 0) / z;
  const double p1 = unnormalized(x, 1) / z;
  return p1 / (p0 + p1);
}

inline std::vector<LabeledSubstate> random_labeled_data(const FactorGraphModel& model, Rng& rng, int n) {
  std::vector<LabeledSubstate> data(n);
  for (auto& d : data) {
    for (int c : model.cardinalities()) d.x.push_back(rng.uniform_int(0, c - 1));
    d.y = rng.uniform() < 0.3 ? 1 : 0;
  }
  return data;
}

// Worst relative error between the analytic squared-loss gradient and a
// fourth-order central difference with step h, over every theta entry.
inline double squared_loss_gradient_error(FactorGraphModel model, const std::vector<LabeledSubstate>& data,
                                          double positive_weight, double h = 1e-3) {
  const auto grads = dinerdash::squared_loss_gradient(model, data, positive_weight);
  double worst = 0.0;
  for (std::size_t f = 0; f < model.num_factors(); ++f) {
    for (Eigen::Index i = 0; i < model.theta(f).size(); ++i) {
      double& th = model.theta(f).data()[i];
      const double keep = th;
      auto loss_at = [&](double delta) {
        th = keep + delta;
        return dinerdash::squared_loss(model, data, positive_weight);
      };
      const double fd = (-loss_at(2 * h) + 8 * loss_at(h) - 8 * loss_at(-h) + loss_at(-2 * h)) / (12 * h);
      th = keep;
      worst = std::max(worst, relative_error(grads[f].data()[i], fd));
    }
  }
  return worst;
}

// Random net: input 2..6, one to three layers of width 1..6 with random
// activations; dropout on hidden layers when `with_dropout`.
inline dinerdash::nn::DenseNet random_net(Rng& rng, bool with_dropout, uint64_t seed) {
  using namespace dinerdash::nn;
  const int in = rng.uniform_int(2, 6);
  const int depth = rng.uniform_int(1, 3);
  std::vector<LayerSpec> layers;
  for (int l = 0; l < depth; ++l) {
    LayerSpec s;
    s.width = rng.uniform_int(1, 6);
    s.activation = rng.uniform() < 0.6 ? Activation::kRelu : Activation::kIdentity;
    if (with_dropout && l + 1 < depth) s.dropout = 0.3;
    layers.push_back(s);
  }
  DenseNet net(in, layers, seed);
  for (auto& layer : net.layers())
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform() - 0.5;
  return net;
}

// Loss sum(C .* net(x)) in training mode with the dropout stream rewound
// before every evaluation, so all evaluations share one mask. Returns the
// worst relative error over all weights, biases and inputs.
inline double dense_gradient_error(dinerdash::nn::DenseNet net, Rng& rng, double h = 1e-5) {
  using dinerdash::nn::Matrix;
  const int batch = rng.uniform_int(1, 4);
  Matrix x(batch, net.input_width());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() * 4.0 - 2.0;
  Matrix c(batch, net.output_width());
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform() * 2.0 - 1.0;

  const uint64_t dropout_state = net.dropout_rng().state();
  auto loss = [&](const Matrix& input) {
    net.dropout_rng().set_state(dropout_state);
    return net.forward(input, true).cwiseProduct(c).sum();
  };
  net.dropout_rng().set_state(dropout_state);
  dinerdash::nn::ForwardCache cache;
  net.forward(x, true, &cache);
  const auto grads = net.backward(cache, c);

  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      double& w = layer.weight.data()[i];
      const double keep = w;
      w = keep + h;
      const double up = loss(x);
      w = keep - h;
      const double down = loss(x);
      w = keep;
      worst = std::max(worst, relative_error(grads.weight[l].data()[i], (up - down) / (2 * h)));
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      double& b = layer.bias[i];
      const double keep = b;
      b = keep + h;
      const double up = loss(x);
      b = keep - h;
      const double down = loss(x);
      b = keep;
      worst = std::max(worst, relative_error(grads.bias[l][i], (up - down) / (2 * h)));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    worst = std::max(worst, relative_error(grads.input.data()[i], (loss(xp) - loss(xm)) / (2 * h)));
  }
  return worst;
}

}  // namespace oracles
