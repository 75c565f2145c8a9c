#include "dinerdash/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dinerdash {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FactorGraphModel::FactorGraphModel(std::vector<int> cardinalities, std::vector<std::vector<int>> scopes)
    : cardinalities_(std::move(cardinalities)), scopes_(std::move(scopes)) {
  std::vector<bool> covered(cardinalities_.size(), false);
  for (const auto& scope : scopes_) {
    if (scope.empty()) throw std::invalid_argument("factor scope must not be empty");
    long cells = 1;
    for (int v : scope) {
      if (v < 0 || static_cast<std::size_t>(v) >= cardinalities_.size())
        throw std::invalid_argument("factor scope variable " + std::to_string(v) + " out of range");
      covered[static_cast<std::size_t>(v)] = true;
      cells *= cardinalities_[static_cast<std::size_t>(v)];
    }
    theta_.push_back(Eigen::MatrixXd::Zero(cells, 2));
  }
  for (std::size_t v = 0; v < covered.size(); ++v)
    if (!covered[v]) throw std::invalid_argument("variable " + std::to_string(v) + " appears in no factor");
}

void FactorGraphModel::check_arity(std::span<const int> x) const {
  if (x.size() != cardinalities_.size())
    throw std::invalid_argument("substate arity " + std::to_string(x.size()) + ", model expects " +
                                std::to_string(cardinalities_.size()));
}

int FactorGraphModel::cell(std::size_t factor, std::span<const int> x) const {
  int c = 0;
  for (int v : scopes_[factor]) {
    const int card = cardinalities_[static_cast<std::size_t>(v)];
    c = c * card + std::clamp(x[static_cast<std::size_t>(v)], 0, card - 1);
  }
  return c;
}

double FactorGraphModel::potential(std::size_t factor, int cell, int y) const {
  return std::exp(theta_[factor](cell, y));
}

double FactorGraphModel::log_odds(std::span<const int> x) const {
  check_arity(x);
  double z = 0.0;
  for (std::size_t f = 0; f < scopes_.size(); ++f) {
    const int c = cell(f, x);
    z += theta_[f](c, 1) - theta_[f](c, 0);
  }
  return z;
}

double FactorGraphModel::infer(std::span<const int> x) const { return sigmoid(log_odds(x)); }

namespace {

// Identical sub-states are merged; weights already include class balancing.
struct WeightedRow {
  std::vector<int> cells;  // per factor
  double w_pos = 0.0;
  double w_neg = 0.0;
};

std::vector<WeightedRow> aggregate(const FactorGraphModel& model, const CountedSubstates& data,
                                   double positive_weight, double& total_weight) {
  std::vector<WeightedRow> rows;
  rows.reserve(data.size());
  total_weight = 0.0;
  for (const auto& [x, counts] : data) {
    WeightedRow row;
    model.log_odds(x);  // arity check
    for (std::size_t f = 0; f < model.num_factors(); ++f) row.cells.push_back(model.cell(f, x));
    row.w_pos = positive_weight * static_cast<double>(counts.positive);
    row.w_neg = static_cast<double>(counts.negative);
    total_weight += row.w_pos + row.w_neg;
    rows.push_back(std::move(row));
  }
  return rows;
}

double row_log_odds(const FactorGraphModel& m, const WeightedRow& r) {
  double z = 0.0;
  for (std::size_t f = 0; f < r.cells.size(); ++f) z += m.theta(f)(r.cells[f], 1) - m.theta(f)(r.cells[f], 0);
  return z;
}

double loss_of(const FactorGraphModel& m, const std::vector<WeightedRow>& rows, double total) {
  double l = 0.0;
  for (const auto& r : rows) {
    const double p = sigmoid(row_log_odds(m, r));
    l += r.w_pos * (p - 1.0) * (p - 1.0) + r.w_neg * p * p;
  }
  return l / total;
}

std::vector<Eigen::MatrixXd> grad_of(const FactorGraphModel& m, const std::vector<WeightedRow>& rows,
                                     double total) {
  std::vector<Eigen::MatrixXd> g;
  for (std::size_t f = 0; f < m.num_factors(); ++f) g.push_back(Eigen::MatrixXd::Zero(m.num_cells(f), 2));
  for (const auto& r : rows) {
    const double p = sigmoid(row_log_odds(m, r));
    const double dz = (2.0 * r.w_pos * (p - 1.0) + 2.0 * r.w_neg * p) * p * (1.0 - p) / total;
    for (std::size_t f = 0; f < r.cells.size(); ++f) {
      g[f](r.cells[f], 1) += dz;
      g[f](r.cells[f], 0) -= dz;
    }
  }
  return g;
}

}  // namespace

CountedSubstates count_substates(std::span<const LabeledSubstate> data) {
  CountedSubstates out;
  for (const auto& d : data) {
    auto& c = out[d.x];
    (d.y ? c.positive : c.negative)++;
  }
  return out;
}

double squared_loss(const FactorGraphModel& model, std::span<const LabeledSubstate> data, double positive_weight) {
  double total = 0.0;
  const auto rows = aggregate(model, count_substates(data), positive_weight, total);
  return total > 0 ? loss_of(model, rows, total) : 0.0;
}

std::vector<Eigen::MatrixXd> squared_loss_gradient(const FactorGraphModel& model,
                                                   std::span<const LabeledSubstate> data,
                                                   double positive_weight) {
  double total = 0.0;
  const auto rows = aggregate(model, count_substates(data), positive_weight, total);
  return grad_of(model, rows, total > 0 ? total : 1.0);
}

GraphTrainResult graph_train(FactorGraphModel& model, std::span<const LabeledSubstate> data,
                             const GraphTrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("graph_train: empty data");
  return graph_train(model, count_substates(data), config);
}

GraphTrainResult graph_train(FactorGraphModel& model, const CountedSubstates& data,
                             const GraphTrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("graph_train: empty data");
  GraphTrainResult result;
  for (const auto& [x, c] : data) {
    result.positives += static_cast<int>(c.positive);
    result.negatives += static_cast<int>(c.negative);
  }
  if (config.balance_classes && result.positives > 0 && result.negatives > result.positives)
    result.positive_weight = std::min(config.max_positive_weight,
                                      static_cast<double>(result.negatives) / result.positives);

  double total = 0.0;
  const auto rows = aggregate(model, data, result.positive_weight, total);
  double loss = loss_of(model, rows, total);
  if (!std::isfinite(loss)) throw std::runtime_error("graph_train: non-finite loss");
  result.loss_trace.push_back(loss);

  double step = config.initial_step;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto grad = grad_of(model, rows, total);
    double gnorm2 = 0.0, gmax = 0.0;
    for (const auto& g : grad) {
      gnorm2 += g.squaredNorm();
      gmax = std::max(gmax, g.cwiseAbs().maxCoeff());
    }
    if (gmax < config.grad_tolerance) break;

    std::vector<Eigen::MatrixXd> saved;
    for (std::size_t f = 0; f < model.num_factors(); ++f) saved.push_back(model.theta(f));
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t f = 0; f < model.num_factors(); ++f) model.theta(f) = saved[f] - step * grad[f];
      const double trial = loss_of(model, rows, total);
      if (!std::isfinite(trial)) throw std::runtime_error("graph_train: non-finite loss");
      if (trial <= loss - 1e-4 * step * gnorm2) {
        loss = trial;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      for (std::size_t f = 0; f < model.num_factors(); ++f) model.theta(f) = saved[f];
      break;
    }
    result.loss_trace.push_back(loss);
  }
  return result;
}

void MemoTable::add(const Substate& x, int y) {
  auto& c = entries_[x];
  ++c.total;
  if (y) ++c.positive;
}

void MemoTable::fit(std::span<const LabeledSubstate> data) {
  for (const auto& d : data) add(d.x, d.y);
}

double MemoTable::score(const Substate& x) const {
  const auto it = entries_.find(x);
  if (it == entries_.end() || it->second.total == 0) return 0.0;
  return static_cast<double>(it->second.positive) / static_cast<double>(it->second.total);
}

}  // namespace dinerdash
