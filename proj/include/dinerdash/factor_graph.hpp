#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dinerdash/features.hpp"

namespace dinerdash {

struct LabeledSubstate {
  Substate x;
  int y = 0;  // 1 when the expert chose the action
};

// Factor graph over observed variables x and the binary choice y:
//   p(x, y) = (1/Z) prod_i phi_i(x_i, y),   phi_i = exp(theta_i)
// Only p(y = 1 | x) is ever needed and Z cancels from it, so the model
// stores log-potentials and never builds the joint.
class FactorGraphModel {
 public:
  FactorGraphModel() = default;
  // Throws std::invalid_argument if a scope index is out of range, a scope
  // is empty, or some variable appears in no scope. Theta starts at 0.
  FactorGraphModel(std::vector<int> cardinalities, std::vector<std::vector<int>> scopes);

  std::size_t num_factors() const { return scopes_.size(); }
  const std::vector<int>& cardinalities() const { return cardinalities_; }
  const std::vector<std::vector<int>>& scopes() const { return scopes_; }

  // Row of factor f's table for the scope cell selected by x (mixed radix,
  // first scope variable most significant).
  int cell(std::size_t factor, std::span<const int> x) const;
  int num_cells(std::size_t factor) const { return static_cast<int>(theta_[factor].rows()); }

  // theta(f)(cell, y); column 0 is y = 0, column 1 is y = 1.
  Eigen::MatrixXd& theta(std::size_t factor) { return theta_[factor]; }
  const Eigen::MatrixXd& theta(std::size_t factor) const { return theta_[factor]; }
  double potential(std::size_t factor, int cell, int y) const;

  // sum_i theta_i(x_i, 1) - sum_i theta_i(x_i, 0)
  double log_odds(std::span<const int> x) const;
  // p(y = 1 | x) = sigmoid(log_odds). Throws on arity mismatch.
  double infer(std::span<const int> x) const;

 private:
  void check_arity(std::span<const int> x) const;

  std::vector<int> cardinalities_;
  std::vector<std::vector<int>> scopes_;
  std::vector<Eigen::MatrixXd> theta_;
};

double sigmoid(double z);

struct ClassCounts {
  long positive = 0;
  long negative = 0;
};
// Labeled data with identical sub-states merged.
using CountedSubstates = std::map<Substate, ClassCounts>;
CountedSubstates count_substates(std::span<const LabeledSubstate> data);

struct GraphTrainConfig {
  int max_epochs = 300;
  double initial_step = 4.0;
  double grad_tolerance = 1e-10;
  // Up-weight positives by negatives/positives (capped) in the squared loss.
  bool balance_classes = true;
  double max_positive_weight = 100.0;
};

struct GraphTrainResult {
  std::vector<double> loss_trace;  // weighted mean squared loss per epoch, first entry before training
  int positives = 0;
  int negatives = 0;
  double positive_weight = 1.0;
  double final_loss() const { return loss_trace.empty() ? 0.0 : loss_trace.back(); }
};

// Weighted squared loss  L = sum_t w_t (p(y=1|x_t) - y_t)^2 / sum_t w_t
// with w_t = positive_weight for y_t = 1 and 1 otherwise, and its gradient
// with respect to every theta table.
double squared_loss(const FactorGraphModel& model, std::span<const LabeledSubstate> data,
                    double positive_weight);
std::vector<Eigen::MatrixXd> squared_loss_gradient(const FactorGraphModel& model,
                                                   std::span<const LabeledSubstate> data,
                                                   double positive_weight);

// Full-batch gradient descent on the squared loss with a backtracking line
// search, so the training loss never increases. Throws std::invalid_argument
// on empty data and std::runtime_error on a non-finite loss.
GraphTrainResult graph_train(FactorGraphModel& model, std::span<const LabeledSubstate> data,
                             const GraphTrainConfig& config = {});
GraphTrainResult graph_train(FactorGraphModel& model, const CountedSubstates& data,
                             const GraphTrainConfig& config = {});

// Count-based policy for actions with a small sub-state space.
class MemoTable {
 public:
  struct Counts {
    long positive = 0;
    long total = 0;
  };

  MemoTable() = default;
  explicit MemoTable(std::vector<int> cardinalities) : cardinalities_(std::move(cardinalities)) {}

  void add(const Substate& x, int y);
  void fit(std::span<const LabeledSubstate> data);
  // positive / total, 0 for tuples never seen.
  double score(const Substate& x) const;

  const std::map<Substate, Counts>& entries() const { return entries_; }
  std::map<Substate, Counts>& entries() { return entries_; }
  const std::vector<int>& cardinalities() const { return cardinalities_; }

 private:
  std::vector<int> cardinalities_;
  std::map<Substate, Counts> entries_;
};

}  // namespace dinerdash
