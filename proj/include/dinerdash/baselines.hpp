#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dinerdash/nn.hpp"
#include "dinerdash/policy.hpp"
#include "dinerdash/trajectory.hpp"

namespace dinerdash {

// Behaviour cloning: 40 -> hidden (ReLU) -> dropout -> 57 logits, trained
// by softmax cross-entropy on expert pairs. Inputs are divided per
// dimension by the declared range maximum.
struct BcPolicy {
  nn::DenseNet net;
  StateVec scale{};  // multiply each input entry by this

  Eigen::VectorXd logits(std::span<const double> state) const;

  // Text checkpoint: "dinerdash-bc 1", "scale" + 40 hex floats, then the
  // DenseNet layout.
  std::string to_text() const;
  static BcPolicy from_text(const std::string& text);
  void save(const std::string& path) const;
  static BcPolicy load(const std::string& path);
};

struct BcTrainConfig {
  int hidden = 128;
  double dropout = 0.5;
  double lr = 1e-3;
  int epochs = 20;
  int batch_size = 256;
  uint64_t seed = 0;
};

struct BcTrainResult {
  BcPolicy policy;
  std::vector<double> loss_trace;      // mean training loss per epoch
  std::vector<double> accuracy_trace;  // training-mode accuracy per epoch
};

// Throws std::invalid_argument on an empty dataset and std::runtime_error on
// a non-finite loss.
BcTrainResult bc_train(const Dataset& dataset, const EnvConfig& config, const BcTrainConfig& train = {});

// Argmax of the eval-mode logits, ties to the lowest index.
int bc_act(const BcPolicy& policy, std::span<const double> state);

double bc_accuracy(const BcPolicy& policy, const Dataset& dataset);

class BcAgent final : public Policy {
 public:
  explicit BcAgent(std::shared_ptr<const BcPolicy> policy, std::string name = "bc")
      : policy_(std::move(policy)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  int act(const Env& env) override { return bc_act(*policy_, env.encode_state()); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<BcAgent>(*this); }

 private:
  std::shared_ptr<const BcPolicy> policy_;
  std::string name_;
};

// Uniform over all 57 actions, ignoring the state.
int random_act(Rng& rng, std::span<const double> state);

// Reseeded from the episode seed (stream kPolicy) at every episode start.
class RandomAgent final : public Policy {
 public:
  std::string name() const override { return "random"; }
  void begin_episode(uint64_t seed) override { rng_ = Rng(seed, stream::kPolicy); }
  int act(const Env& env) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<RandomAgent>(*this); }

 private:
  Rng rng_;
};

}  // namespace dinerdash
