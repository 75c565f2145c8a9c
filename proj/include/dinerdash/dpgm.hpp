#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dinerdash/factor_graph.hpp"
#include "dinerdash/features.hpp"
#include "dinerdash/nn.hpp"
#include "dinerdash/policy.hpp"
#include "dinerdash/trajectory.hpp"

namespace dinerdash {

enum class ModelKind { kGraph, kMemo };

struct ActionStructure {
  int action = 0;
  ModelKind kind = ModelKind::kMemo;
  SubstateSelector selector;
  std::vector<std::vector<int>> factors;  // variable indices, graph actions only
};

// Per-action selectors and factor scopes, read from a JSON document:
//
//   {"format": "dinerdash-structures", "version": 1,
//    "actions": [
//      {"action": "SEAT", "model": "graph",
//       "variables": [{"name": "stage", "source": "table_stage[t]"},
//                     {"name": "mood", "source": "group_happiness[g]",
//                      "bins": [0, 1, 2, 3, 4, 5]}, ...],
//       "factors": [["stage"], ["mood"], ...]},
//      {"action": "TAKE_ORDER", "model": "memo", "variables": [...]}]}
//
// "action" is an action name (WAIT, TAKE_ORDER, ...), a family that expands
// over its indices (MOVE_TO_TABLE binds t; SEAT binds g and t), or an
// integer index. Sources may use the placeholders t and g inside brackets.
// A variable takes its natural discretization unless "categorical": n or
// "bins": [edges] is given. Every action must be covered exactly once.
class StructureSet {
 public:
  // Throws std::invalid_argument describing the first problem found.
  static StructureSet parse(std::string_view json_text, const EnvConfig& config);
  static StructureSet load_file(const std::string& path, const EnvConfig& config);
  static StructureSet defaults(const EnvConfig& config);
  static std::string_view default_json();

  const ActionStructure& operator[](int action) const { return actions_.at(static_cast<std::size_t>(action)); }
  const std::string& source_text() const { return source_; }
  const EnvConfig& env_config() const { return config_; }

 private:
  std::vector<ActionStructure> actions_;
  std::string source_;
  EnvConfig config_;
};

struct DpgmOutput {
  std::array<double, kNumActions> scores{};
  std::array<double, kNumActions> logits{};
};

enum class ActMode { kArgmax, kSample };

// Decomposed policy: one scorer per action (factor graph or memo table)
// followed by a dense reweighting network over the 57 scores.
class DpgmPolicy {
 public:
  DpgmPolicy(StructureSet structures, EnvConfig config, int hidden_width = 64, uint64_t seed = 0);

  const EnvConfig& env_config() const { return config_; }
  const StructureSet& structures() const { return structures_; }
  ModelKind kind(int action) const { return structures_[action].kind; }

  FactorGraphModel& graph(int action) { return *graphs_.at(static_cast<std::size_t>(action)); }
  const FactorGraphModel& graph(int action) const { return *graphs_.at(static_cast<std::size_t>(action)); }
  MemoTable& memo(int action) { return *memos_.at(static_cast<std::size_t>(action)); }
  const MemoTable& memo(int action) const { return *memos_.at(static_cast<std::size_t>(action)); }
  nn::DenseNet& net() { return net_; }
  const nn::DenseNet& net() const { return net_; }

  std::array<double, kNumActions> scores(std::span<const double> state) const;
  std::array<double, kNumActions> scores(const StateView& view) const;
  DpgmOutput forward(std::span<const double> state) const;

  // Argmax (ties to the lowest index) or a categorical draw from
  // softmax(logits) using `rng`.
  int act(std::span<const double> state, ActMode mode = ActMode::kArgmax, Rng* rng = nullptr) const;

  // JSON checkpoint holding the env config, the structure document, theta
  // tables, memo counts and the reweighting net. Bit-stable.
  std::string to_json() const;
  static DpgmPolicy from_json(std::string_view text);
  void save(const std::string& path) const;
  static DpgmPolicy load(const std::string& path);

 private:
  StructureSet structures_;
  EnvConfig config_;
  std::vector<std::optional<FactorGraphModel>> graphs_;
  std::vector<std::optional<MemoTable>> memos_;
  nn::DenseNet net_;
};

struct DpgmTrainConfig {
  GraphTrainConfig graph;
  int reweight_hidden = 64;
  int reweight_epochs = 10;
  int batch_size = 256;
  double lr = 1e-3;
  bool finetune = true;
  int finetune_epochs = 2;
  double finetune_lr = 1e-4;
  uint64_t seed = 0;
};

struct DpgmTrainReport {
  std::vector<int> actions_without_positives;
  std::array<double, kNumActions> graph_final_loss{};
  std::vector<double> reweight_loss;   // mean cross-entropy per epoch
  std::vector<double> reweight_accuracy;
  std::vector<double> finetune_loss;
  std::vector<double> finetune_accuracy;
};

struct DpgmTrainResult {
  DpgmPolicy policy;
  DpgmTrainReport report;
};

// 1. fits every graph action by graph_train and every memo action by counts,
// 2. trains the reweighting net by cross-entropy on frozen scores,
// 3. optionally fine-tunes theta and the net jointly (memo tables frozen).
DpgmTrainResult dpgm_train(const Dataset& dataset, const StructureSet& structures,
                           const DpgmTrainConfig& config = {});

// Fraction of transitions where the policy's argmax equals the recorded action.
double action_agreement(const DpgmPolicy& policy, const Dataset& dataset);

class DpgmAgent final : public Policy {
 public:
  explicit DpgmAgent(std::shared_ptr<const DpgmPolicy> policy, ActMode mode = ActMode::kArgmax,
                     std::string name = "dpgm");
  std::string name() const override { return name_; }
  void begin_episode(uint64_t seed) override { rng_ = Rng(seed, stream::kPolicy); }
  int act(const Env& env) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<DpgmAgent>(*this); }

 private:
  std::shared_ptr<const DpgmPolicy> policy_;
  ActMode mode_;
  std::string name_;
  Rng rng_;
};

}  // namespace dinerdash
