#pragma once

#include "dinerdash/policy.hpp"
#include "dinerdash/service.hpp"

namespace dinerdash {

struct ExpertConfig {
  // Permutation of the eight non-idle service tasks; WAIT comes last.
  TaskOrder priority = kDefaultTaskOrder;
  // A seatable group below this happiness jumps the queue of tasks.
  // 0 disables the override.
  double urgency_threshold = 0.0;

  // Throws ConfigError unless priority is a permutation.
  void validate() const;
};

// Scripted demonstrator. Memoryless: depends only on the encoded state and
// the table sizes. Always returns a legal action.
int expert_action(const Env& env, const ExpertConfig& config = {});
int expert_action(const StateView& view, const EnvConfig& env_config, const ExpertConfig& config = {});

class ExpertPolicy final : public Policy {
 public:
  explicit ExpertPolicy(ExpertConfig config = {});
  std::string name() const override { return "expert"; }
  int act(const Env& env) override { return expert_action(env, config_); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ExpertPolicy>(*this); }

 private:
  ExpertConfig config_;
};

}  // namespace dinerdash
