#include "dinerdash/expert.hpp"

#include <algorithm>

#include "dinerdash/errors.hpp"

namespace dinerdash {

void ExpertConfig::validate() const {
  std::array<bool, kNumServiceTasks> seen{};
  for (ServiceTask t : priority) {
    const int i = static_cast<int>(t);
    if (i < 0 || i >= kNumServiceTasks - 1 || seen[i])
      throw ConfigError("expert priority must be a permutation of the service tasks");
    seen[i] = true;
  }
  if (urgency_threshold < 0) throw ConfigError("urgency_threshold must be >= 0");
}

ExpertPolicy::ExpertPolicy(ExpertConfig config) : config_(config) { config_.validate(); }

int expert_action(const Env& env, const ExpertConfig& config) {
  return expert_action(env.view(), env.config(), config);
}

int expert_action(const StateView& v, const EnvConfig& env_config, const ExpertConfig& config) {
  using namespace action_index;
  const ServiceBoard board = ServiceBoard::analyze(v, env_config);

  TaskOrder order = config.priority;
  if (config.urgency_threshold > 0 && board.seat_group >= 0 &&
      v.queue[board.seat_group].happiness < config.urgency_threshold) {
    std::rotate(order.begin(), std::find(order.begin(), order.end(), ServiceTask::kSeat),
                std::find(order.begin(), order.end(), ServiceTask::kSeat) + 1);
  }

  // Go to `table` (0-based) and do `here_action` there.
  auto at_table = [&](int table, int here_action) {
    return v.position == table + 1 ? here_action : move_to_table(table);
  };
  auto at_kitchen = [&](int here_action) { return v.position == 0 ? here_action : kMoveToKitchen; };

  switch (board.first_task(order)) {
    case ServiceTask::kServe: return at_table(board.serve_target, kServeFood);
    case ServiceTask::kReturn: return at_kitchen(kReturnDishes);
    case ServiceTask::kPickup: return at_kitchen(kPickupFood);
    case ServiceTask::kBill: return at_table(board.bill_target, kCollectBill);
    case ServiceTask::kOrder: return at_table(board.order_target, kTakeOrder);
    case ServiceTask::kSubmit: return at_kitchen(kSubmitOrders);
    case ServiceTask::kSeat: return seat(board.seat_group, board.seat_table);
    case ServiceTask::kClean: return at_table(board.clean_target, kCleanTable);
    case ServiceTask::kIdle: break;
  }
  return kWait;
}

}  // namespace dinerdash
