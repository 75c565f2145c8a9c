#pragma once

#include <array>
#include <span>

#include "dinerdash/config.hpp"
#include "dinerdash/env.hpp"

namespace dinerdash {

// Outstanding service work, in the default priority order.
enum class ServiceTask : int {
  kServe = 0,   // hands hold food
  kReturn = 1,  // hands hold dirty dishes
  kPickup = 2,  // a dish is ready and hands are empty
  kBill = 3,
  kOrder = 4,
  kSubmit = 5,
  kSeat = 6,
  kClean = 7,
  kIdle = 8,
};
inline constexpr int kNumServiceTasks = 9;

using TaskOrder = std::array<ServiceTask, kNumServiceTasks - 1>;
inline constexpr TaskOrder kDefaultTaskOrder = {
    ServiceTask::kServe, ServiceTask::kReturn, ServiceTask::kPickup, ServiceTask::kBill,
    ServiceTask::kOrder, ServiceTask::kSubmit, ServiceTask::kSeat,   ServiceTask::kClean};

const char* task_name(ServiceTask t);

// Summary of what the restaurant needs right now, computed from the policy-
// visible state only. Targets are 0-based tables / queue slots, -1 if none.
// "Most urgent" means lowest happiness, ties to the lowest index.
struct ServiceBoard {
  std::array<bool, kNumServiceTasks> active{};
  int serve_target = -1;  // table whose food is in hand
  int bill_target = -1;
  int order_target = -1;
  int clean_target = -1;  // prefers dirty tables some waiting group fits
  int seat_group = -1;    // most urgent group that fits an empty table
  int seat_table = -1;    // smallest fitting empty table for seat_group
  std::array<int, kQueueSlots> best_fit{};  // per slot: smallest fitting empty table

  static ServiceBoard analyze(const StateView& view, const EnvConfig& config);

  // First active task in the given order, or kIdle.
  ServiceTask first_task(std::span<const ServiceTask> order) const;
  ServiceTask phase() const { return first_task(kDefaultTaskOrder); }
};

}  // namespace dinerdash
