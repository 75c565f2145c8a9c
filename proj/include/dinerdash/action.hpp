#pragma once

#include <string>

#include "dinerdash/config.hpp"

namespace dinerdash {

inline constexpr int kNumActions = 57;

// Fixed index layout:
//   0        WAIT
//   1..6     MOVE_TO_TABLE(t), t = 1..6
//   7..14    TAKE_ORDER, SUBMIT_ORDERS, PICKUP_FOOD, SERVE_FOOD,
//            COLLECT_BILL, CLEAN_TABLE, RETURN_DISHES, MOVE_TO_KITCHEN
//   15..56   SEAT(g, t) = 15 + 6*g + t, queue slot g in 0..6, table t in 0..5
enum class ActionKind {
  kWait,
  kMoveToTable,
  kTakeOrder,
  kSubmitOrders,
  kPickupFood,
  kServeFood,
  kCollectBill,
  kCleanTable,
  kReturnDishes,
  kMoveToKitchen,
  kSeat,
};

struct Action {
  ActionKind kind = ActionKind::kWait;
  int table = -1;  // 0-based; MOVE_TO_TABLE and SEAT only
  int group = -1;  // queue slot; SEAT only

  // Throws std::out_of_range for indices outside [0, 56].
  static Action from_index(int index);
  int index() const;
  std::string name() const;

  bool operator==(const Action&) const = default;
};

namespace action_index {
inline constexpr int kWait = 0;
inline constexpr int kMoveFirst = 1;
inline constexpr int kTakeOrder = 7;
inline constexpr int kSubmitOrders = 8;
inline constexpr int kPickupFood = 9;
inline constexpr int kServeFood = 10;
inline constexpr int kCollectBill = 11;
inline constexpr int kCleanTable = 12;
inline constexpr int kReturnDishes = 13;
inline constexpr int kMoveToKitchen = 14;
inline constexpr int kSeatFirst = 15;

constexpr int move_to_table(int table) { return kMoveFirst + table; }
constexpr int seat(int group, int table) { return kSeatFirst + kNumTables * group + table; }
}  // namespace action_index

}  // namespace dinerdash
