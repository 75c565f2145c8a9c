#include "dinerdash/action.hpp"

#include <stdexcept>

namespace dinerdash {

Action Action::from_index(int index) {
  using namespace action_index;
  if (index < 0 || index >= kNumActions)
    throw std::out_of_range("action index " + std::to_string(index) + " outside [0, 56]");
  if (index == kWait) return {ActionKind::kWait};
  if (index < kTakeOrder) return {ActionKind::kMoveToTable, index - kMoveFirst};
  if (index >= kSeatFirst) {
    const int rel = index - kSeatFirst;
    return {ActionKind::kSeat, rel % kNumTables, rel / kNumTables};
  }
  static constexpr ActionKind kSingles[] = {
      ActionKind::kTakeOrder,   ActionKind::kSubmitOrders, ActionKind::kPickupFood,
      ActionKind::kServeFood,   ActionKind::kCollectBill,  ActionKind::kCleanTable,
      ActionKind::kReturnDishes, ActionKind::kMoveToKitchen};
  return {kSingles[index - kTakeOrder]};
}

int Action::index() const {
  using namespace action_index;
  switch (kind) {
    case ActionKind::kWait: return kWait;
    case ActionKind::kMoveToTable: return move_to_table(table);
    case ActionKind::kTakeOrder: return kTakeOrder;
    case ActionKind::kSubmitOrders: return kSubmitOrders;
    case ActionKind::kPickupFood: return kPickupFood;
    case ActionKind::kServeFood: return kServeFood;
    case ActionKind::kCollectBill: return kCollectBill;
    case ActionKind::kCleanTable: return kCleanTable;
    case ActionKind::kReturnDishes: return kReturnDishes;
    case ActionKind::kMoveToKitchen: return kMoveToKitchen;
    case ActionKind::kSeat: return seat(group, table);
  }
  return kWait;
}

std::string Action::name() const {
  switch (kind) {
    case ActionKind::kWait: return "WAIT";
    case ActionKind::kMoveToTable: return "MOVE_TO_TABLE(" + std::to_string(table + 1) + ")";
    case ActionKind::kTakeOrder: return "TAKE_ORDER";
    case ActionKind::kSubmitOrders: return "SUBMIT_ORDERS";
    case ActionKind::kPickupFood: return "PICKUP_FOOD";
    case ActionKind::kServeFood: return "SERVE_FOOD";
    case ActionKind::kCollectBill: return "COLLECT_BILL";
    case ActionKind::kCleanTable: return "CLEAN_TABLE";
    case ActionKind::kReturnDishes: return "RETURN_DISHES";
    case ActionKind::kMoveToKitchen: return "MOVE_TO_KITCHEN";
    case ActionKind::kSeat:
      return "SEAT(" + std::to_string(group) + "," + std::to_string(table + 1) + ")";
  }
  return "?";
}

}  // namespace dinerdash
