#include "dinerdash/service.hpp"

namespace dinerdash {

const char* task_name(ServiceTask t) {
  switch (t) {
    case ServiceTask::kServe: return "serve";
    case ServiceTask::kReturn: return "return";
    case ServiceTask::kPickup: return "pickup";
    case ServiceTask::kBill: return "bill";
    case ServiceTask::kOrder: return "order";
    case ServiceTask::kSubmit: return "submit";
    case ServiceTask::kSeat: return "seat";
    case ServiceTask::kClean: return "clean";
    case ServiceTask::kIdle: return "idle";
  }
  return "?";
}

namespace {

int most_urgent_table(const StateView& v, TableStage stage) {
  int best = -1;
  for (int t = 0; t < kNumTables; ++t) {
    if (v.tables[t].stage != stage) continue;
    if (best < 0 || v.tables[t].happiness < v.tables[best].happiness) best = t;
  }
  return best;
}

}  // namespace

ServiceBoard ServiceBoard::analyze(const StateView& v, const EnvConfig& config) {
  ServiceBoard b;
  b.best_fit.fill(-1);
  const bool hands_empty = v.hands == hands::kEmpty;

  if (hands::is_food(v.hands)) b.serve_target = hands::food_table(v.hands);
  b.active[static_cast<int>(ServiceTask::kServe)] = b.serve_target >= 0;
  b.active[static_cast<int>(ServiceTask::kReturn)] = v.hands == hands::kDirtyDishes;

  bool food_ready = false;
  bool pending = false;
  for (const auto& t : v.tables) {
    food_ready = food_ready || t.food_ready;
    pending = pending || t.stage == TableStage::kOrderTaken;
  }
  b.active[static_cast<int>(ServiceTask::kPickup)] = hands_empty && food_ready;

  b.bill_target = most_urgent_table(v, TableStage::kAwaitBill);
  b.order_target = most_urgent_table(v, TableStage::kAwaitOrder);
  b.active[static_cast<int>(ServiceTask::kBill)] = b.bill_target >= 0;
  b.active[static_cast<int>(ServiceTask::kOrder)] = b.order_target >= 0;
  b.active[static_cast<int>(ServiceTask::kSubmit)] = pending;

  for (int g = 0; g < kQueueSlots; ++g) {
    if (!v.queue[g].present()) continue;
    for (int t = 0; t < kNumTables; ++t) {
      if (v.tables[t].stage != TableStage::kEmpty || v.queue[g].group_size > config.table_sizes[t]) continue;
      const int cur = b.best_fit[g];
      if (cur < 0 || config.table_sizes[t] < config.table_sizes[cur]) b.best_fit[g] = t;
    }
    if (b.best_fit[g] < 0) continue;
    if (b.seat_group < 0 || v.queue[g].happiness < v.queue[b.seat_group].happiness) b.seat_group = g;
  }
  if (b.seat_group >= 0) b.seat_table = b.best_fit[b.seat_group];
  b.active[static_cast<int>(ServiceTask::kSeat)] = b.seat_group >= 0;

  int fallback = -1;
  for (int t = 0; t < kNumTables && b.clean_target < 0; ++t) {
    if (v.tables[t].stage != TableStage::kDirty) continue;
    if (fallback < 0) fallback = t;
    for (const auto& g : v.queue) {
      if (g.present() && g.group_size <= config.table_sizes[t]) {
        b.clean_target = t;
        break;
      }
    }
  }
  if (b.clean_target < 0) b.clean_target = fallback;
  b.active[static_cast<int>(ServiceTask::kClean)] = hands_empty && b.clean_target >= 0;
  b.active[static_cast<int>(ServiceTask::kIdle)] = true;
  return b;
}

ServiceTask ServiceBoard::first_task(std::span<const ServiceTask> order) const {
  for (ServiceTask t : order)
    if (active[static_cast<int>(t)]) return t;
  return ServiceTask::kIdle;
}

}  // namespace dinerdash
