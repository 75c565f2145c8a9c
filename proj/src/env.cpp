#include "dinerdash/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dinerdash {

const char* stage_name(TableStage s) {
  switch (s) {
    case TableStage::kEmpty: return "EMPTY";
    case TableStage::kAwaitOrder: return "AWAIT_ORDER";
    case TableStage::kOrderTaken: return "ORDER_TAKEN";
    case TableStage::kCooking: return "COOKING";
    case TableStage::kEating: return "EATING";
    case TableStage::kAwaitBill: return "AWAIT_BILL";
    case TableStage::kDirty: return "DIRTY";
  }
  return "?";
}

std::vector<int> EnvState::pending_orders() const {
  std::vector<int> out;
  for (int t = 0; t < kNumTables; ++t)
    if (tables[t].stage == TableStage::kOrderTaken) out.push_back(t);
  return out;
}

StateView StateView::decode(std::span<const double> vec) {
  if (vec.size() != kStateDim)
    throw std::invalid_argument("state vector must have 40 entries, got " +
                                std::to_string(vec.size()));
  StateView v;
  for (int t = 0; t < kNumTables; ++t) {
    const double* row = vec.data() + 4 * t;
    v.tables[t].stage = static_cast<TableStage>(std::clamp(static_cast<int>(std::lround(row[0])), 0, 6));
    v.tables[t].group_size = static_cast<int>(std::lround(row[1]));
    v.tables[t].happiness = row[2];
    v.tables[t].food_ready = row[3] > 0.5;
  }
  for (int g = 0; g < kQueueSlots; ++g) {
    v.queue[g].group_size = static_cast<int>(std::lround(vec[24 + 2 * g]));
    v.queue[g].happiness = vec[24 + 2 * g + 1];
  }
  v.position = static_cast<int>(std::lround(vec[38]));
  v.hands = static_cast<int>(std::lround(vec[39]));
  return v;
}

StateVec StateView::encode() const {
  StateVec out{};
  for (int t = 0; t < kNumTables; ++t) {
    out[4 * t] = static_cast<double>(tables[t].stage);
    out[4 * t + 1] = tables[t].group_size;
    out[4 * t + 2] = tables[t].happiness;
    out[4 * t + 3] = tables[t].food_ready ? 1.0 : 0.0;
  }
  for (int g = 0; g < kQueueSlots; ++g) {
    out[24 + 2 * g] = queue[g].group_size;
    out[24 + 2 * g + 1] = queue[g].happiness;
  }
  out[38] = position;
  out[39] = hands;
  return out;
}

StateVec state_upper_bounds(const EnvConfig& config) {
  StateVec hi{};
  const double gmax = std::max(config.group_size_max, config.max_table_size());
  for (int t = 0; t < kNumTables; ++t) {
    hi[4 * t] = kNumStages - 1;
    hi[4 * t + 1] = gmax;
    hi[4 * t + 2] = config.happiness_max;
    hi[4 * t + 3] = 1.0;
  }
  for (int g = 0; g < kQueueSlots; ++g) {
    hi[24 + 2 * g] = config.group_size_max;
    hi[24 + 2 * g + 1] = config.happiness_max;
  }
  hi[38] = kNumTables;
  hi[39] = hands::kDirtyDishes;
  return hi;
}

Env::Env(EnvConfig config, uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
}

StateVec Env::reset() { return reset(seed_); }

StateVec Env::reset(uint64_t seed) {
  seed_ = seed;
  state_ = EnvState{};
  state_.lives = config_.max_lives;
  state_.arrival_rng = Rng(seed, stream::kArrivals);
  state_.size_rng = Rng(seed, stream::kGroupSizes);
  started_ = true;
  return encode_state();
}

bool Env::done() const {
  return state_.lives <= 0 || state_.step_count >= config_.max_steps;
}

void Env::set_state(const EnvState& s) {
  state_ = s;
  started_ = true;
}

bool Env::is_legal(int action_index) const {
  const Action a = Action::from_index(action_index);
  const auto& s = state_;
  const int pos = s.waitress.position;
  const int hands_code = s.waitress.hands;
  const TableState* here = pos >= 1 ? &s.tables[pos - 1] : nullptr;
  switch (a.kind) {
    case ActionKind::kWait:
    case ActionKind::kMoveToTable:
    case ActionKind::kMoveToKitchen:
      return true;
    case ActionKind::kTakeOrder:
      return here && here->stage == TableStage::kAwaitOrder;
    case ActionKind::kSubmitOrders:
      return pos == 0 && !s.pending_orders().empty();
    case ActionKind::kPickupFood:
      return pos == 0 && hands_code == hands::kEmpty &&
             std::any_of(s.tables.begin(), s.tables.end(), [](const TableState& t) { return t.food_ready; });
    case ActionKind::kServeFood:
      return here && hands_code == hands::food_for(pos - 1) && here->stage == TableStage::kCooking;
    case ActionKind::kCollectBill:
      return here && here->stage == TableStage::kAwaitBill;
    case ActionKind::kCleanTable:
      return here && here->stage == TableStage::kDirty && hands_code == hands::kEmpty;
    case ActionKind::kReturnDishes:
      return pos == 0 && hands_code == hands::kDirtyDishes;
    case ActionKind::kSeat: {
      const GroupState& g = s.queue[a.group];
      return g.present && s.tables[a.table].stage == TableStage::kEmpty &&
             g.group_size <= config_.table_sizes[a.table];
    }
  }
  return false;
}

ActionMask Env::legal_actions() const {
  ActionMask mask{};
  for (int i = 0; i < kNumActions; ++i) mask[i] = is_legal(i);
  return mask;
}

StateVec Env::encode_state() const {
  StateView v;
  for (int t = 0; t < kNumTables; ++t) {
    const TableState& ts = state_.tables[t];
    v.tables[t] = {ts.stage, ts.group_size, ts.happiness, ts.food_ready};
  }
  for (int g = 0; g < kQueueSlots; ++g)
    v.queue[g] = {state_.queue[g].group_size, state_.queue[g].happiness};
  v.position = state_.waitress.position;
  v.hands = state_.waitress.hands;
  return v.encode();
}

void Env::compact_queue() {
  auto& q = state_.queue;
  auto it = std::stable_partition(q.begin(), q.end(), [](const GroupState& g) { return g.present; });
  std::fill(it, q.end(), GroupState{});
}

// Applies the action effect. Preconditions are checked here independently of
// is_legal() so that the mask can be cross-checked against stepping.
double Env::apply_action(const Action& a, bool& illegal, std::vector<std::string>& events,
                         std::array<bool, kNumTables>& progressed) {
  auto& s = state_;
  auto& w = s.waitress;
  const RewardSchedule& r = config_.rewards;
  const double hmax = config_.happiness_max;
  auto cheer = [&](int t) {
    s.tables[t].happiness = std::min(hmax, s.tables[t].happiness + 1.0);
    progressed[t] = true;
  };
  auto fail = [&] {
    illegal = true;
    events.emplace_back("illegal");
    return r.illegal;
  };

  TableState* here = w.position >= 1 ? &s.tables[w.position - 1] : nullptr;
  const int here_idx = w.position - 1;

  switch (a.kind) {
    case ActionKind::kWait:
      return 0.0;
    case ActionKind::kMoveToTable:
      w.position = a.table + 1;
      return 0.0;
    case ActionKind::kMoveToKitchen:
      w.position = 0;
      return 0.0;
    case ActionKind::kSeat: {
      GroupState& g = s.queue[a.group];
      TableState& t = s.tables[a.table];
      if (!g.present || t.stage != TableStage::kEmpty || g.group_size > config_.table_sizes[a.table])
        return fail();
      t = TableState{TableStage::kAwaitOrder, g.group_size, g.happiness, false, 0};
      cheer(a.table);
      g = GroupState{};
      compact_queue();
      events.emplace_back("seat");
      return r.seat;
    }
    case ActionKind::kTakeOrder:
      if (!here || here->stage != TableStage::kAwaitOrder) return fail();
      here->stage = TableStage::kOrderTaken;
      cheer(here_idx);
      events.emplace_back("take_order");
      return r.take_order;
    case ActionKind::kSubmitOrders: {
      if (w.position != 0) return fail();
      bool any = false;
      for (int t = 0; t < kNumTables; ++t) {
        if (s.tables[t].stage != TableStage::kOrderTaken) continue;
        s.tables[t].stage = TableStage::kCooking;
        s.tables[t].stage_timer = config_.cook_steps;
        cheer(t);
        any = true;
      }
      if (!any) return fail();
      events.emplace_back("submit");
      return r.submit;
    }
    case ActionKind::kPickupFood: {
      if (w.position != 0 || w.hands != hands::kEmpty) return fail();
      for (int t = 0; t < kNumTables; ++t) {
        if (!s.tables[t].food_ready) continue;
        s.tables[t].food_ready = false;
        w.hands = hands::food_for(t);
        events.emplace_back("pickup");
        return r.pickup;
      }
      return fail();
    }
    case ActionKind::kServeFood:
      if (!here || w.hands != hands::food_for(here_idx) || here->stage != TableStage::kCooking)
        return fail();
      here->stage = TableStage::kEating;
      here->stage_timer = config_.eat_steps;
      w.hands = hands::kEmpty;
      cheer(here_idx);
      events.emplace_back("serve");
      return r.serve;
    case ActionKind::kCollectBill: {
      if (!here || here->stage != TableStage::kAwaitBill) return fail();
      const double paid = r.bill_base + r.bill_per_heart * std::floor(here->happiness);
      *here = TableState{TableStage::kDirty, 0, 0.0, false, 0};
      progressed[here_idx] = true;
      events.emplace_back("collect_bill");
      return paid;
    }
    case ActionKind::kCleanTable:
      if (!here || here->stage != TableStage::kDirty || w.hands != hands::kEmpty) return fail();
      *here = TableState{};
      w.hands = hands::kDirtyDishes;
      events.emplace_back("clean");
      return r.clean;
    case ActionKind::kReturnDishes:
      if (w.position != 0 || w.hands != hands::kDirtyDishes) return fail();
      w.hands = hands::kEmpty;
      events.emplace_back("return_dishes");
      return r.ret;
  }
  return fail();
}

StepResult Env::step(int action_index) {
  const Action action = Action::from_index(action_index);
  if (!started_) throw std::logic_error("step called before reset");
  if (done()) throw std::logic_error("step called after episode end");

  StepResult out;
  auto& s = state_;
  std::array<bool, kNumTables> progressed{};
  bool illegal = false;

  // (a) action effect
  const double action_reward = apply_action(action, illegal, out.info.events, progressed);

  // (b) timers
  for (auto& t : s.tables) {
    if (t.stage == TableStage::kCooking && t.stage_timer > 0) {
      if (--t.stage_timer == 0) {
        t.food_ready = true;
        out.info.events.emplace_back("food_ready");
      }
    } else if (t.stage == TableStage::kEating && t.stage_timer > 0) {
      if (--t.stage_timer == 0) {
        t.stage = TableStage::kAwaitBill;
        out.info.events.emplace_back("finished_eating");
      }
    }
  }

  // (c) happiness decay
  for (int i = 0; i < kNumTables; ++i) {
    TableState& t = s.tables[i];
    if (progressed[i]) continue;
    double rate = 0.0;
    switch (t.stage) {
      case TableStage::kAwaitOrder: rate = config_.decay_await_order; break;
      case TableStage::kOrderTaken:
      case TableStage::kCooking: rate = config_.decay_await_food; break;
      case TableStage::kAwaitBill: rate = config_.decay_await_bill; break;
      default: break;
    }
    t.happiness = std::max(0.0, t.happiness - rate);
  }
  for (auto& g : s.queue)
    if (g.present) g.happiness = std::max(0.0, g.happiness - config_.decay_queue);

  // (d) departures
  int departures = 0;
  for (int i = 0; i < kNumTables; ++i) {
    TableState& t = s.tables[i];
    if (!has_group(t.stage) || t.happiness > 0.0) continue;
    t = TableState{TableStage::kDirty, 0, 0.0, false, 0};
    if (s.waitress.hands == hands::food_for(i)) s.waitress.hands = hands::kEmpty;
    ++departures;
    out.info.events.emplace_back("depart_table");
  }
  bool queue_changed = false;
  for (auto& g : s.queue) {
    if (!g.present || g.happiness > 0.0) continue;
    g = GroupState{};
    queue_changed = true;
    ++departures;
    out.info.events.emplace_back("depart_queue");
  }
  if (queue_changed) compact_queue();
  s.lives = std::max(0, s.lives - departures);

  // (e) arrival; the arrival draw happens every step so the stream stays aligned
  const bool arrive = s.arrival_rng.uniform() < config_.arrival_prob;
  if (arrive) {
    auto slot = std::find_if(s.queue.begin(), s.queue.end(), [](const GroupState& g) { return !g.present; });
    if (slot != s.queue.end()) {
      *slot = GroupState{true, s.size_rng.uniform_int(config_.group_size_min, config_.group_size_max),
                         config_.happiness_max};
      out.info.events.emplace_back("arrival");
    }
  }

  // (f) bookkeeping
  ++s.step_count;
  out.reward = action_reward + config_.rewards.leave * departures;
  s.cumulative_return += out.reward;
  out.done = done();
  out.state = encode_state();
  out.info.lives = s.lives;
  out.info.step_count = s.step_count;
  out.info.illegal = illegal;
  out.info.action_reward = action_reward;
  out.info.departures = departures;
  return out;
}

std::string Env::render_text() const {
  std::ostringstream out;
  char buf[128];
  const auto& s = state_;
  std::snprintf(buf, sizeof(buf), "step: %d  lives: %d  return: %.1f\n", s.step_count, s.lives,
                s.cumulative_return);
  out << buf;
  out << "waitress: " << (s.waitress.position == 0 ? std::string("kitchen")
                                                   : "table " + std::to_string(s.waitress.position));
  out << "  hands: ";
  if (s.waitress.hands == hands::kEmpty) out << "empty";
  else if (s.waitress.hands == hands::kDirtyDishes) out << "dirty dishes";
  else out << "food for table " << s.waitress.hands;
  out << "\n";
  for (int t = 0; t < kNumTables; ++t) {
    const TableState& ts = s.tables[t];
    std::snprintf(buf, sizeof(buf), "table %d [%d seats]: %-11s", t + 1, config_.table_sizes[t],
                  stage_name(ts.stage));
    out << buf;
    if (has_group(ts.stage)) {
      std::snprintf(buf, sizeof(buf), " group=%d hearts=%.2f", ts.group_size, ts.happiness);
      out << buf;
      if (ts.stage_timer > 0) out << " timer=" << ts.stage_timer;
      if (ts.food_ready) out << " food-ready";
    }
    out << "\n";
  }
  out << "queue:";
  bool any = false;
  for (const auto& g : s.queue) {
    if (!g.present) continue;
    std::snprintf(buf, sizeof(buf), " [%d %.2f]", g.group_size, g.happiness);
    out << buf;
    any = true;
  }
  if (!any) out << " (empty)";
  out << "\n";
  return out.str();
}

}  // namespace dinerdash
