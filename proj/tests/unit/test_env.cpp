#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dinerdash/action.hpp"
#include "dinerdash/env.hpp"
#include "dinerdash/errors.hpp"
#include "dinerdash/expert.hpp"
#include "test_support.hpp"

using namespace dinerdash;
namespace ai = dinerdash::action_index;

namespace {

int count_occurrences(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

Env env_with(const EnvState& s, const EnvConfig& config = testing::quiet_config()) {
  Env env(config, 0);
  env.reset();
  env.set_state(s);
  return env;
}

GroupState group(int size, double happiness) { return GroupState{true, size, happiness}; }

}  // namespace

TEST_CASE("action index layout is a bijection") {
  for (int i = 0; i < kNumActions; ++i) REQUIRE(Action::from_index(i).index() == i);
  CHECK(Action::from_index(0).kind == ActionKind::kWait);
  CHECK(Action::from_index(1).kind == ActionKind::kMoveToTable);
  CHECK(Action::from_index(1).table == 0);
  CHECK(Action::from_index(6).table == 5);
  CHECK(Action::from_index(14).kind == ActionKind::kMoveToKitchen);
  const Action last = Action::from_index(56);
  CHECK(last.kind == ActionKind::kSeat);
  CHECK(last.group == 6);
  CHECK(last.table == 5);
  CHECK(ai::seat(2, 3) == 15 + 12 + 3);
  CHECK_THROWS_AS(Action::from_index(57), std::out_of_range);
  CHECK_THROWS_AS(Action::from_index(-1), std::out_of_range);
  CHECK(Action::from_index(7).name() == "TAKE_ORDER");
}

TEST_CASE("new env validates its config") {
  EnvConfig c;
  Env env(c, 0);
  CHECK(env.config().table_sizes == std::array<int, 6>{2, 2, 4, 4, 6, 6});
  CHECK_THROWS_WITH_AS(parse_config("table_sizes = 2,2,4,4,6"), doctest::Contains("table_sizes must have 6 entries"),
                       ConfigError);
  c.eat_steps = 0;
  CHECK_THROWS_AS(Env(c, 0), ConfigError);
}

TEST_CASE("reset gives the all-zero initial state") {
  Env env(EnvConfig{}, 0);
  const StateVec s = env.reset();
  CHECK(std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; }));
  CHECK(env.state().lives == 5);
  CHECK(env.state().step_count == 0);
  CHECK(env.reset() == s);
}

TEST_CASE("reset after a finished episode restores lives") {
  Env env(preset_config("hard"), 3);
  env.reset();
  while (!env.done()) env.step(ai::kWait);
  CHECK(env.state().lives == 0);
  env.reset();
  CHECK(env.state().lives == 5);
  CHECK_FALSE(env.done());
}

TEST_CASE("step errors") {
  Env env(EnvConfig{}, 0);
  CHECK_THROWS_AS(env.step(0), std::logic_error);
  env.reset();
  CHECK_THROWS_AS(env.step(57), std::out_of_range);
  CHECK_THROWS_AS(env.step(-1), std::out_of_range);
  EnvConfig short_cfg;
  short_cfg.max_steps = 2;
  Env brief(short_cfg, 0);
  brief.reset();
  brief.step(0);
  CHECK(brief.step(0).done);
  CHECK_THROWS_AS(brief.step(0), std::logic_error);
}

TEST_CASE("wait on an empty restaurant without an arrival changes only the step count") {
  const EnvConfig c;
  uint64_t seed = 0;
  while (Rng(seed, stream::kArrivals).uniform() < c.arrival_prob) ++seed;
  Env env(c, seed);
  const StateVec before = env.reset();
  const StepResult r = env.step(ai::kWait);
  CHECK(r.reward == 0.0);
  CHECK(r.state == before);
  CHECK(env.state().step_count == 1);
  CHECK_FALSE(r.done);
}

TEST_CASE("an arrival draws its size from the group-size stream") {
  const EnvConfig c;
  uint64_t seed = 0;
  while (Rng(seed, stream::kArrivals).uniform() >= c.arrival_prob) ++seed;
  Env env(c, seed);
  env.reset();
  const StepResult r = env.step(ai::kWait);
  const int expected = Rng(seed, stream::kGroupSizes).uniform_int(c.group_size_min, c.group_size_max);
  CHECK(env.state().queue[0].present);
  CHECK(env.state().queue[0].group_size == expected);
  CHECK(env.state().queue[0].happiness == c.happiness_max);
  CHECK(std::count(r.info.events.begin(), r.info.events.end(), "arrival") == 1);
}

TEST_CASE("serve with empty hands is a penalised no-op while time advances") {
  EnvState s;
  s.tables[2] = TableState{TableStage::kCooking, 3, 4.0, false, 5};
  s.waitress.position = 3;
  Env env = env_with(s);
  const StepResult r = env.step(ai::kServeFood);
  CHECK(r.reward == -1.0);
  CHECK(r.info.illegal);
  CHECK(env.state().tables[2].stage == TableStage::kCooking);
  CHECK(env.state().tables[2].stage_timer == 4);
  CHECK(env.state().tables[2].happiness == doctest::Approx(4.0 - 0.01).epsilon(1e-12));
  CHECK(env.state().step_count == 1);
}

TEST_CASE("seat moves the group to the table and compacts the queue") {
  EnvState s;
  s.queue[0] = group(2, 5.0);
  s.queue[1] = group(4, 3.0);
  Env env = env_with(s);
  const StepResult r = env.step(15);
  const auto& t = env.state().tables[0];
  CHECK(t.stage == TableStage::kAwaitOrder);
  CHECK(t.group_size == 2);
  CHECK(r.reward == 2.0);
  CHECK(env.state().queue[0].group_size == 4);
  CHECK_FALSE(env.state().queue[1].present);
  // The spec layout example: size-3 group at table index 1.
  EnvState s2;
  s2.queue[0] = group(3, 5.0);
  s2.tables[1] = TableState{};
  EnvConfig wide = testing::quiet_config();
  wide.table_sizes = {2, 4, 4, 4, 6, 6};
  Env env2 = env_with(s2, wide);
  env2.step(ai::seat(0, 1));
  const StateVec v = env2.encode_state();
  CHECK(v[4] == 1.0);
  CHECK(v[5] == 3.0);
  CHECK(v[6] == 5.0);
  CHECK(v[7] == 0.0);
}

TEST_CASE("seat is illegal when the group does not fit") {
  EnvState s;
  s.queue[0] = group(5, 5.0);
  Env env = env_with(s);
  CHECK_FALSE(env.is_legal(ai::seat(0, 0)));
  CHECK(env.is_legal(ai::seat(0, 4)));
  CHECK(env.step(ai::seat(0, 0)).info.illegal);
  CHECK_FALSE(env.is_legal(ai::seat(1, 4)));
}

// A one-table model of the rules, advanced along the same script, gives the
// happiness at billing and therefore the expected bill.
TEST_CASE("full service of one group sums the schedule rewards") {
  const EnvConfig c = testing::quiet_config();
  const RewardSchedule& r = c.rewards;

  std::vector<int> script;
  script.push_back(ai::seat(0, 0));
  script.push_back(ai::move_to_table(0));
  script.push_back(ai::kTakeOrder);
  script.push_back(ai::kMoveToKitchen);
  script.push_back(ai::kSubmitOrders);
  for (int i = 0; i < c.cook_steps - 1; ++i) script.push_back(ai::kWait);
  script.push_back(ai::kPickupFood);
  script.push_back(ai::move_to_table(0));
  script.push_back(ai::kServeFood);
  for (int i = 0; i < c.eat_steps - 1; ++i) script.push_back(ai::kWait);
  script.push_back(ai::kCollectBill);
  script.push_back(ai::kCleanTable);
  script.push_back(ai::kMoveToKitchen);
  script.push_back(ai::kReturnDishes);

  // Oracle: stage/timer/happiness of table 0 under the step order
  // action -> timers -> decay.
  enum { kQueue, kAwaitOrder, kOrderTaken, kCooking, kEating, kAwaitBill, kGone } stage = kQueue;
  double h = c.happiness_max;
  int timer = 0;
  double bill = -1;
  for (int a : script) {
    bool progressed = false;
    switch (a) {
      case ai::seat(0, 0): stage = kAwaitOrder; progressed = true; break;
      case ai::kTakeOrder: stage = kOrderTaken; progressed = true; break;
      case ai::kSubmitOrders: stage = kCooking; timer = c.cook_steps; progressed = true; break;
      case ai::kServeFood: stage = kEating; timer = c.eat_steps; progressed = true; break;
      case ai::kCollectBill: bill = r.bill_base + r.bill_per_heart * std::floor(h); stage = kGone; break;
      default: break;
    }
    if (progressed) h = std::min(c.happiness_max, h + 1.0);
    if ((stage == kCooking || stage == kEating) && timer > 0) {
      --timer;
      if (stage == kEating && timer == 0) stage = kAwaitBill;
    }
    if (!progressed) {
      if (stage == kAwaitOrder) h -= c.decay_await_order;
      if (stage == kOrderTaken || stage == kCooking) h -= c.decay_await_food;
      if (stage == kAwaitBill) h -= c.decay_await_bill;
    }
  }
  REQUIRE(bill > 0);
  const double expected =
      r.seat + r.take_order + r.submit + r.pickup + r.serve + bill + r.clean + r.ret;

  EnvState s;
  s.queue[0] = group(2, c.happiness_max);
  Env env = env_with(s, c);
  double total = 0;
  for (std::size_t i = 0; i < script.size(); ++i) {
    INFO("step " << i);
    REQUIRE(expert_action(env) == script[i]);
    const StepResult res = env.step(script[i]);
    REQUIRE_FALSE(res.info.illegal);
    total += res.reward;
  }
  CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  CHECK(env.state().cumulative_return == doctest::Approx(expected).epsilon(1e-12));
  CHECK(env.state().tables[0].stage == TableStage::kEmpty);
  CHECK(env.state().waitress.hands == hands::kEmpty);
  CHECK(expert_action(env) == ai::kWait);
}

TEST_CASE("a departing table group leaves the table dirty and costs a life") {
  EnvState s;
  s.tables[1] = TableState{TableStage::kCooking, 2, 0.005, false, 4};
  s.waitress.hands = hands::food_for(1);
  Env env = env_with(s);
  const StepResult r = env.step(ai::kWait);
  CHECK(env.state().tables[1].stage == TableStage::kDirty);
  CHECK(env.state().tables[1].group_size == 0);
  CHECK(env.state().waitress.hands == hands::kEmpty);
  CHECK(env.state().lives == 4);
  CHECK(r.info.departures == 1);
  CHECK(r.reward == -100.0);
}

TEST_CASE("departing queue groups vacate and the queue stays compact") {
  EnvState s;
  s.queue[0] = group(1, 0.01);
  s.queue[1] = group(2, 4.0);
  s.queue[2] = group(3, 0.015);
  s.queue[3] = group(4, 3.0);
  Env env = env_with(s);
  const StepResult r = env.step(ai::kWait);
  CHECK(r.info.departures == 2);
  CHECK(env.state().lives == 3);
  CHECK(env.state().queue[0].group_size == 2);
  CHECK(env.state().queue[1].group_size == 4);
  CHECK_FALSE(env.state().queue[2].present);
}

TEST_CASE("lives never go below zero") {
  EnvState s;
  s.lives = 1;
  s.queue[0] = group(1, 0.01);
  s.queue[1] = group(1, 0.01);
  Env env = env_with(s);
  const StepResult r = env.step(ai::kWait);
  CHECK(r.info.departures == 2);
  CHECK(env.state().lives == 0);
  CHECK(r.done);
  CHECK(r.reward == -200.0);
}

TEST_CASE("legal mask at reset and with dirty dishes") {
  Env env(EnvConfig{}, 0);
  env.reset();
  const ActionMask m = env.legal_actions();
  for (int i = 0; i < kNumActions; ++i) {
    const bool expected = i == ai::kWait || (i >= 1 && i <= 6) || i == ai::kMoveToKitchen;
    CHECK(m[i] == expected);
  }
  EnvState s;
  s.waitress.hands = hands::kDirtyDishes;
  Env env2 = env_with(s);
  CHECK(env2.is_legal(ai::kReturnDishes));
  CHECK_FALSE(env2.is_legal(ai::kPickupFood));
}

TEST_CASE("pickup takes the lowest ready table") {
  EnvState s;
  s.tables[4] = TableState{TableStage::kCooking, 5, 4.0, true, 0};
  s.tables[2] = TableState{TableStage::kCooking, 3, 4.0, true, 0};
  Env env = env_with(s);
  env.step(ai::kPickupFood);
  CHECK(env.state().waitress.hands == hands::food_for(2));
  CHECK_FALSE(env.state().tables[2].food_ready);
  CHECK(env.state().tables[4].food_ready);
  CHECK(env.state().tables[2].stage == TableStage::kCooking);
}

TEST_CASE("legal mask agrees with clone-and-step on random rollouts") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Env env(preset_config("hard"), seed);
    env.reset();
    Rng pick(seed, stream::kPolicy);
    ExpertPolicy expert;
    for (int t = 0; t < 400 && !env.done(); ++t) {
      const ActionMask mask = env.legal_actions();
      for (int a = 0; a < kNumActions; ++a) {
        Env probe = env;
        const StepResult r = probe.step(a);
        REQUIRE_MESSAGE(mask[a] == (r.info.action_reward != env.config().rewards.illegal),
                        "seed " << seed << " step " << t << " action " << a);
      }
      // Mix expert and random moves so deep service states are visited.
      const int a = pick.uniform() < 0.5 ? expert.act(env) : pick.uniform_int(0, kNumActions - 1);
      env.step(a);
    }
  }
}

TEST_CASE("random rollouts keep the state invariants") {
  const EnvConfig c = preset_config("hard");
  const StateVec hi = state_upper_bounds(c);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Env env(c, seed);
    env.reset();
    Rng pick(seed, stream::kPolicy);
    ExpertPolicy expert;
    int departures = 0;
    double sum = 0;
    while (!env.done()) {
      const EnvState before = env.state();
      const int a = pick.uniform() < 0.7 ? expert.act(env) : pick.uniform_int(0, kNumActions - 1);
      const StepResult r = env.step(a);
      const EnvState& s = env.state();
      departures += r.info.departures;
      sum += r.reward;

      REQUIRE(s.lives == std::max(0, 5 - departures));
      REQUIRE(r.reward == r.info.action_reward + c.rewards.leave * r.info.departures);
      REQUIRE(r.done == (s.lives == 0 || s.step_count >= c.max_steps));
      REQUIRE(r.state.size() == 40);
      for (int i = 0; i < kStateDim; ++i) {
        REQUIRE(r.state[i] >= 0.0);
        REQUIRE(r.state[i] <= hi[i]);
      }
      bool seen_empty = false;
      for (const auto& g : s.queue) {
        if (!g.present) {
          seen_empty = true;
          REQUIRE(g.group_size == 0);
          REQUIRE(g.happiness == 0.0);
        } else {
          REQUIRE_FALSE(seen_empty);
        }
      }
      for (int t = 0; t < kNumTables; ++t) {
        const TableState& ts = s.tables[t];
        REQUIRE(ts.happiness >= 0.0);
        REQUIRE(ts.happiness <= c.happiness_max);
        if (ts.stage == TableStage::kEmpty) {
          REQUIRE(ts.group_size == 0);
          REQUIRE_FALSE(ts.food_ready);
        }
        if (ts.food_ready) {
          REQUIRE(ts.stage == TableStage::kCooking);
          REQUIRE(ts.stage_timer == 0);
        }
        // no progress on this table: hearts cannot grow
        if (ts.stage == before.tables[t].stage && has_group(ts.stage))
          REQUIRE(ts.happiness <= before.tables[t].happiness);
      }
      const bool queue_moved =
          std::any_of(r.info.events.begin(), r.info.events.end(),
                      [](const std::string& e) { return e == "seat" || e == "depart_queue"; });
      if (!queue_moved)
        for (int g = 0; g < kQueueSlots; ++g)
          if (before.queue[g].present) REQUIRE(s.queue[g].happiness <= before.queue[g].happiness);
      for (int t : s.pending_orders()) REQUIRE(s.tables[t].stage == TableStage::kOrderTaken);
    }
    CHECK(sum == doctest::Approx(env.state().cumulative_return).epsilon(1e-9));
  }
}

TEST_CASE("decode(encode) reproduces the policy-visible fields") {
  Env env(preset_config("hard"), 11);
  env.reset();
  ExpertPolicy expert;
  Rng pick(11, stream::kPolicy);
  while (!env.done()) {
    const StateView v = StateView::decode(env.encode_state());
    const EnvState& s = env.state();
    for (int t = 0; t < kNumTables; ++t) {
      REQUIRE(v.tables[t].stage == s.tables[t].stage);
      REQUIRE(v.tables[t].group_size == s.tables[t].group_size);
      REQUIRE(v.tables[t].happiness == s.tables[t].happiness);
      REQUIRE(v.tables[t].food_ready == s.tables[t].food_ready);
    }
    for (int g = 0; g < kQueueSlots; ++g) {
      REQUIRE(v.queue[g].group_size == s.queue[g].group_size);
      REQUIRE(v.queue[g].happiness == s.queue[g].happiness);
    }
    REQUIRE(v.position == s.waitress.position);
    REQUIRE(v.hands == s.waitress.hands);
    REQUIRE(v.encode() == env.encode_state());
    env.step(pick.uniform() < 0.8 ? expert.act(env) : pick.uniform_int(0, kNumActions - 1));
  }
  const std::vector<double> short_vec(39, 0.0);
  CHECK_THROWS_AS(StateView::decode(short_vec), std::invalid_argument);
}

TEST_CASE("same seed and actions give bit-identical streams") {
  Env a(preset_config("hard"), 99), b(preset_config("hard"), 99);
  a.reset();
  b.reset();
  Rng pick(5, stream::kPolicy);
  for (int t = 0; t < 500 && !a.done(); ++t) {
    const int act = pick.uniform_int(0, kNumActions - 1);
    const StepResult ra = a.step(act), rb = b.step(act);
    REQUIRE(ra.state == rb.state);
    REQUIRE(ra.reward == rb.reward);
    REQUIRE(ra.done == rb.done);
    REQUIRE(ra.info.events == rb.info.events);
  }
  CHECK(a.state() == b.state());
}

TEST_CASE("render_text shows lives, tables and is pure") {
  Env env(EnvConfig{}, 0);
  env.reset();
  const std::string fresh = env.render_text();
  CHECK(fresh.find("lives: 5") != std::string::npos);
  CHECK(count_occurrences(fresh, "EMPTY") == 6);
  CHECK(env.render_text() == fresh);

  EnvState s;
  s.tables[3] = TableState{TableStage::kEating, 4, 3.5, false, 7};
  Env mid = env_with(s);
  const std::string text = mid.render_text();
  CHECK(text.find("table 4 [4 seats]: EATING") != std::string::npos);
  CHECK(text.find("hearts=3.50") != std::string::npos);
  CHECK(count_occurrences(text, "\ntable ") == 6);
}
