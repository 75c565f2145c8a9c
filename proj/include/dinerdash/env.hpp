#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dinerdash/action.hpp"
#include "dinerdash/config.hpp"
#include "dinerdash/rng.hpp"

namespace dinerdash {

inline constexpr int kStateDim = 40;
using StateVec = std::array<double, kStateDim>;
using ActionMask = std::array<bool, kNumActions>;

enum class TableStage : int {
  kEmpty = 0,
  kAwaitOrder = 1,
  kOrderTaken = 2,
  kCooking = 3,
  kEating = 4,
  kAwaitBill = 5,
  kDirty = 6,
};
inline constexpr int kNumStages = 7;

const char* stage_name(TableStage s);

// A seated group occupies the table from AWAIT_ORDER through AWAIT_BILL.
inline bool has_group(TableStage s) {
  return s >= TableStage::kAwaitOrder && s <= TableStage::kAwaitBill;
}

struct TableState {
  TableStage stage = TableStage::kEmpty;
  int group_size = 0;
  double happiness = 0.0;
  bool food_ready = false;
  int stage_timer = 0;

  bool operator==(const TableState&) const = default;
};

struct GroupState {
  bool present = false;
  int group_size = 0;
  double happiness = 0.0;

  bool operator==(const GroupState&) const = default;
};

namespace hands {
inline constexpr int kEmpty = 0;
inline constexpr int kDirtyDishes = 7;
constexpr int food_for(int table) { return table + 1; }  // 0-based table -> 1..6
constexpr bool is_food(int code) { return code >= 1 && code <= kNumTables; }
constexpr int food_table(int code) { return code - 1; }
}  // namespace hands

struct WaitressState {
  int position = 0;  // 0 = kitchen, 1..6 = table (1-based)
  int hands = hands::kEmpty;

  bool operator==(const WaitressState&) const = default;
};

struct EnvState {
  std::array<TableState, kNumTables> tables{};
  std::array<GroupState, kQueueSlots> queue{};
  WaitressState waitress{};
  int lives = kMaxLives;
  int step_count = 0;
  Rng arrival_rng;
  Rng size_rng;
  double cumulative_return = 0.0;

  // Tables whose orders are taken but not submitted (0-based).
  std::vector<int> pending_orders() const;

  bool operator==(const EnvState&) const = default;
};

struct StepInfo {
  int lives = 0;
  int step_count = 0;
  bool illegal = false;
  double action_reward = 0.0;
  int departures = 0;
  std::vector<std::string> events;
};

struct StepResult {
  StateVec state{};
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Everything a policy can see: the decoded 40-dim vector.
//
// Layout: [0, 24) four entries per table (stage, group_size, happiness,
// food_ready); [24, 38) two per queue slot (group_size, happiness);
// 38 waitress position; 39 hands code.
struct StateView {
  struct Table {
    TableStage stage = TableStage::kEmpty;
    int group_size = 0;
    double happiness = 0.0;
    bool food_ready = false;
  };
  struct Group {
    int group_size = 0;  // 0 = slot empty
    double happiness = 0.0;
    bool present() const { return group_size > 0; }
  };
  std::array<Table, kNumTables> tables{};
  std::array<Group, kQueueSlots> queue{};
  int position = 0;
  int hands = hands::kEmpty;

  static StateView decode(std::span<const double> vec);
  StateVec encode() const;
};

// Inclusive upper bound of each encoded dimension (lower bound is 0).
StateVec state_upper_bounds(const EnvConfig& config);

// One Diner Dash episode. Not thread-safe; copyable (a copy is an
// independent clone including the PRNG streams).
class Env {
 public:
  // Validates config; throws ConfigError. The env must be reset before use.
  Env(EnvConfig config, uint64_t seed);

  const EnvConfig& config() const { return config_; }
  uint64_t seed() const { return seed_; }

  // Restarts from the initial state with the construction seed (or a new one).
  StateVec reset();
  StateVec reset(uint64_t seed);

  // Throws std::out_of_range for bad indices and std::logic_error when the
  // env was never reset or the episode is over.
  StepResult step(int action_index);

  ActionMask legal_actions() const;
  bool is_legal(int action_index) const;
  StateVec encode_state() const;
  StateView view() const { return StateView::decode(encode_state()); }
  std::string render_text() const;

  bool started() const { return started_; }
  bool done() const;
  const EnvState& state() const { return state_; }
  // Replaces the full state (scenario construction in tests and tools).
  void set_state(const EnvState& s);

 private:
  double apply_action(const Action& a, bool& illegal, std::vector<std::string>& events,
                      std::array<bool, kNumTables>& table_progressed);
  void compact_queue();

  EnvConfig config_;
  uint64_t seed_;
  EnvState state_;
  bool started_ = false;
};

}  // namespace dinerdash
