#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dinerdash/config.hpp"
#include "dinerdash/env.hpp"
#include "dinerdash/service.hpp"

namespace dinerdash {

// Named quantities a sub-state selector can read. Sources are written as
// "name", "name[i]" or "name[g,t]" (0-based indices):
//
//   state[i]                    raw state entry i (needs explicit binning)
//   table_stage[t]              0..6
//   table_size[t]               seats, from the config
//   table_group_size[t]         0 when no group
//   table_happiness[t]          hearts
//   table_food_ready[t]         0/1
//   table_is_stage_priority[t]  1 if t is the most urgent table of its stage
//                               (bill/order/clean target, or food in hand)
//   hands_for_table[t]          0 empty, 1 food for t, 2 food for another
//                               table, 3 dirty dishes
//   at_table[t]                 waitress stands at t
//   group_present[g], group_size[g], group_happiness[g]
//   group_seat_rank[g]          1 if g is the most urgent seatable group
//   seat_fit[g,t]               1 if t is the smallest empty table fitting g
//   position, hands             raw waitress fields
//   at_kitchen                  position == 0
//   at_stage                    stage of the table at the waitress, 7 in
//                               the kitchen
//   at_is_stage_priority        table_is_stage_priority of that table
//   hands_match_position        holding food for the table she stands at
//   service_phase               ServiceTask index of the most pressing work
enum class FeatureId {
  kState,
  kTableStage,
  kTableSize,
  kTableGroupSize,
  kTableHappiness,
  kTableFoodReady,
  kTableIsStagePriority,
  kHandsForTable,
  kAtTable,
  kGroupPresent,
  kGroupSize,
  kGroupHappiness,
  kGroupSeatRank,
  kSeatFit,
  kPosition,
  kHands,
  kAtKitchen,
  kAtStage,
  kAtIsStagePriority,
  kHandsMatchPosition,
  kServicePhase,
};

struct FeatureSource {
  FeatureId id = FeatureId::kState;
  int a = -1;
  int b = -1;

  // Throws std::invalid_argument for unknown names and out-of-range indices.
  static FeatureSource parse(std::string_view text);
  std::string text() const;

  double evaluate(const StateView& view, const ServiceBoard& board, const EnvConfig& config) const;

  bool operator==(const FeatureSource&) const = default;
};

// Categorical values are rounded and clamped into [0, cardinality).
// Bins are given by ascending edges e0 < e1 < ... < en; value v falls in bin
// i when e_i <= v < e_{i+1}; the top edge is inclusive and values outside
// the range clamp to the first/last bin.
struct Discretization {
  enum class Kind { kCategorical, kBins };
  Kind kind = Kind::kCategorical;
  int cardinality = 1;
  std::vector<double> edges;

  static Discretization categorical(int cardinality);
  static Discretization bins(std::vector<double> edges);
  // Equal-width bins over [lo, hi].
  static Discretization uniform_bins(double lo, double hi, int count);

  int size() const { return kind == Kind::kCategorical ? cardinality : static_cast<int>(edges.size()) - 1; }
  int apply(double v) const;

  bool operator==(const Discretization&) const = default;
};

// Default discretization of a source. Raw state entries have none and
// throw std::invalid_argument.
Discretization natural_discretization(const FeatureSource& source, const EnvConfig& config);

struct SelectorVariable {
  std::string name;
  FeatureSource source;
  Discretization discretization;
};

using Substate = std::vector<int>;

// Maps a full state to the discretized variables one action's model reads.
class SubstateSelector {
 public:
  SubstateSelector() = default;
  SubstateSelector(int action, std::vector<SelectorVariable> variables, EnvConfig config);

  int action() const { return action_; }
  const std::vector<SelectorVariable>& variables() const { return variables_; }
  std::vector<int> cardinalities() const;
  std::size_t arity() const { return variables_.size(); }

  Substate select(std::span<const double> state) const;
  Substate select(const StateView& view, const ServiceBoard& board) const;
  void select_into(const StateView& view, const ServiceBoard& board, Substate& out) const;

 private:
  int action_ = 0;
  std::vector<SelectorVariable> variables_;
  EnvConfig config_;
};

}  // namespace dinerdash
