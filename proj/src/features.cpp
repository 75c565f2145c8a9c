#include "dinerdash/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace dinerdash {

namespace {

enum class Arity { kNone, kTable, kGroup, kGroupTable, kStateIndex };

struct FeatureInfo {
  std::string_view name;
  FeatureId id;
  Arity arity;
};

constexpr FeatureInfo kFeatures[] = {
    {"state", FeatureId::kState, Arity::kStateIndex},
    {"table_stage", FeatureId::kTableStage, Arity::kTable},
    {"table_size", FeatureId::kTableSize, Arity::kTable},
    {"table_group_size", FeatureId::kTableGroupSize, Arity::kTable},
    {"table_happiness", FeatureId::kTableHappiness, Arity::kTable},
    {"table_food_ready", FeatureId::kTableFoodReady, Arity::kTable},
    {"table_is_stage_priority", FeatureId::kTableIsStagePriority, Arity::kTable},
    {"hands_for_table", FeatureId::kHandsForTable, Arity::kTable},
    {"at_table", FeatureId::kAtTable, Arity::kTable},
    {"group_present", FeatureId::kGroupPresent, Arity::kGroup},
    {"group_size", FeatureId::kGroupSize, Arity::kGroup},
    {"group_happiness", FeatureId::kGroupHappiness, Arity::kGroup},
    {"group_seat_rank", FeatureId::kGroupSeatRank, Arity::kGroup},
    {"seat_fit", FeatureId::kSeatFit, Arity::kGroupTable},
    {"position", FeatureId::kPosition, Arity::kNone},
    {"hands", FeatureId::kHands, Arity::kNone},
    {"at_kitchen", FeatureId::kAtKitchen, Arity::kNone},
    {"at_stage", FeatureId::kAtStage, Arity::kNone},
    {"at_is_stage_priority", FeatureId::kAtIsStagePriority, Arity::kNone},
    {"hands_match_position", FeatureId::kHandsMatchPosition, Arity::kNone},
    {"service_phase", FeatureId::kServicePhase, Arity::kNone},
};

const FeatureInfo& info(FeatureId id) {
  for (const auto& f : kFeatures)
    if (f.id == id) return f;
  throw std::logic_error("unregistered feature");
}

int parse_index(std::string_view s, std::string_view whole) {
  int v = -1;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("feature source '" + std::string(whole) + "': bad index");
  return v;
}

void check_range(int v, int limit, std::string_view whole) {
  if (v < 0 || v >= limit)
    throw std::invalid_argument("feature source '" + std::string(whole) + "': index out of range");
}

bool is_stage_priority(int t, const StateView& v, const ServiceBoard& b) {
  if (t < 0) return false;
  switch (v.tables[t].stage) {
    case TableStage::kAwaitBill: return b.bill_target == t;
    case TableStage::kAwaitOrder: return b.order_target == t;
    case TableStage::kDirty: return b.clean_target == t;
    case TableStage::kCooking: return b.serve_target == t;
    default: return false;
  }
}

}  // namespace

FeatureSource FeatureSource::parse(std::string_view text) {
  const auto open = text.find('[');
  const std::string_view name = text.substr(0, open);
  const FeatureInfo* found = nullptr;
  for (const auto& f : kFeatures)
    if (f.name == name) found = &f;
  if (!found) throw std::invalid_argument("unknown feature source '" + std::string(text) + "'");

  FeatureSource src{found->id};
  std::vector<int> idx;
  if (open != std::string_view::npos) {
    if (text.back() != ']') throw std::invalid_argument("feature source '" + std::string(text) + "': missing ']'");
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    while (true) {
      const auto comma = inner.find(',');
      idx.push_back(parse_index(inner.substr(0, comma), text));
      if (comma == std::string_view::npos) break;
      inner = inner.substr(comma + 1);
    }
  }
  auto need = [&](std::size_t n) {
    if (idx.size() != n)
      throw std::invalid_argument("feature source '" + std::string(text) + "': expected " +
                                  std::to_string(n) + " index argument(s)");
  };
  switch (found->arity) {
    case Arity::kNone: need(0); break;
    case Arity::kStateIndex: need(1); check_range(idx[0], kStateDim, text); break;
    case Arity::kTable: need(1); check_range(idx[0], kNumTables, text); break;
    case Arity::kGroup: need(1); check_range(idx[0], kQueueSlots, text); break;
    case Arity::kGroupTable:
      need(2);
      check_range(idx[0], kQueueSlots, text);
      check_range(idx[1], kNumTables, text);
      break;
  }
  if (!idx.empty()) src.a = idx[0];
  if (idx.size() > 1) src.b = idx[1];
  return src;
}

std::string FeatureSource::text() const {
  std::string out(info(id).name);
  if (a >= 0) {
    out += "[" + std::to_string(a);
    if (b >= 0) out += "," + std::to_string(b);
    out += "]";
  }
  return out;
}

double FeatureSource::evaluate(const StateView& v, const ServiceBoard& board, const EnvConfig& config) const {
  const int at = v.position - 1;  // table under the waitress, -1 in the kitchen
  switch (id) {
    case FeatureId::kState: return v.encode()[a];
    case FeatureId::kTableStage: return static_cast<int>(v.tables[a].stage);
    case FeatureId::kTableSize: return config.table_sizes[a];
    case FeatureId::kTableGroupSize: return v.tables[a].group_size;
    case FeatureId::kTableHappiness: return v.tables[a].happiness;
    case FeatureId::kTableFoodReady: return v.tables[a].food_ready ? 1 : 0;
    case FeatureId::kTableIsStagePriority: return is_stage_priority(a, v, board) ? 1 : 0;
    case FeatureId::kHandsForTable:
      if (v.hands == hands::kEmpty) return 0;
      if (v.hands == hands::kDirtyDishes) return 3;
      return hands::food_table(v.hands) == a ? 1 : 2;
    case FeatureId::kAtTable: return at == a ? 1 : 0;
    case FeatureId::kGroupPresent: return v.queue[a].present() ? 1 : 0;
    case FeatureId::kGroupSize: return v.queue[a].group_size;
    case FeatureId::kGroupHappiness: return v.queue[a].happiness;
    case FeatureId::kGroupSeatRank: return board.seat_group == a ? 1 : 0;
    case FeatureId::kSeatFit: return board.best_fit[a] == b ? 1 : 0;
    case FeatureId::kPosition: return v.position;
    case FeatureId::kHands: return v.hands;
    case FeatureId::kAtKitchen: return v.position == 0 ? 1 : 0;
    case FeatureId::kAtStage: return at < 0 ? kNumStages : static_cast<int>(v.tables[at].stage);
    case FeatureId::kAtIsStagePriority: return is_stage_priority(at, v, board) ? 1 : 0;
    case FeatureId::kHandsMatchPosition: return at >= 0 && v.hands == hands::food_for(at) ? 1 : 0;
    case FeatureId::kServicePhase: return static_cast<int>(board.phase());
  }
  return 0.0;
}

Discretization Discretization::categorical(int cardinality) {
  if (cardinality < 1) throw std::invalid_argument("categorical cardinality must be >= 1");
  Discretization d;
  d.kind = Kind::kCategorical;
  d.cardinality = cardinality;
  return d;
}

Discretization Discretization::bins(std::vector<double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("bins need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("bin edges must be strictly increasing");
  Discretization d;
  d.kind = Kind::kBins;
  d.edges = std::move(edges);
  d.cardinality = static_cast<int>(d.edges.size()) - 1;
  return d;
}

Discretization Discretization::uniform_bins(double lo, double hi, int count) {
  std::vector<double> edges(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / count;
  edges.back() = hi;
  return bins(std::move(edges));
}

int Discretization::apply(double v) const {
  if (kind == Kind::kCategorical)
    return std::clamp(static_cast<int>(std::lround(v)), 0, cardinality - 1);
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const int bin = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(bin, 0, size() - 1);
}

Discretization natural_discretization(const FeatureSource& s, const EnvConfig& config) {
  const int size_card = std::max(config.group_size_max, config.max_table_size()) + 1;
  switch (s.id) {
    case FeatureId::kState:
      throw std::invalid_argument("source '" + s.text() + "' needs an explicit discretization");
    case FeatureId::kTableStage: return Discretization::categorical(kNumStages);
    case FeatureId::kTableSize:
    case FeatureId::kTableGroupSize:
    case FeatureId::kGroupSize: return Discretization::categorical(size_card);
    case FeatureId::kTableHappiness:
    case FeatureId::kGroupHappiness: return Discretization::uniform_bins(0.0, config.happiness_max, 5);
    case FeatureId::kHandsForTable: return Discretization::categorical(4);
    case FeatureId::kPosition: return Discretization::categorical(kNumTables + 1);
    case FeatureId::kHands: return Discretization::categorical(hands::kDirtyDishes + 1);
    case FeatureId::kAtStage: return Discretization::categorical(kNumStages + 1);
    case FeatureId::kServicePhase: return Discretization::categorical(kNumServiceTasks);
    default: return Discretization::categorical(2);
  }
}

SubstateSelector::SubstateSelector(int action, std::vector<SelectorVariable> variables, EnvConfig config)
    : action_(action), variables_(std::move(variables)), config_(std::move(config)) {
  if (action < 0 || action >= kNumActions) throw std::invalid_argument("selector action out of range");
}

std::vector<int> SubstateSelector::cardinalities() const {
  std::vector<int> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.discretization.size());
  return out;
}

Substate SubstateSelector::select(std::span<const double> state) const {
  const StateView view = StateView::decode(state);
  return select(view, ServiceBoard::analyze(view, config_));
}

Substate SubstateSelector::select(const StateView& view, const ServiceBoard& board) const {
  Substate out;
  select_into(view, board, out);
  return out;
}

void SubstateSelector::select_into(const StateView& view, const ServiceBoard& board, Substate& out) const {
  out.resize(variables_.size());
  for (std::size_t i = 0; i < variables_.size(); ++i)
    out[i] = variables_[i].discretization.apply(variables_[i].source.evaluate(view, board, config_));
}

}  // namespace dinerdash
