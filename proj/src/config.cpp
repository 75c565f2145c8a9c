#include "dinerdash/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "dinerdash/errors.hpp"

namespace dinerdash {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': not a number: " + std::string(v));
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': not an integer: " + std::string(v));
  return out;
}

using Setter = std::function<void(EnvConfig&, std::string_view key, std::string_view value)>;

Setter real(double EnvConfig::*field) {
  return [field](EnvConfig& c, std::string_view k, std::string_view v) { c.*field = parse_double(k, v); };
}
Setter integer(int EnvConfig::*field) {
  return [field](EnvConfig& c, std::string_view k, std::string_view v) { c.*field = parse_int(k, v); };
}
Setter reward(double RewardSchedule::*field) {
  return [field](EnvConfig& c, std::string_view k, std::string_view v) {
    c.rewards.*field = parse_double(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"table_sizes",
       [](EnvConfig& c, std::string_view k, std::string_view v) {
         std::vector<int> sizes;
         std::string_view rest = v;
         while (!rest.empty()) {
           const auto comma = rest.find(',');
           sizes.push_back(parse_int(k, trim(rest.substr(0, comma))));
           if (comma == std::string_view::npos) break;
           rest = rest.substr(comma + 1);
         }
         if (sizes.size() != kNumTables)
           throw ConfigError("table_sizes must have 6 entries");
         std::copy(sizes.begin(), sizes.end(), c.table_sizes.begin());
       }},
      {"queue_capacity", integer(&EnvConfig::queue_capacity)},
      {"max_lives", integer(&EnvConfig::max_lives)},
      {"arrival_prob", real(&EnvConfig::arrival_prob)},
      {"group_size_min", integer(&EnvConfig::group_size_min)},
      {"group_size_max", integer(&EnvConfig::group_size_max)},
      {"happiness_max", real(&EnvConfig::happiness_max)},
      {"decay_queue", real(&EnvConfig::decay_queue)},
      {"decay_await_order", real(&EnvConfig::decay_await_order)},
      {"decay_await_food", real(&EnvConfig::decay_await_food)},
      {"decay_await_bill", real(&EnvConfig::decay_await_bill)},
      {"cook_steps", integer(&EnvConfig::cook_steps)},
      {"eat_steps", integer(&EnvConfig::eat_steps)},
      {"r_seat", reward(&RewardSchedule::seat)},
      {"r_take_order", reward(&RewardSchedule::take_order)},
      {"r_submit", reward(&RewardSchedule::submit)},
      {"r_pickup", reward(&RewardSchedule::pickup)},
      {"r_serve", reward(&RewardSchedule::serve)},
      {"r_bill_base", reward(&RewardSchedule::bill_base)},
      {"r_bill_per_heart", reward(&RewardSchedule::bill_per_heart)},
      {"r_clean", reward(&RewardSchedule::clean)},
      {"r_return", reward(&RewardSchedule::ret)},
      {"r_illegal", reward(&RewardSchedule::illegal)},
      {"r_leave", reward(&RewardSchedule::leave)},
      {"gamma", real(&EnvConfig::gamma)},
      {"max_steps", integer(&EnvConfig::max_steps)},
  };
  return table;
}

}  // namespace

void EnvConfig::validate() const {
  for (int s : table_sizes)
    if (s < 1) throw ConfigError("table_sizes entries must be >= 1");
  if (queue_capacity != kQueueSlots) throw ConfigError("queue_capacity must be 7");
  if (max_lives < 1 || max_lives > kMaxLives) throw ConfigError("max_lives must be in [1, 5]");
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) throw ConfigError("arrival_prob must be in [0, 1]");
  if (group_size_min < 1) throw ConfigError("group_size_min must be >= 1");
  if (group_size_max < group_size_min) throw ConfigError("group_size_max must be >= group_size_min");
  if (!(happiness_max > 0.0)) throw ConfigError("happiness_max must be > 0");
  if (!(decay_queue >= 0.0)) throw ConfigError("decay_queue must be >= 0");
  if (!(decay_await_order >= 0.0)) throw ConfigError("decay_await_order must be >= 0");
  if (!(decay_await_food >= 0.0)) throw ConfigError("decay_await_food must be >= 0");
  if (!(decay_await_bill >= 0.0)) throw ConfigError("decay_await_bill must be >= 0");
  if (cook_steps < 1) throw ConfigError("cook_steps must be >= 1");
  if (eat_steps < 1) throw ConfigError("eat_steps must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
}

int EnvConfig::max_table_size() const {
  return *std::max_element(table_sizes.begin(), table_sizes.end());
}

std::string EnvConfig::to_text() const {
  std::ostringstream out;
  out << "table_sizes = ";
  for (int i = 0; i < kNumTables; ++i) out << (i ? "," : "") << table_sizes[i];
  out << "\n";
  out << "queue_capacity = " << queue_capacity << "\n"
      << "max_lives = " << max_lives << "\n"
      << "arrival_prob = " << fmt_double(arrival_prob) << "\n"
      << "group_size_min = " << group_size_min << "\n"
      << "group_size_max = " << group_size_max << "\n"
      << "happiness_max = " << fmt_double(happiness_max) << "\n"
      << "decay_queue = " << fmt_double(decay_queue) << "\n"
      << "decay_await_order = " << fmt_double(decay_await_order) << "\n"
      << "decay_await_food = " << fmt_double(decay_await_food) << "\n"
      << "decay_await_bill = " << fmt_double(decay_await_bill) << "\n"
      << "cook_steps = " << cook_steps << "\n"
      << "eat_steps = " << eat_steps << "\n"
      << "r_seat = " << fmt_double(rewards.seat) << "\n"
      << "r_take_order = " << fmt_double(rewards.take_order) << "\n"
      << "r_submit = " << fmt_double(rewards.submit) << "\n"
      << "r_pickup = " << fmt_double(rewards.pickup) << "\n"
      << "r_serve = " << fmt_double(rewards.serve) << "\n"
      << "r_bill_base = " << fmt_double(rewards.bill_base) << "\n"
      << "r_bill_per_heart = " << fmt_double(rewards.bill_per_heart) << "\n"
      << "r_clean = " << fmt_double(rewards.clean) << "\n"
      << "r_return = " << fmt_double(rewards.ret) << "\n"
      << "r_illegal = " << fmt_double(rewards.illegal) << "\n"
      << "r_leave = " << fmt_double(rewards.leave) << "\n"
      << "gamma = " << fmt_double(gamma) << "\n"
      << "max_steps = " << max_steps << "\n";
  return out.str();
}

std::string EnvConfig::hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EnvConfig preset_config(std::string_view name) {
  EnvConfig c;
  if (name == "base") return c;
  if (name == "hard") {
    c.arrival_prob = 0.14;
    c.decay_queue = 0.03;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

EnvConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string preset(kDefaultPreset);
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    if (key == "preset") {
      preset = value;
      continue;
    }
    if (!setters().contains(key)) throw ConfigError("unknown config key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }
  EnvConfig c = preset_config(preset);
  for (const auto& [k, v] : entries) setters().find(k)->second(c, k, v);
  c.validate();
  return c;
}

EnvConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace dinerdash
