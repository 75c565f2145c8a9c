#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dinerdash {

inline constexpr int kNumTables = 6;
inline constexpr int kQueueSlots = 7;
inline constexpr int kMaxLives = 5;

struct RewardSchedule {
  double seat = 2.0;
  double take_order = 1.0;
  double submit = 1.0;
  double pickup = 1.0;
  double serve = 2.0;
  double bill_base = 10.0;
  double bill_per_heart = 2.0;
  double clean = 1.0;
  double ret = 1.0;  // RETURN_DISHES
  double illegal = -1.0;
  double leave = -100.0;

  bool operator==(const RewardSchedule&) const = default;
};

// Restaurant parameters. Default-constructed values are the "base" preset.
struct EnvConfig {
  std::array<int, kNumTables> table_sizes{2, 2, 4, 4, 6, 6};
  int queue_capacity = kQueueSlots;
  int max_lives = kMaxLives;
  double arrival_prob = 0.10;
  int group_size_min = 1;
  int group_size_max = 6;
  double happiness_max = 5.0;
  double decay_queue = 0.02;
  double decay_await_order = 0.02;
  double decay_await_food = 0.01;
  double decay_await_bill = 0.01;
  int cook_steps = 15;
  int eat_steps = 20;
  RewardSchedule rewards;
  double gamma = 0.99;
  int max_steps = 2000;

  // Throws ConfigError naming the first field that is out of range.
  void validate() const;

  int max_table_size() const;

  // Canonical "key = value" rendering; parse_config(to_text()) round-trips.
  std::string to_text() const;
  // FNV-1a 64 of to_text(), as 16 lowercase hex digits.
  std::string hash() const;

  bool operator==(const EnvConfig&) const = default;
};

// "base" or "hard". Unknown names throw ConfigError.
EnvConfig preset_config(std::string_view name);

// The preset used by every experiment unless a config file overrides it.
inline constexpr std::string_view kDefaultPreset = "hard";

// Parses the key/value config format:
//
//   # comment
//   preset = hard            (applied first, wherever it appears)
//   table_sizes = 2,2,4,4,6,6
//   arrival_prob = 0.14
//   r_leave = -100
//
// Keys are the EnvConfig field names; reward constants use the r_ prefix
// (r_seat, r_take_order, r_submit, r_pickup, r_serve, r_bill_base,
// r_bill_per_heart, r_clean, r_return, r_illegal, r_leave). Unknown keys,
// duplicate keys and unparsable values throw ConfigError. The result is
// validated.
EnvConfig parse_config(std::string_view text);
EnvConfig load_config_file(const std::string& path);

}  // namespace dinerdash
