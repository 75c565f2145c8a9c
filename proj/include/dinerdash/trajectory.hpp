#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dinerdash/env.hpp"
#include "dinerdash/factor_graph.hpp"
#include "dinerdash/features.hpp"
#include "dinerdash/policy.hpp"

namespace dinerdash {

struct Transition {
  int episode_id = 0;
  int t = 0;
  StateVec state{};
  int action = 0;
  double reward = 0.0;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

struct DatasetHeader {
  std::string policy;
  std::string config_hash;
  uint64_t seed_base = 0;
  int n_episodes = 0;
  long n_pairs = 0;

  bool operator==(const DatasetHeader&) const = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Transition> transitions;

  // Index ranges [begin, end) of each episode's transitions.
  std::vector<std::pair<std::size_t, std::size_t>> episodes() const;
  // Checks the invariants load_dataset enforces; throws DataError.
  void validate() const;
};

// JSON Lines. Line 1 is the header
//   {"type":"header","format":"dinerdash-transitions","version":1,
//    "policy":..,"config_hash":..,"seed_base":..,"n_episodes":..,"n_pairs":..}
// followed by one transition per line
//   {"episode_id":..,"t":..,"state":[40 numbers],"action":..,"reward":..,"done":..}
// Episode e was played with seed seed_base + e.
void save_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

// Plays n_episodes with seeds seed_base .. seed_base + n - 1.
Dataset collect_episodes(const EnvConfig& config, Policy& policy, int n_episodes, uint64_t seed_base);
// collect_episodes + save_dataset. Throws DataError if the path is unwritable.
DatasetHeader record_episodes(const EnvConfig& config, Policy& policy, int n_episodes, uint64_t seed_base,
                              const std::string& path);

struct RelabeledData {
  std::vector<LabeledSubstate> pairs;
  long positives = 0;
  long negatives = 0;
};

// One (selector(state), y) pair per transition, y = 1 iff the recorded
// action is the selector's action.
RelabeledData relabel_for_action(const Dataset& dataset, const SubstateSelector& selector);

}  // namespace dinerdash
