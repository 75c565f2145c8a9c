#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dinerdash/config.hpp"
#include "dinerdash/policy.hpp"

namespace dinerdash {

// Seeds used by `eval` unless overridden; disjoint from the demonstration
// seeds 0..273.
inline constexpr uint64_t kEvalSeedBase = 10000;
inline constexpr int kEvalEpisodes = 100;

struct EvalReport {
  std::string policy;
  std::string config_hash;
  int n_episodes = 0;
  std::vector<uint64_t> seeds;
  std::vector<double> returns;  // undiscounted
  std::vector<int> lengths;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;

  // Fills n_episodes and the summary statistics from the per-episode lists.
  void summarize();

  std::string to_json() const;
  // Throws DataError when the lists disagree with n_episodes or the stored
  // statistics cannot be recomputed from them.
  static EvalReport from_json(const std::string& text);
  void save(const std::string& path) const;
  static EvalReport load(const std::string& path);
};

// Runs seeds seed_base .. seed_base + n - 1 (one fresh episode each) and
// records the return and length. `workers` > 1 fans episodes out over
// threads, each with its own policy clone; results are merged in seed order.
EvalReport evaluate(const Policy& policy, const EnvConfig& config, int n_episodes, uint64_t seed_base,
                    int workers = 1);

struct Comparison {
  std::vector<std::size_t> ranking;  // indices into the input, best mean first
  std::string table;
  std::string csv;                   // rank,policy,n_episodes,mean,std,min,max,config_hash
  std::vector<std::string> warnings;
};

// Stable sort by mean, descending. Needs at least two reports.
Comparison compare(std::span<const EvalReport> reports);

// "expert", "random", or a checkpoint path (DPGM JSON or BC text, detected
// from the content). `sample` selects categorical DPGM action draws. The
// policy name is taken from the checkpoint file name. Throws DataError.
std::unique_ptr<Policy> load_policy(const std::string& spec, bool sample = false);

}  // namespace dinerdash
