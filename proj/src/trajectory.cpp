#include "dinerdash/trajectory.hpp"

#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "dinerdash/errors.hpp"

namespace dinerdash {

using ojson = nlohmann::ordered_json;

std::vector<std::pair<std::size_t, std::size_t>> Dataset::episodes() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].done) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  return out;
}

namespace {

// line_of(i) gives the file line of transition i (header is line 1).
std::string where(std::size_t i) { return "line " + std::to_string(i + 2); }

}  // namespace

void Dataset::validate() const {
  if (header.n_episodes <= 0 || transitions.empty()) throw DataError("no episodes");
  int episodes_seen = 0;
  int expected_t = 0;
  int current_id = -1;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Transition& tr = transitions[i];
    if (expected_t == 0) {
      if (tr.episode_id <= current_id)
        throw DataError(where(i) + ": episode_id must increase between episodes");
      current_id = tr.episode_id;
    } else if (tr.episode_id != current_id) {
      throw DataError(where(i) + ": episode " + std::to_string(current_id) + " ends without done");
    }
    if (tr.t != expected_t) throw DataError(where(i) + ": t must be consecutive from 0");
    if (tr.action < 0 || tr.action >= kNumActions) throw DataError(where(i) + ": action out of range");
    if (tr.done) {
      ++episodes_seen;
      expected_t = 0;
    } else {
      ++expected_t;
    }
  }
  if (expected_t != 0) throw DataError("last episode has no done transition");
  if (episodes_seen != header.n_episodes)
    throw DataError("header declares " + std::to_string(header.n_episodes) + " episodes, body has " +
                    std::to_string(episodes_seen));
  if (static_cast<long>(transitions.size()) != header.n_pairs)
    throw DataError("header declares " + std::to_string(header.n_pairs) + " pairs, body has " +
                    std::to_string(transitions.size()));
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
  ojson h;
  h["type"] = "header";
  h["format"] = "dinerdash-transitions";
  h["version"] = 1;
  h["policy"] = dataset.header.policy;
  h["config_hash"] = dataset.header.config_hash;
  h["seed_base"] = dataset.header.seed_base;
  h["n_episodes"] = dataset.header.n_episodes;
  h["n_pairs"] = dataset.header.n_pairs;
  out << h.dump() << "\n";
  for (const Transition& tr : dataset.transitions) {
    ojson j;
    j["episode_id"] = tr.episode_id;
    j["t"] = tr.t;
    j["state"] = tr.state;
    j["action"] = tr.action;
    j["reward"] = tr.reward;
    j["done"] = tr.done;
    out << j.dump() << "\n";
  }
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_dataset(dataset, out);
  if (!out) throw DataError("write failed: " + path);
}

Dataset load_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no);
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(at + ": malformed JSON");
    }
    try {
      if (!have_header) {
        if (j.value("type", "") != "header") throw DataError(at + ": expected header line");
        ds.header.policy = j.at("policy").get<std::string>();
        ds.header.config_hash = j.at("config_hash").get<std::string>();
        ds.header.seed_base = j.at("seed_base").get<uint64_t>();
        ds.header.n_episodes = j.at("n_episodes").get<int>();
        ds.header.n_pairs = j.at("n_pairs").get<long>();
        have_header = true;
        continue;
      }
      Transition tr;
      tr.episode_id = j.at("episode_id").get<int>();
      tr.t = j.at("t").get<int>();
      const auto& state = j.at("state");
      if (!state.is_array() || state.size() != kStateDim)
        throw DataError(at + ": state must have 40 entries, got " +
                        std::to_string(state.is_array() ? state.size() : 0));
      for (int i = 0; i < kStateDim; ++i) tr.state[i] = state[i].get<double>();
      tr.action = j.at("action").get<int>();
      tr.reward = j.at("reward").get<double>();
      tr.done = j.at("done").get<bool>();
      ds.transitions.push_back(tr);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(at + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("no episodes");
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_dataset(in);
}

Dataset collect_episodes(const EnvConfig& config, Policy& policy, int n_episodes, uint64_t seed_base) {
  if (n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
  Dataset ds;
  ds.header.policy = policy.name();
  ds.header.config_hash = config.hash();
  ds.header.seed_base = seed_base;
  ds.header.n_episodes = n_episodes;
  Env env(config, seed_base);
  for (int e = 0; e < n_episodes; ++e) {
    const uint64_t seed = seed_base + static_cast<uint64_t>(e);
    StateVec state = env.reset(seed);
    policy.begin_episode(seed);
    int t = 0;
    while (!env.done()) {
      const int action = policy.act(env);
      const StepResult r = env.step(action);
      ds.transitions.push_back({e, t++, state, action, r.reward, r.done});
      state = r.state;
    }
  }
  ds.header.n_pairs = static_cast<long>(ds.transitions.size());
  return ds;
}

DatasetHeader record_episodes(const EnvConfig& config, Policy& policy, int n_episodes, uint64_t seed_base,
                              const std::string& path) {
  const Dataset ds = collect_episodes(config, policy, n_episodes, seed_base);
  save_dataset(ds, path);
  return ds.header;
}

RelabeledData relabel_for_action(const Dataset& dataset, const SubstateSelector& selector) {
  RelabeledData out;
  out.pairs.reserve(dataset.transitions.size());
  for (const Transition& tr : dataset.transitions) {
    const int y = tr.action == selector.action() ? 1 : 0;
    out.pairs.push_back({selector.select(tr.state), y});
    (y ? out.positives : out.negatives)++;
  }
  return out;
}

}  // namespace dinerdash
