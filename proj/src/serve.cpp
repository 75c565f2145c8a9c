#include "dinerdash/serve.hpp"

#include <istream>
#include <json.hpp>
#include <optional>
#include <ostream>

#include "dinerdash/action.hpp"

namespace dinerdash {

using nlohmann::ordered_json;

namespace {

ordered_json state_json(const StateVec& s) { return ordered_json(std::vector<double>(s.begin(), s.end())); }

}  // namespace

std::string reset_reply(const StateVec& state) {
  ordered_json j;
  j["state"] = state_json(state);
  return j.dump();
}

std::string step_reply(const StepResult& r) {
  ordered_json j;
  j["state"] = state_json(r.state);
  j["reward"] = r.reward;
  j["done"] = r.done;
  ordered_json info;
  info["lives"] = r.info.lives;
  info["step"] = r.info.step_count;
  info["illegal"] = r.info.illegal;
  info["action_reward"] = r.info.action_reward;
  info["departures"] = r.info.departures;
  info["events"] = r.info.events;
  j["info"] = std::move(info);
  return j.dump();
}

std::string spec_reply() {
  ordered_json j;
  j["n_actions"] = kNumActions;
  j["state_dim"] = kStateDim;
  return j.dump();
}

std::string error_reply(const std::string& message) {
  ordered_json j;
  j["error"] = message;
  return j.dump();
}

int serve_env(const EnvConfig& config, std::istream& in, std::ostream& out) {
  std::optional<Env> env;
  int handled = 0;
  std::string line;
  auto reply = [&](const std::string& s) { out << s << '\n' << std::flush; };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++handled;
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      reply(error_reply("malformed JSON"));
      continue;
    }
    if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string()) {
      reply(error_reply("request must be an object with a string \"cmd\""));
      continue;
    }
    const std::string cmd = req["cmd"].get<std::string>();
    try {
      if (cmd == "close") return handled;
      if (cmd == "spec") {
        reply(spec_reply());
      } else if (cmd == "reset") {
        uint64_t seed = 0;
        if (req.contains("seed")) {
          if (!req["seed"].is_number_integer() || req["seed"].get<int64_t>() < 0) {
            reply(error_reply("seed must be a non-negative integer"));
            continue;
          }
          seed = req["seed"].get<uint64_t>();
        }
        if (!env) env.emplace(config, seed);
        reply(reset_reply(env->reset(seed)));
      } else if (cmd == "step") {
        if (!req.contains("action") || !req["action"].is_number_integer()) {
          reply(error_reply("step needs an integer \"action\""));
          continue;
        }
        const int64_t a = req["action"].get<int64_t>();
        if (a < 0 || a >= kNumActions) {
          reply(error_reply("action out of range [0, 57): " + std::to_string(a)));
          continue;
        }
        if (!env || !env->started()) {
          reply(error_reply("step before reset"));
          continue;
        }
        if (env->done()) {
          reply(error_reply("episode is over; send reset"));
          continue;
        }
        reply(step_reply(env->step(static_cast<int>(a))));
      } else {
        reply(error_reply("unknown command: " + cmd));
      }
    } catch (const std::exception& e) {
      reply(error_reply(e.what()));
    }
  }
  return handled;
}

}  // namespace dinerdash
