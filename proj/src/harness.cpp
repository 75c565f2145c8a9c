#include "dinerdash/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dinerdash/baselines.hpp"
#include "dinerdash/dpgm.hpp"
#include "dinerdash/env.hpp"
#include "dinerdash/errors.hpp"
#include "dinerdash/expert.hpp"

namespace dinerdash {

void EvalReport::summarize() {
  n_episodes = static_cast<int>(returns.size());
  if (returns.empty()) {
    mean = std = min = max = 0.0;
    return;
  }
  const double n = static_cast<double>(returns.size());
  mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  std = std::sqrt(ss / n);
  min = *std::min_element(returns.begin(), returns.end());
  max = *std::max_element(returns.begin(), returns.end());
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "dinerdash-eval";
  j["policy"] = policy;
  j["config_hash"] = config_hash;
  j["n_episodes"] = n_episodes;
  j["mean"] = mean;
  j["std"] = std;
  j["min"] = min;
  j["max"] = max;
  j["seeds"] = seeds;
  j["returns"] = returns;
  j["lengths"] = lengths;
  return j.dump(1) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "dinerdash-eval") throw DataError("not an evaluation report");
    r.policy = j.at("policy").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    r.returns = j.at("returns").get<std::vector<double>>();
    r.lengths = j.at("lengths").get<std::vector<int>>();
    const int n = j.at("n_episodes").get<int>();
    const double mean = j.at("mean").get<double>();
    const double sd = j.at("std").get<double>();
    if (r.seeds.size() != static_cast<std::size_t>(n) || r.returns.size() != static_cast<std::size_t>(n) ||
        r.lengths.size() != static_cast<std::size_t>(n))
      throw DataError("report lists do not match n_episodes");
    r.summarize();
    const double tol = 1e-9 * std::max(1.0, std::abs(r.mean));
    if (std::abs(r.mean - mean) > tol || std::abs(r.std - sd) > 1e-9 * std::max(1.0, r.std))
      throw DataError("report statistics do not match per-episode returns");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("evaluation report: ") + e.what());
  }
  return r;
}

void EvalReport::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_json();
}

EvalReport EvalReport::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

namespace {

void run_episodes(Policy& policy, const EnvConfig& config, uint64_t seed_base, std::size_t first,
                  std::size_t last, std::vector<double>& returns, std::vector<int>& lengths) {
  Env env(config, seed_base);
  for (std::size_t i = first; i < last; ++i) {
    const uint64_t seed = seed_base + i;
    env.reset(seed);
    policy.begin_episode(seed);
    double total = 0.0;
    while (!env.done()) total += env.step(policy.act(env)).reward;
    returns[i] = total;
    lengths[i] = env.state().step_count;
  }
}

}  // namespace

EvalReport evaluate(const Policy& policy, const EnvConfig& config, int n_episodes, uint64_t seed_base,
                    int workers) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  EvalReport report;
  report.policy = policy.name();
  report.config_hash = config.hash();
  const auto n = static_cast<std::size_t>(n_episodes);
  report.returns.assign(n, 0.0);
  report.lengths.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) report.seeds.push_back(seed_base + i);

  const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), 1, n);
  if (w == 1) {
    auto p = policy.clone();
    run_episodes(*p, config, seed_base, 0, n, report.returns, report.lengths);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t k = 0; k < w; ++k) {
      const std::size_t first = k * chunk, last = std::min(n, first + chunk);
      threads.emplace_back([&, k, first, last] {
        try {
          auto p = policy.clone();
          run_episodes(*p, config, seed_base, first, last, report.returns, report.lengths);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  report.summarize();
  return report;
}

Comparison compare(std::span<const EvalReport> reports) {
  if (reports.size() < 2) throw std::invalid_argument("compare needs at least two reports");
  Comparison c;
  c.ranking.resize(reports.size());
  std::iota(c.ranking.begin(), c.ranking.end(), 0);
  std::stable_sort(c.ranking.begin(), c.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].mean > reports[b].mean; });
  for (const auto& r : reports)
    if (r.config_hash != reports.front().config_hash)
      c.warnings.push_back("config hash of '" + r.policy + "' (" + r.config_hash + ") differs from '" +
                           reports.front().policy + "' (" + reports.front().config_hash + ")");

  std::ostringstream table, csv;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-4s %-20s %8s %10s %10s %10s %10s\n", "rank", "policy", "episodes", "mean", "std",
                "min", "max");
  table << buf;
  csv << "rank,policy,n_episodes,mean,std,min,max,config_hash\n";
  for (std::size_t i = 0; i < c.ranking.size(); ++i) {
    const EvalReport& r = reports[c.ranking[i]];
    std::snprintf(buf, sizeof(buf), "%-4zu %-20s %8d %10.2f %10.2f %10.2f %10.2f\n", i + 1, r.policy.c_str(),
                  r.n_episodes, r.mean, r.std, r.min, r.max);
    table << buf;
    std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%.6f,%.6f,%.6f,%.6f,%s\n", i + 1, r.policy.c_str(), r.n_episodes,
                  r.mean, r.std, r.min, r.max, r.config_hash.c_str());
    csv << buf;
  }
  c.table = table.str();
  c.csv = csv.str();
  return c;
}

std::unique_ptr<Policy> load_policy(const std::string& spec, bool sample) {
  if (spec == "expert") return std::make_unique<ExpertPolicy>();
  if (spec == "random") return std::make_unique<RandomAgent>();
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw DataError("cannot open policy checkpoint " + spec);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string stem = std::filesystem::path(spec).stem().string();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    auto p = std::make_shared<const DpgmPolicy>(DpgmPolicy::from_json(text));
    return std::make_unique<DpgmAgent>(p, sample ? ActMode::kSample : ActMode::kArgmax, stem);
  }
  if (text.rfind("dinerdash-bc", 0) == 0) {
    auto p = std::make_shared<const BcPolicy>(BcPolicy::from_text(text));
    return std::make_unique<BcAgent>(p, stem);
  }
  throw DataError("unrecognised policy checkpoint " + spec);
}

}  // namespace dinerdash
