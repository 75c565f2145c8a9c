#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "dinerdash/baselines.hpp"
#include "dinerdash/config.hpp"
#include "dinerdash/dpgm.hpp"
#include "dinerdash/errors.hpp"
#include "dinerdash/expert.hpp"
#include "dinerdash/harness.hpp"
#include "dinerdash/serve.hpp"
#include "dinerdash/trajectory.hpp"

using namespace dinerdash;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Options {
  std::string config_path;
  std::string preset;

  EnvConfig env_config() const {
    if (!config_path.empty()) return load_config_file(config_path);
    return preset_config(preset.empty() ? kDefaultPreset : preset);
  }
};

void check_dataset_config(const Dataset& data, const EnvConfig& config) {
  if (data.header.config_hash != config.hash())
    throw DataError("dataset was recorded under config " + data.header.config_hash + " but the active config is " +
                    config.hash() + " (pass the matching --config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diner Dash simulator, expert demonstrations, DPGM and BC training, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "Environment config file (key = value lines)");
  app.add_option("--preset", opt.preset, "Built-in config preset when no --config is given")
      ->check(CLI::IsMember({"base", "hard"}));

  // collect
  auto* collect = app.add_subcommand("collect", "Record demonstrations as JSON Lines");
  std::string collect_policy = "expert", collect_out;
  int collect_episodes_n = 274;
  uint64_t collect_seed = 0;
  collect->add_option("--policy", collect_policy, "expert or random")->check(CLI::IsMember({"expert", "random"}));
  collect->add_option("--episodes", collect_episodes_n, "Number of episodes")->check(CLI::PositiveNumber);
  collect->add_option("--seed", collect_seed, "Seed of the first episode (episode e uses seed + e)");
  collect->add_option("--out", collect_out, "Output .jsonl path")->required();

  // train-dpgm
  auto* train_dpgm = app.add_subcommand("train-dpgm", "Train the decomposed graphical-model policy");
  std::string dpgm_data, dpgm_structures, dpgm_out;
  bool dpgm_no_finetune = false;
  DpgmTrainConfig dpgm_cfg;
  train_dpgm->add_option("--data", dpgm_data, "Demonstration .jsonl")->required();
  train_dpgm->add_option("--structures", dpgm_structures, "Structure JSON (default: built-in structures)");
  train_dpgm->add_option("--out", dpgm_out, "Checkpoint path (.json)")->required();
  train_dpgm->add_flag("--no-finetune", dpgm_no_finetune, "Skip joint fine-tuning of theta and the net");
  train_dpgm->add_option("--seed", dpgm_cfg.seed, "Training seed");
  train_dpgm->add_option("--reweight-epochs", dpgm_cfg.reweight_epochs, "Epochs for the reweighting net")
      ->check(CLI::NonNegativeNumber);
  train_dpgm->add_option("--finetune-epochs", dpgm_cfg.finetune_epochs, "Joint fine-tuning epochs")
      ->check(CLI::NonNegativeNumber);

  // train-bc
  auto* train_bc = app.add_subcommand("train-bc", "Train the behaviour-cloning baseline");
  std::string bc_data, bc_out;
  BcTrainConfig bc_cfg;
  train_bc->add_option("--data", bc_data, "Demonstration .jsonl")->required();
  train_bc->add_option("--out", bc_out, "Checkpoint path")->required();
  train_bc->add_option("--epochs", bc_cfg.epochs, "Training epochs")->check(CLI::PositiveNumber);
  train_bc->add_option("--seed", bc_cfg.seed, "Training seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a policy over a fixed seed range");
  std::string eval_policy, eval_report;
  int eval_episodes = kEvalEpisodes, eval_workers = 1;
  uint64_t eval_seed = kEvalSeedBase;
  bool eval_sample = false;
  eval->add_option("--policy", eval_policy, "Checkpoint path, expert or random")->required();
  eval->add_option("--episodes", eval_episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "First evaluation seed");
  eval->add_option("--report", eval_report, "Write the report JSON here");
  eval->add_option("--workers", eval_workers, "Parallel episode workers")->check(CLI::PositiveNumber);
  eval->add_flag("--sample", eval_sample, "Sample DPGM actions instead of argmax");

  // compare
  auto* cmp = app.add_subcommand("compare", "Rank evaluation reports by mean return");
  std::vector<std::string> cmp_reports;
  std::string cmp_csv;
  cmp->add_option("reports", cmp_reports, "Report JSON files")->required()->expected(2, -1);
  cmp->add_option("--csv", cmp_csv, "Write the CSV table here");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve one environment over stdin/stdout (JSON lines)");

  // rollout
  auto* rollout = app.add_subcommand("rollout", "Play one episode and print the outcome");
  std::string rollout_policy = "expert";
  uint64_t rollout_seed = kEvalSeedBase;
  bool rollout_render = false, rollout_sample = false;
  rollout->add_option("--policy", rollout_policy, "Checkpoint path, expert or random");
  rollout->add_option("--seed", rollout_seed, "Episode seed");
  rollout->add_flag("--render", rollout_render, "Print the board after every step");
  rollout->add_flag("--sample", rollout_sample, "Sample DPGM actions instead of argmax");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const EnvConfig config = opt.env_config();

    if (*collect) {
      auto policy = load_policy(collect_policy);
      const DatasetHeader h = record_episodes(config, *policy, collect_episodes_n, collect_seed, collect_out);
      std::printf("wrote %d episodes, %ld pairs to %s\n", h.n_episodes, h.n_pairs, collect_out.c_str());
    } else if (*train_dpgm) {
      const Dataset data = load_dataset(dpgm_data);
      check_dataset_config(data, config);
      const StructureSet structures =
          dpgm_structures.empty() ? StructureSet::defaults(config) : StructureSet::load_file(dpgm_structures, config);
      dpgm_cfg.finetune = !dpgm_no_finetune;
      const DpgmTrainResult r = dpgm_train(data, structures, dpgm_cfg);
      r.policy.save(dpgm_out);
      for (int a : r.report.actions_without_positives)
        std::fprintf(stderr, "warning: no demonstrations of %s\n", Action::from_index(a).name().c_str());
      if (!r.report.reweight_loss.empty())
        std::printf("reweight: loss %.4f accuracy %.4f\n", r.report.reweight_loss.back(),
                    r.report.reweight_accuracy.back());
      if (!r.report.finetune_loss.empty())
        std::printf("finetune: loss %.4f accuracy %.4f\n", r.report.finetune_loss.back(),
                    r.report.finetune_accuracy.back());
      std::printf("saved %s\n", dpgm_out.c_str());
    } else if (*train_bc) {
      const Dataset data = load_dataset(bc_data);
      check_dataset_config(data, config);
      const BcTrainResult r = bc_train(data, config, bc_cfg);
      r.policy.save(bc_out);
      std::printf("bc: loss %.4f accuracy %.4f\nsaved %s\n", r.loss_trace.back(), r.accuracy_trace.back(),
                  bc_out.c_str());
    } else if (*eval) {
      auto policy = load_policy(eval_policy, eval_sample);
      const EvalReport report = evaluate(*policy, config, eval_episodes, eval_seed, eval_workers);
      std::printf("%s: mean %.2f std %.2f min %.2f max %.2f over %d episodes\n", report.policy.c_str(), report.mean,
                  report.std, report.min, report.max, report.n_episodes);
      if (!eval_report.empty()) report.save(eval_report);
    } else if (*cmp) {
      std::vector<EvalReport> reports;
      for (const auto& p : cmp_reports) reports.push_back(EvalReport::load(p));
      const Comparison c = compare(reports);
      for (const auto& w : c.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::cout << c.table;
      if (!cmp_csv.empty()) {
        std::FILE* f = std::fopen(cmp_csv.c_str(), "wb");
        if (!f) throw DataError("cannot write " + cmp_csv);
        std::fputs(c.csv.c_str(), f);
        std::fclose(f);
      }
    } else if (*serve) {
      std::ios::sync_with_stdio(false);
      serve_env(config, std::cin, std::cout);
    } else if (*rollout) {
      auto policy = load_policy(rollout_policy, rollout_sample);
      Env env(config, rollout_seed);
      env.reset();
      policy->begin_episode(rollout_seed);
      if (rollout_render) std::cout << env.render_text() << '\n';
      while (!env.done()) {
        const int a = policy->act(env);
        const StepResult r = env.step(a);
        if (rollout_render) {
          std::cout << "action: " << Action::from_index(a).name() << "  reward: " << r.reward << '\n';
          std::cout << env.render_text() << '\n';
        }
      }
      std::printf("return %.2f  steps %d  lives %d\n", env.state().cumulative_return, env.state().step_count,
                  env.state().lives);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
