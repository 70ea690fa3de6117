// semcc: train, evaluate and sweep semantic-aware C&C schedulers.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 contract violation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semcc/semcc.hpp"

namespace {

using semcc::harness::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitContract = 2;

RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_flag) {
  RunConfig cfg = path.empty() ? RunConfig{} : semcc::harness::load_config(path);
  semcc::harness::apply_env_overrides(cfg);
  if (seed_flag) cfg.seed = *seed_flag;
  return cfg;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_validate(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path, std::nullopt);
  cfg.validate();
  std::cout << "config ok, hash " << semcc::harness::config_hash(cfg) << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, std::optional<long> steps,
              std::optional<std::uint64_t> seed, const std::string& checkpoint_out) {
  RunConfig cfg = load_run_config(config_path, seed);
  if (steps) cfg.total_steps = *steps;
  cfg.validate();
  const auto sim = cfg.to_sim_config();
  const std::string hash = semcc::harness::config_hash(cfg);
  auto agent = semcc::ppo::make_agent(sim, cfg.to_ppo_config());
  std::printf("training K=%d N=%d e=%d steps=%ld config=%s\n", sim.n_uav, sim.n_rb, sim.repeat_e,
              cfg.total_steps, hash.c_str());
  auto save = [&](const semcc::ppo::PpoAgent& a, long) {
    if (!checkpoint_out.empty()) semcc::ppo::save_checkpoint(a, hash, checkpoint_out);
  };
  const auto res = semcc::ppo::train(agent, sim, save);
  std::printf("step,mean_step_reward,eval_return,entropy,clip_fraction,value_loss\n");
  for (const auto& p : res.curve)
    std::printf("%ld,%.6f,%.1f,%.6f,%.6f,%.6f\n", p.step, p.mean_step_reward, p.eval_return,
                p.entropy, p.clip_fraction, p.value_loss);
  if (!checkpoint_out.empty()) {
    semcc::ppo::save_checkpoint(agent, hash, checkpoint_out);
    std::printf("checkpoint written to %s\n", checkpoint_out.c_str());
  }
  if (res.aborted_updates > 0) std::printf("warning: %d updates aborted on non-finite values\n", res.aborted_updates);
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& scheduler, int episodes) {
  RunConfig cfg = load_run_config(config_path, std::nullopt);
  cfg.validate();
  const auto sim = cfg.to_sim_config();
  std::optional<semcc::ppo::PpoAgent> agent;
  if (scheduler == "ppo") {
    if (checkpoint.empty()) throw semcc::harness::UsageError("--checkpoint is required for ppo");
    agent.emplace(semcc::ppo::make_agent(sim, cfg.to_ppo_config()));
    semcc::ppo::load_checkpoint(*agent, checkpoint);
  }
  std::printf("scheduler,seed,attempts,successes,effective_total,effective_delivered,effectiveness,reward\n");
  double eff_sum = 0.0, att_sum = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    const auto m = semcc::harness::run_episode(scheduler, sim, seed, agent ? &*agent : nullptr);
    std::printf("%s,%llu,%ld,%ld,%ld,%ld,%.6f,%.1f\n", scheduler.c_str(),
                static_cast<unsigned long long>(seed), m.attempts, m.successes, m.effective_total,
                m.effective_delivered, m.effectiveness(), m.total_reward());
    eff_sum += m.effectiveness();
    att_sum += static_cast<double>(m.attempts);
  }
  if (episodes > 0)
    std::printf("mean attempts %.2f, mean effectiveness %.6f\n", att_sum / episodes, eff_sum / episodes);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& schedulers, int seeds, const std::string& out_dir) {
  semcc::harness::SweepSpec spec;
  spec.base = load_run_config(config_path, std::nullopt);
  spec.axis = semcc::harness::parse_axis(axis);
  for (const auto& v : split_csv(values)) {
    try {
      spec.values.push_back(std::stoi(v));
    } catch (const std::exception&) {
      throw semcc::harness::UsageError("bad axis value '" + v + "'");
    }
  }
  spec.schedulers = split_csv(schedulers);
  spec.seeds = seeds;
  const auto res = semcc::harness::sweep(spec);
  for (const auto& p : semcc::harness::report(res, spec.base, out_dir)) std::printf("wrote %s\n", p.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-aware multi-UAV C&C scheduling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed;
  std::string checkpoint_out;
  auto* train = app.add_subcommand("train", "Train a PPO scheduler");
  train->add_option("--config", config_path, "Config file (key = value)");
  train->add_option("--steps", steps, "Total environment steps");
  train->add_option("--seed", seed, "Scenario seed");
  train->add_option("--checkpoint-out", checkpoint_out, "Checkpoint path");

  std::string checkpoint, scheduler = "greedy";
  int episodes = 10;
  auto* eval = app.add_subcommand("eval", "Evaluate a scheduler over episodes");
  eval->add_option("--config", config_path, "Config file");
  eval->add_option("--checkpoint", checkpoint, "PPO checkpoint (for --scheduler ppo)");
  eval->add_option("--scheduler", scheduler, "bit | random | greedy | ppo")
      ->check(CLI::IsMember({"bit", "random", "greedy", "ppo"}));
  eval->add_option("--episodes", episodes, "Episode count")->check(CLI::PositiveNumber);

  std::string axis = "e", values, schedulers = "bit,greedy", out_dir = ".";
  int seeds = 3;
  auto* sweep = app.add_subcommand("sweep", "Sweep repeat window e or UAV count k");
  sweep->add_option("--config", config_path, "Base config file");
  sweep->add_option("--axis", axis, "e | k")->check(CLI::IsMember({"e", "k"}));
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("--schedulers", schedulers, "Comma-separated schedulers");
  sweep->add_option("--seeds", seeds, "Seeds per point (>= 3)");
  sweep->add_option("--out-dir", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate-config", "Parse and check a config file");
  validate->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(config_path, steps, seed, checkpoint_out);
    if (*eval) return cmd_eval(config_path, checkpoint, scheduler, episodes);
    if (*sweep) return cmd_sweep(config_path, axis, values, schedulers, seeds, out_dir);
    if (*validate) return cmd_validate(config_path);
  } catch (const semcc::ContractError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const semcc::DomainError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const semcc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const semcc::harness::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
