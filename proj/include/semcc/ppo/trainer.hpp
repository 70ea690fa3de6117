#pragma once

// Rollout collection against the environment and the train loop.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "semcc/env.hpp"
#include "semcc/ppo/agent.hpp"
#include "semcc/schedulers.hpp"

namespace semcc::ppo {

inline PpoAgent make_agent(const SimConfig& sim, const PpoConfig& cfg) {
  return PpoAgent(ActionLayout::for_env(sim.n_uav, sim.n_rb),
                  static_cast<std::size_t>(sim.observation_size()), cfg);
}

// Drives an Env with a PpoAgent, sampling or taking the per-RB argmax.
class PpoScheduler final : public Scheduler {
 public:
  PpoScheduler(PpoAgent& agent, bool greedy) : agent_(&agent), greedy_(greedy) {}
  std::string name() const override { return "ppo"; }
  ScheduleAction schedule(const Env& env) override {
    const auto obs = env.encode_observation();
    const auto mask = base_mask(agent_->layout(), env.entities());
    return to_schedule(agent_->layout(), agent_->act(obs, mask, greedy_).action.choices);
  }

 private:
  PpoAgent* agent_;
  bool greedy_;
};

class RolloutCollector {
 public:
  RolloutCollector(SimConfig sim, std::uint64_t seed) : env_(sim), seeds_(seed) {
    obs_ = env_.reset(seeds_.engine()());
  }

  RolloutBatch collect(PpoAgent& agent, long steps, std::vector<double>* episode_returns = nullptr) {
    RolloutBatch batch;
    batch.steps.reserve(static_cast<std::size_t>(steps));
    double value = agent.value(obs_);
    for (long s = 0; s < steps; ++s) {
      Transition t;
      t.observation = obs_;
      t.mask = base_mask(agent.layout(), env_.entities());
      const auto z = agent.logits(obs_);
      auto sampled = sample_action(agent.layout(), z, t.mask, &agent.rng(), false);
      t.choices = sampled.choices;
      t.log_prob = sampled.log_prob;
      t.value = value;
      const auto out = env_.step(to_schedule(agent.layout(), t.choices));
      t.reward = out.reward;
      episode_return_ += out.reward;
      t.next_value = agent.value(out.observation);
      t.episode_end = out.done;
      if (out.done) {
        if (episode_returns) episode_returns->push_back(episode_return_);
        episode_return_ = 0.0;
        obs_ = env_.reset(seeds_.engine()());
        value = agent.value(obs_);
      } else {
        obs_ = out.observation;
        value = t.next_value;
      }
      batch.steps.push_back(std::move(t));
    }
    return batch;
  }

 private:
  Env env_;
  Rng seeds_;
  Observation obs_;
  double episode_return_ = 0.0;
};

// Total reward of one episode under the given scheduler.
inline double run_reward_episode(const SimConfig& sim, Scheduler& sched, std::uint64_t seed) {
  Env env(sim);
  env.reset(seed);
  sched.reset();
  double total = 0.0;
  while (!env.done()) total += env.step(sched.schedule(env)).reward;
  return total;
}

struct CurvePoint {
  long step = 0;
  double mean_step_reward = 0.0;
  double eval_return = std::numeric_limits<double>::quiet_NaN();
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  bool aborted = false;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  long steps = 0;
  int updates = 0;
  int aborted_updates = 0;
};

inline constexpr std::uint64_t kEvalSeedSalt = 0x9e3779b97f4a7c15ULL;

// Alternates rollout collection and PPO updates for cfg.total_steps env steps.
// `on_checkpoint` fires after each evaluation and once at the end.
inline TrainResult train(PpoAgent& agent, const SimConfig& sim,
                         const std::function<void(const PpoAgent&, long)>& on_checkpoint = {}) {
  TrainResult res;
  const auto& cfg = agent.config();
  if (cfg.total_steps <= 0) return res;
  RolloutCollector collector(sim, sim.seed);
  while (res.steps < cfg.total_steps) {
    const long n = std::min<long>(cfg.rollout_len, cfg.total_steps - res.steps);
    auto batch = collector.collect(agent, n);
    batch.compute_advantages(cfg.discount, cfg.gae_lambda);
    const auto diag = agent.update(batch);
    res.steps += n;
    ++res.updates;
    CurvePoint p;
    p.step = res.steps;
    for (const auto& t : batch.steps) p.mean_step_reward += t.reward;
    p.mean_step_reward /= static_cast<double>(n);
    p.entropy = diag.entropy;
    p.clip_fraction = diag.clip_fraction;
    p.value_loss = diag.value_loss;
    p.aborted = diag.aborted;
    if (diag.aborted) ++res.aborted_updates;
    const bool last = res.steps >= cfg.total_steps;
    if ((cfg.eval_every > 0 && res.updates % cfg.eval_every == 0) || last) {
      PpoScheduler greedy(agent, true);
      p.eval_return = run_reward_episode(sim, greedy, sim.seed ^ kEvalSeedSalt);
      if (on_checkpoint) on_checkpoint(agent, res.steps);
    }
    res.curve.push_back(p);
  }
  return res;
}

}  // namespace semcc::ppo
