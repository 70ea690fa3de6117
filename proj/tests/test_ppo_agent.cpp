#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "semcc/ppo/checkpoint.hpp"
#include "semcc/ppo/trainer.hpp"

using namespace semcc;
using namespace semcc::ppo;

namespace {

SimConfig sim_config(int k, int n, int e, int t) {
  SimConfig c;
  c.n_uav = k;
  c.n_rb = n;
  c.repeat_e = e;
  c.episode_ttis = t;
  c.equiv_group_count = k >= 6 ? 2 : 0;
  c.equiv_group_size = 3;
  c.sync();
  return c;
}

PpoConfig small_ppo() {
  PpoConfig p;
  p.hidden = {16, 16};
  p.rollout_len = 64;
  p.minibatch = 16;
  p.epochs = 2;
  p.total_steps = 256;
  p.eval_every = 2;
  return p;
}

// Random 5-sample batch whose stored log-probs are offset so ratios spread
// across both sides of the clip range.
RolloutBatch frozen_batch(PpoAgent& agent, Rng& rng, std::size_t n = 5) {
  RolloutBatch b;
  const auto& l = agent.layout();
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.observation.resize(agent.observation_size());
    for (auto& x : t.observation) x = rng.uniform(0.0, 2.0);
    t.mask.assign(static_cast<std::size_t>(l.width()), 0);
    t.mask[0] = 1;
    for (std::size_t j = 1; j < t.mask.size(); ++j) t.mask[j] = rng.uniform() < 0.7;
    const auto z = agent.logits(t.observation);
    const auto a = sample_action(l, z, t.mask, &rng, false);
    t.choices = a.choices;
    t.log_prob = a.log_prob + rng.uniform(-0.5, 0.5);
    b.steps.push_back(t);
    b.advantages.push_back(rng.normal(0.0, 1.0));
    b.returns.push_back(rng.normal(0.0, 1.0));
  }
  return b;
}

void perturb(Mlp& net, Rng& rng, double sd) {
  for (auto& p : net.params()) p += rng.normal(0.0, sd);
}

}  // namespace

TEST(PpoConfig, Validation) {
  PpoConfig p;
  EXPECT_NO_THROW(p.validate());
  p.clip_eps = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PpoConfig{};
  p.gae_lambda = 1.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PpoConfig{};
  p.discount = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(PpoAgent, ShapesFollowLayout) {
  const auto sim = sim_config(10, 5, 5, 50);
  auto agent = make_agent(sim, PpoConfig{});
  EXPECT_EQ(agent.actor().output_size(), static_cast<std::size_t>(5 * (1 + 10 + 5)));
  EXPECT_EQ(agent.actor().input_size(), static_cast<std::size_t>(sim.observation_size()));
  EXPECT_EQ(agent.critic().output_size(), 1u);
  EXPECT_EQ(agent.actor().sizes(), (std::vector<std::size_t>{105, 128, 128, 80}));
}

TEST(PpoAgent, InitialPolicyNearUniform) {
  const auto sim = sim_config(6, 3, 5, 50);
  auto agent = make_agent(sim, PpoConfig{});
  Env env(sim);
  const auto obs = env.reset(1);
  for (double z : agent.logits(obs)) EXPECT_LT(std::abs(z), 0.5);
}

TEST(PpoLoss, FullGradientMatchesCentralDifferences) {
  const auto sim = sim_config(6, 3, 5, 50);
  auto cfg = small_ppo();
  auto agent = make_agent(sim, cfg);
  Rng rng(21);
  perturb(agent.actor(), rng, 0.2);
  perturb(agent.critic(), rng, 0.2);
  const auto batch = frozen_batch(agent, rng);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4};
  std::vector<double> ga, gc;
  const auto lb = agent.loss(batch, idx, &ga, &gc);
  ASSERT_GT(lb.clip_fraction, 0.0);  // some samples sit in the clipped branch
  ASSERT_LT(lb.clip_fraction, 1.0);

  const double h = 1e-5;
  int checked = 0;
  for (int c = 0; c < 200; ++c) {
    const bool actor = c % 2 == 0;
    Mlp& net = actor ? agent.actor() : agent.critic();
    const auto& g = actor ? ga : gc;
    const std::size_t i = rng.index(net.num_params());
    const double orig = net.params()[i];
    net.params()[i] = orig + h;
    const double fp = agent.loss(batch, idx, nullptr, nullptr).total;
    net.params()[i] = orig - h;
    const double fm = agent.loss(batch, idx, nullptr, nullptr).total;
    net.params()[i] = orig;
    const double fd = (fp - fm) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(g[i]));
    if (scale < 1e-8) {
      ASSERT_LT(std::abs(fd - g[i]), 1e-9);
      continue;
    }
    ASSERT_LT(std::abs(fd - g[i]) / scale, 1e-3) << (actor ? "actor " : "critic ") << i << " fd=" << fd
                                                 << " analytic=" << g[i];
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(PpoLoss, ClippedBranchContributesNoPolicyGradient) {
  const auto sim = sim_config(4, 2, 5, 20);
  auto cfg = small_ppo();
  cfg.entropy_coef = 0.0;
  auto agent = make_agent(sim, cfg);
  Rng rng(22);
  perturb(agent.actor(), rng, 0.2);
  auto batch = frozen_batch(agent, rng, 1);
  const std::vector<std::size_t> idx{0};
  const double logp = evaluate_action(agent.layout(), agent.logits(batch.steps[0].observation),
                                      batch.steps[0].mask, batch.steps[0].choices)
                          .log_prob;
  std::vector<double> ga, gc;
  auto zero_norm = [&] {
    double s = 0.0;
    for (double g : ga) s += g * g;
    return std::sqrt(s);
  };

  // rho = 1.5, A > 0: clipped.
  batch.steps[0].log_prob = logp - std::log(1.5);
  batch.advantages[0] = 1.0;
  agent.loss(batch, idx, &ga, &gc);
  EXPECT_EQ(zero_norm(), 0.0);
  // rho = 0.5, A < 0: clipped.
  batch.steps[0].log_prob = logp - std::log(0.5);
  batch.advantages[0] = -1.0;
  agent.loss(batch, idx, &ga, &gc);
  EXPECT_EQ(zero_norm(), 0.0);
  // rho = 1.5, A < 0: unclipped, gradient flows.
  batch.steps[0].log_prob = logp - std::log(1.5);
  agent.loss(batch, idx, &ga, &gc);
  EXPECT_GT(zero_norm(), 0.0);
  // Finite differences agree on both sides.
  for (double r : {1.5, 0.5}) {
    for (double a : {1.0, -1.0}) {
      batch.steps[0].log_prob = logp - std::log(r);
      batch.advantages[0] = a;
      agent.loss(batch, idx, &ga, &gc);
      for (int c = 0; c < 20; ++c) {
        const std::size_t i = rng.index(agent.actor().num_params());
        const double orig = agent.actor().params()[i];
        agent.actor().params()[i] = orig + 1e-6;
        const double fp = agent.loss(batch, idx, nullptr, nullptr).total;
        agent.actor().params()[i] = orig - 1e-6;
        const double fm = agent.loss(batch, idx, nullptr, nullptr).total;
        agent.actor().params()[i] = orig;
        ASSERT_NEAR((fp - fm) / 2e-6, ga[i], 1e-7) << r << " " << a;
      }
    }
  }
}

TEST(PpoUpdate, SingleSampleSgdStepMatchesHandDerivation) {
  // K = 2, N = 1, one group slot: 4 logits; one hidden tanh unit; scalar obs.
  PpoConfig cfg;
  cfg.hidden = {1};
  cfg.optimizer = Optimizer::Sgd;
  cfg.learn_rate = 0.1;
  cfg.epochs = 1;
  cfg.minibatch = 1;
  cfg.normalize_advantages = false;
  cfg.max_grad_norm = 0.0;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.5;
  PpoAgent agent(ActionLayout{2, 1, 1}, 1, cfg);
  auto& a = agent.actor().params();
  auto& c = agent.critic().params();
  // actor: w1, b1, W2[4], b2[4]; critic: u1, c1, u2, c2
  const double w1 = 0.7, b1 = -0.2;
  const double W2[4] = {0.3, -0.5, 0.9, 0.1}, b2[4] = {0.0, 0.2, -0.1, 0.05};
  a[agent.actor().weight_index(0, 0, 0)] = w1;
  a[agent.actor().bias_index(0, 0)] = b1;
  for (std::size_t j = 0; j < 4; ++j) {
    a[agent.actor().weight_index(1, j, 0)] = W2[j];
    a[agent.actor().bias_index(1, j)] = b2[j];
  }
  const double u1 = -0.4, c1 = 0.3, u2 = 1.1, c2 = -0.2;
  c[agent.critic().weight_index(0, 0, 0)] = u1;
  c[agent.critic().bias_index(0, 0)] = c1;
  c[agent.critic().weight_index(1, 0, 0)] = u2;
  c[agent.critic().bias_index(1, 0)] = c2;

  const double x = 0.8, A = 1.7, R = 0.6;
  const int choice = 2;  // unicast to UAV 1
  RolloutBatch batch;
  Transition t;
  t.observation = {x};
  t.mask = {1, 1, 1, 1};
  t.choices = {choice};
  t.log_prob = evaluate_action(agent.layout(), agent.logits(t.observation), t.mask, t.choices).log_prob;
  batch.steps.push_back(t);
  batch.advantages = {A};
  batch.returns = {R};

  // Hand derivation. Actor loss -A * log p_c at ratio 1.
  const double h = std::tanh(w1 * x + b1);
  double z[4], p[4], zmax = -1e300, sum = 0.0;
  for (int j = 0; j < 4; ++j) zmax = std::max(zmax, z[j] = W2[j] * h + b2[j]);
  for (int j = 0; j < 4; ++j) sum += std::exp(z[j] - zmax);
  for (int j = 0; j < 4; ++j) p[j] = std::exp(z[j] - zmax) / sum;
  double dz[4], dh = 0.0;
  for (int j = 0; j < 4; ++j) {
    dz[j] = -A * ((j == choice ? 1.0 : 0.0) - p[j]);
    dh += dz[j] * W2[j];
  }
  const double dpre = dh * (1 - h * h);
  // Critic loss 0.5 * (v - R)^2.
  const double hc = std::tanh(u1 * x + c1);
  const double v = u2 * hc + c2;
  const double dv = 0.5 * 2.0 * (v - R);
  const double dprec = dv * u2 * (1 - hc * hc);
  const double lr = 0.1;

  const auto diag = agent.update(batch);
  ASSERT_FALSE(diag.aborted);
  EXPECT_NEAR(diag.mean_ratio, 1.0, 1e-12);
  EXPECT_NEAR(a[agent.actor().weight_index(0, 0, 0)], w1 - lr * dpre * x, 1e-12);
  EXPECT_NEAR(a[agent.actor().bias_index(0, 0)], b1 - lr * dpre, 1e-12);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(a[agent.actor().weight_index(1, j, 0)], W2[j] - lr * dz[j] * h, 1e-12);
    EXPECT_NEAR(a[agent.actor().bias_index(1, j)], b2[j] - lr * dz[j], 1e-12);
  }
  EXPECT_NEAR(c[agent.critic().weight_index(0, 0, 0)], u1 - lr * dprec * x, 1e-12);
  EXPECT_NEAR(c[agent.critic().bias_index(0, 0)], c1 - lr * dprec, 1e-12);
  EXPECT_NEAR(c[agent.critic().weight_index(1, 0, 0)], u2 - lr * dv * hc, 1e-12);
  EXPECT_NEAR(c[agent.critic().bias_index(1, 0)], c2 - lr * dv, 1e-12);
  // The ascent direction raised the chosen action's probability (A > 0).
  const double new_logp =
      evaluate_action(agent.layout(), agent.logits(t.observation), t.mask, t.choices).log_prob;
  EXPECT_GT(new_logp, t.log_prob);
}

TEST(PpoUpdate, FirstMinibatchRatiosAreOne) {
  const auto sim = sim_config(6, 3, 5, 40);
  auto agent = make_agent(sim, small_ppo());
  RolloutCollector col(sim, 3);
  for (int round = 0; round < 3; ++round) {
    auto batch = col.collect(agent, 64);
    batch.compute_advantages(0.99, 0.95);
    const auto diag = agent.update(batch);
    ASSERT_FALSE(diag.aborted);
    EXPECT_LT(diag.first_minibatch_max_ratio_dev, 1e-6);
    EXPECT_EQ(diag.minibatches, 2 * 4);
  }
}

TEST(PpoUpdate, NonFiniteInputAbortsAndRestores) {
  const auto sim = sim_config(4, 2, 5, 20);
  auto agent = make_agent(sim, small_ppo());
  RolloutCollector col(sim, 4);
  auto batch = col.collect(agent, 32);
  batch.compute_advantages(0.99, 0.95);
  batch.steps[5].observation[0] = std::numeric_limits<double>::quiet_NaN();
  const auto before_a = agent.actor().params();
  const auto before_c = agent.critic().params();
  const auto diag = agent.update(batch);
  EXPECT_TRUE(diag.aborted);
  EXPECT_EQ(agent.actor().params(), before_a);
  EXPECT_EQ(agent.critic().params(), before_c);
  EXPECT_TRUE(agent.actor().all_finite());
}

TEST(RolloutCollector, StoredMasksAndValuesConsistent) {
  const auto sim = sim_config(6, 3, 2, 10);
  auto agent = make_agent(sim, small_ppo());
  RolloutCollector col(sim, 5);
  const auto batch = col.collect(agent, 45);
  int ends = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch.steps[i];
    const auto ev = evaluate_action(agent.layout(), agent.logits(t.observation), t.mask, t.choices);
    ASSERT_NEAR(ev.log_prob, t.log_prob, 1e-12);
    ASSERT_NEAR(t.value, agent.value(t.observation), 1e-12);
    if (t.episode_end) ++ends;
    if (!t.episode_end && i + 1 < batch.size()) ASSERT_EQ(t.next_value, batch.steps[i + 1].value);
  }
  EXPECT_EQ(ends, 4);
}

TEST(Train, ZeroStepsLeavesParametersUnchanged) {
  const auto sim = sim_config(4, 2, 5, 20);
  auto cfg = small_ppo();
  cfg.total_steps = 0;
  auto agent = make_agent(sim, cfg);
  const auto before = agent.actor().params();
  const auto res = train(agent, sim);
  EXPECT_TRUE(res.curve.empty());
  EXPECT_EQ(agent.actor().params(), before);
}

TEST(Train, FixedSeedGivesIdenticalCurve) {
  const auto sim = sim_config(6, 3, 5, 40);
  auto a = make_agent(sim, small_ppo());
  auto b = make_agent(sim, small_ppo());
  const auto ra = train(a, sim);
  const auto rb = train(b, sim);
  ASSERT_EQ(ra.curve.size(), 4u);
  ASSERT_EQ(ra.curve.size(), rb.curve.size());
  for (std::size_t i = 0; i < ra.curve.size(); ++i) {
    EXPECT_EQ(ra.curve[i].step, rb.curve[i].step);
    EXPECT_EQ(ra.curve[i].mean_step_reward, rb.curve[i].mean_step_reward);
    EXPECT_EQ(ra.curve[i].entropy, rb.curve[i].entropy);
    if (std::isnan(ra.curve[i].eval_return))
      EXPECT_TRUE(std::isnan(rb.curve[i].eval_return));
    else
      EXPECT_EQ(ra.curve[i].eval_return, rb.curve[i].eval_return);
  }
  EXPECT_EQ(a.actor().params(), b.actor().params());
  EXPECT_FALSE(std::isnan(ra.curve.back().eval_return));
}

TEST(Train, CheckpointCallbackFiresOnEvaluation) {
  const auto sim = sim_config(4, 2, 5, 20);
  auto agent = make_agent(sim, small_ppo());
  std::vector<long> at;
  train(agent, sim, [&](const PpoAgent&, long step) { at.push_back(step); });
  EXPECT_EQ(at, (std::vector<long>{128, 256}));
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto sim = sim_config(6, 3, 5, 40);
  auto agent = make_agent(sim, small_ppo());
  train(agent, sim);
  std::stringstream ss;
  save_checkpoint(agent, "abc123", ss);

  auto cfg = small_ppo();
  cfg.seed = 999;
  auto fresh = make_agent(sim, cfg);
  const auto info = load_checkpoint(fresh, ss);
  EXPECT_EQ(info.config_hash, "abc123");
  EXPECT_EQ(fresh.actor().params(), agent.actor().params());
  EXPECT_EQ(fresh.critic().params(), agent.critic().params());
  EXPECT_EQ(fresh.actor_optimizer().first_moment(), agent.actor_optimizer().first_moment());
  EXPECT_EQ(fresh.critic_optimizer().second_moment(), agent.critic_optimizer().second_moment());
  EXPECT_EQ(fresh.actor_optimizer().steps(), agent.actor_optimizer().steps());
  EXPECT_EQ(fresh.rng().state(), agent.rng().state());
  EXPECT_EQ(fresh.rng().uniform(), agent.rng().uniform());
}

TEST(Checkpoint, ShapeMismatchRejectedBeforeLoading) {
  const auto sim = sim_config(6, 3, 5, 40);
  auto agent = make_agent(sim, small_ppo());
  std::stringstream ss;
  save_checkpoint(agent, "", ss);
  const std::string text = ss.str();

  auto other_k = make_agent(sim_config(8, 3, 5, 40), small_ppo());
  const auto before = other_k.actor().params();
  std::stringstream s1(text);
  EXPECT_THROW(load_checkpoint(other_k, s1), ContractError);
  EXPECT_EQ(other_k.actor().params(), before);

  auto other_n = make_agent(sim_config(6, 2, 5, 40), small_ppo());
  std::stringstream s2(text);
  EXPECT_THROW(load_checkpoint(other_n, s2), ContractError);

  auto cfg = small_ppo();
  cfg.hidden = {16, 8};
  auto other_h = make_agent(sim, cfg);
  std::stringstream s3(text);
  EXPECT_THROW(load_checkpoint(other_h, s3), ContractError);

  std::stringstream bad("not-a-checkpoint 1\n");
  EXPECT_THROW(load_checkpoint(agent, bad), ConfigError);
}

TEST(Train, ToyPolicyMatchesRandomAndBeatsUntrained) {
  // 2 UAVs, 1 RB, e = 4.
  auto sim = sim_config(2, 1, 4, 200);
  sim.equiv_group_count = 0;
  PpoConfig cfg;
  cfg.hidden = {64, 64};
  cfg.rollout_len = 512;
  cfg.minibatch = 128;
  cfg.learn_rate = 1e-3;
  cfg.total_steps = 40000;
  cfg.eval_every = 0;
  auto untrained = make_agent(sim, cfg);
  auto trained = make_agent(sim, cfg);
  train(trained, sim);

  const int seeds = 20;
  std::vector<double> rt, rr, ru;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(s);
    PpoScheduler pt(trained, true), pu(untrained, false);
    RandomScheduler rs(seed);
    rt.push_back(run_reward_episode(sim, pt, seed));
    rr.push_back(run_reward_episode(sim, rs, seed));
    ru.push_back(run_reward_episode(sim, pu, seed));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  // Paired differences on common seeds.
  std::vector<double> diff_r, diff_u;
  for (int s = 0; s < seeds; ++s) {
    diff_r.push_back(rt[static_cast<std::size_t>(s)] - rr[static_cast<std::size_t>(s)]);
    diff_u.push_back(rt[static_cast<std::size_t>(s)] - ru[static_cast<std::size_t>(s)]);
  }
  auto half_ci = [&](const std::vector<double>& d) {
    const double m = mean(d);
    double var = 0.0;
    for (double x : d) var += (x - m) * (x - m);
    var /= static_cast<double>(d.size() - 1);
    return 2.093 * std::sqrt(var / static_cast<double>(d.size()));  // t(0.975, 19)
  };
  std::printf("toy: trained %.2f random %.2f untrained %.2f\n", mean(rt), mean(rr), mean(ru));
  // Random already serves a pending UAV every TTI, so it is the ceiling here;
  // the trained policy must be statistically indistinguishable from it or better.
  EXPECT_GE(mean(diff_r) + half_ci(diff_r), 0.0);
  EXPECT_GT(mean(diff_u) - half_ci(diff_u), 0.0);
}
