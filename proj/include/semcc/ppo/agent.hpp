#pragma once

// Actor-critic PPO agent: separate actor and critic networks of the same
// trunk shape, masked factored policy head, clipped-surrogate update with
// value and entropy terms, Adam or plain gradient ascent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "semcc/errors.hpp"
#include "semcc/ppo/gae.hpp"
#include "semcc/ppo/network.hpp"
#include "semcc/ppo/objective.hpp"
#include "semcc/ppo/policy.hpp"
#include "semcc/random.hpp"

namespace semcc::ppo {

enum class Optimizer { Adam, Sgd };

struct PpoConfig {
  double clip_eps = 0.2;
  double learn_rate = 3e-4;
  double discount = 0.99;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatch = 256;
  int rollout_len = 2048;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  long total_steps = 100000;
  std::vector<std::size_t> hidden{128, 128};
  Optimizer optimizer = Optimizer::Adam;
  bool normalize_advantages = true;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  int eval_every = 10;         // updates between greedy evaluation episodes; 0 disables
  std::uint64_t seed = 7;

  void validate() const {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must lie in (0, 1)");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0, 1]");
    if (!(learn_rate > 0.0)) throw ConfigError("learn_rate must be positive");
    if (epochs < 1 || minibatch < 1 || rollout_len < 1)
      throw ConfigError("epochs, minibatch and rollout_len must be >= 1");
    if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
    if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
  }
};

struct Transition {
  std::vector<double> observation;
  Mask mask;  // base mask at sampling time
  Choices choices;
  double log_prob = 0.0;  // joint log-prob under the sampling parameters
  double reward = 0.0;
  double value = 0.0;
  double next_value = 0.0;
  bool episode_end = false;
};

struct RolloutBatch {
  std::vector<Transition> steps;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return steps.size(); }

  void compute_advantages(double gamma, double lambda) {
    std::vector<double> r, v, nv;
    std::vector<std::uint8_t> ends;
    for (const auto& t : steps) {
      r.push_back(t.reward);
      v.push_back(t.value);
      nv.push_back(t.next_value);
      ends.push_back(t.episode_end ? 1 : 0);
    }
    auto res = gae_advantages(r, v, nv, ends, gamma, lambda);
    advantages = std::move(res.advantages);
    returns = std::move(res.returns);
  }
};

struct LossBreakdown {
  double total = 0.0;  // value minimized: -surrogate + c_v * mse - c_e * entropy
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

struct UpdateDiagnostics {
  double mean_ratio = 0.0;
  double first_minibatch_max_ratio_dev = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
  bool aborted = false;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  // Descends on the gradient of a loss.
  void step(std::vector<double>& params, std::span<const double> grad, double lr) {
    ++t_;
    const double b1t = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double b2t = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / b1t) / (std::sqrt(v_[i] / b2t) + kEps);
    }
  }

  std::vector<double>& first_moment() { return m_; }
  std::vector<double>& second_moment() { return v_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  long steps() const { return t_; }
  void set_steps(long t) { t_ = t; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct Decision {
  SampledAction action;
  double value = 0.0;
};

class PpoAgent {
 public:
  PpoAgent(ActionLayout layout, std::size_t obs_size, PpoConfig cfg)
      : layout_(layout), obs_size_(obs_size), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    std::vector<std::size_t> actor_sizes{obs_size};
    actor_sizes.insert(actor_sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    std::vector<std::size_t> critic_sizes = actor_sizes;
    actor_sizes.push_back(static_cast<std::size_t>(layout_.logits_size()));
    critic_sizes.push_back(1);
    actor_ = Mlp(actor_sizes);
    critic_ = Mlp(critic_sizes);
    actor_.initialize(rng_, std::sqrt(2.0), 0.01);
    critic_.initialize(rng_, std::sqrt(2.0), 1.0);
    actor_opt_ = Adam(actor_.num_params());
    critic_opt_ = Adam(critic_.num_params());
  }

  const ActionLayout& layout() const { return layout_; }
  std::size_t observation_size() const { return obs_size_; }
  const PpoConfig& config() const { return cfg_; }
  PpoConfig& config() { return cfg_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Adam& actor_optimizer() { return actor_opt_; }
  Adam& critic_optimizer() { return critic_opt_; }
  const Adam& actor_optimizer() const { return actor_opt_; }
  const Adam& critic_optimizer() const { return critic_opt_; }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  std::vector<double> logits(std::span<const double> obs) const { return actor_.forward(obs); }
  double value(std::span<const double> obs) const { return critic_.forward(obs)[0]; }

  Decision act(std::span<const double> obs, const Mask& mask, bool greedy) {
    const auto z = logits(obs);
    Decision d;
    d.action = sample_action(layout_, z, mask, &rng_, greedy);
    d.value = value(obs);
    return d;
  }

  // Loss over the given sample indices and, when grads are non-null, its
  // exact gradient with respect to actor and critic parameters.
  LossBreakdown loss(const RolloutBatch& batch, std::span<const std::size_t> idx,
                     std::vector<double>* actor_grad, std::vector<double>* critic_grad) const {
    LossBreakdown lb;
    if (idx.empty()) return lb;
    const double inv = 1.0 / static_cast<double>(idx.size());
    if (actor_grad) actor_grad->assign(actor_.num_params(), 0.0);
    if (critic_grad) critic_grad->assign(critic_.num_params(), 0.0);
    Mlp::Cache ac, cc;
    std::vector<double> upstream(static_cast<std::size_t>(layout_.logits_size()));
    for (std::size_t i : idx) {
      const auto& t = batch.steps[i];
      const double adv = batch.advantages[i];
      const double ret = batch.returns[i];

      const auto z = actor_.forward(t.observation, ac);
      const auto ev = evaluate_action(layout_, z, t.mask, t.choices);
      const double ratio = std::exp(ev.log_prob - t.log_prob);
      lb.surrogate += inv * clipped_term(ratio, adv, cfg_.clip_eps);
      lb.entropy += inv * ev.entropy;
      lb.mean_ratio += inv * ratio;
      if (std::abs(ratio - 1.0) > cfg_.clip_eps) lb.clip_fraction += inv;

      const double v = critic_.forward(t.observation, cc)[0];
      lb.value_loss += inv * (v - ret) * (v - ret);

      if (actor_grad) {
        // d(-surrogate)/d logp = -slope * ratio; entropy enters with -c_e.
        const double m = modified_advantage(ratio, adv, cfg_.clip_eps);
        for (std::size_t j = 0; j < upstream.size(); ++j)
          upstream[j] = inv * (-m * ev.dlogp_dlogits[j] - cfg_.entropy_coef * ev.dentropy_dlogits[j]);
        actor_.backward(ac, upstream, *actor_grad);
      }
      if (critic_grad) {
        const double dv = inv * cfg_.value_coef * 2.0 * (v - ret);
        const double up[1] = {dv};
        critic_.backward(cc, up, *critic_grad);
      }
    }
    lb.total = -lb.surrogate + cfg_.value_coef * lb.value_loss - cfg_.entropy_coef * lb.entropy;
    return lb;
  }

  // Epochs x shuffled minibatches of ascent on the clipped surrogate.
  // Restores the pre-update parameters if anything turns non-finite.
  UpdateDiagnostics update(RolloutBatch& batch) {
    UpdateDiagnostics diag;
    if (batch.size() == 0) return diag;
    if (batch.advantages.size() != batch.size()) batch.compute_advantages(cfg_.discount, cfg_.gae_lambda);
    RolloutBatch work = batch;
    if (cfg_.normalize_advantages) normalize_advantages(work.advantages);

    const auto actor_snapshot = actor_.params();
    const auto critic_snapshot = critic_.params();
    const Adam actor_opt_snapshot = actor_opt_;
    const Adam critic_opt_snapshot = critic_opt_;

    std::vector<std::size_t> order(work.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> ga, gc;
    const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(cfg_.minibatch), work.size());
    bool first = true;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng_.engine());
      for (std::size_t start = 0; start < order.size(); start += mb) {
        const std::size_t end = std::min(order.size(), start + mb);
        std::span<const std::size_t> idx(order.data() + start, end - start);
        if (first) {
          for (std::size_t i : idx) {
            const auto z = actor_.forward(work.steps[i].observation);
            const auto ev = evaluate_action(layout_, z, work.steps[i].mask, work.steps[i].choices);
            diag.first_minibatch_max_ratio_dev =
                std::max(diag.first_minibatch_max_ratio_dev,
                         std::abs(std::exp(ev.log_prob - work.steps[i].log_prob) - 1.0));
          }
          first = false;
        }
        const auto lb = loss(work, idx, &ga, &gc);
        if (!finite(ga) || !finite(gc) || !std::isfinite(lb.total)) {
          actor_.params() = actor_snapshot;
          critic_.params() = critic_snapshot;
          actor_opt_ = actor_opt_snapshot;
          critic_opt_ = critic_opt_snapshot;
          diag.aborted = true;
          return diag;
        }
        clip_norm(ga);
        clip_norm(gc);
        apply(actor_, actor_opt_, ga);
        apply(critic_, critic_opt_, gc);
        diag.mean_ratio += lb.mean_ratio;
        diag.clip_fraction += lb.clip_fraction;
        diag.value_loss += lb.value_loss;
        diag.entropy += lb.entropy;
        ++diag.minibatches;
      }
    }
    if (!actor_.all_finite() || !critic_.all_finite()) {
      actor_.params() = actor_snapshot;
      critic_.params() = critic_snapshot;
      actor_opt_ = actor_opt_snapshot;
      critic_opt_ = critic_opt_snapshot;
      diag.aborted = true;
      return diag;
    }
    if (diag.minibatches > 0) {
      const double k = 1.0 / diag.minibatches;
      diag.mean_ratio *= k;
      diag.clip_fraction *= k;
      diag.value_loss *= k;
      diag.entropy *= k;
    }
    return diag;
  }

 private:
  static bool finite(const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void clip_norm(std::vector<double>& g) const {
    if (cfg_.max_grad_norm <= 0.0) return;
    double sq = 0.0;
    for (double x : g) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.max_grad_norm) {
      const double s = cfg_.max_grad_norm / norm;
      for (double& x : g) x *= s;
    }
  }

  void apply(Mlp& net, Adam& opt, const std::vector<double>& grad) {
    if (cfg_.optimizer == Optimizer::Adam) {
      opt.step(net.params(), grad, cfg_.learn_rate);
    } else {
      auto& p = net.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg_.learn_rate * grad[i];
    }
  }

  ActionLayout layout_;
  std::size_t obs_size_;
  PpoConfig cfg_;
  Rng rng_;
  Mlp actor_;
  Mlp critic_;
  Adam actor_opt_;
  Adam critic_opt_;
};

}  // namespace semcc::ppo
