#pragma once

// Factored action distribution: one masked categorical per RB over
// {Idle} + UAVs + group slots, sampled RB by RB. An entity picked on an
// earlier RB is masked on every later one, so any sample satisfies RB
// exclusivity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "semcc/action.hpp"
#include "semcc/errors.hpp"
#include "semcc/random.hpp"

namespace semcc::ppo {

struct ActionLayout {
  int n_uav = 0;
  int n_rb = 0;
  int group_slots = 0;

  static ActionLayout for_env(int n_uav, int n_rb) { return {n_uav, n_rb, n_uav / 2}; }

  int width() const { return 1 + n_uav + group_slots; }
  int logits_size() const { return n_rb * width(); }
  int unicast_entry(int uav) const { return 1 + uav; }
  int group_entry(int group) const { return 1 + n_uav + group; }
  friend bool operator==(const ActionLayout&, const ActionLayout&) = default;
};

inline constexpr int kIdleEntry = 0;

using Mask = std::vector<std::uint8_t>;

// Legal entries before any RB is filled: Idle, listed unicast candidates and
// existing groups.
inline Mask base_mask(const ActionLayout& layout, const EntitySet& entities) {
  Mask m(static_cast<std::size_t>(layout.width()), 0);
  m[kIdleEntry] = 1;
  for (int k : entities.unicast) m[static_cast<std::size_t>(layout.unicast_entry(k))] = 1;
  const int groups = static_cast<int>(entities.groups.size());
  if (groups > layout.group_slots) throw ContractError("more groups than policy group slots");
  for (int g = 0; g < groups; ++g) m[static_cast<std::size_t>(layout.group_entry(g))] = 1;
  return m;
}

struct RbDistribution {
  std::vector<double> prob;  // zero on masked entries
  std::vector<double> log_prob;  // -inf on masked entries
  double entropy = 0.0;
};

inline RbDistribution masked_softmax(std::span<const double> logits, const Mask& mask) {
  RbDistribution d;
  const std::size_t w = logits.size();
  d.prob.assign(w, 0.0);
  d.log_prob.assign(w, -std::numeric_limits<double>::infinity());
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < w; ++j) {
    if (!mask[j]) continue;
    any = true;
    // NaN logits propagate so the caller's finiteness checks see them.
    mx = std::isnan(logits[j]) ? logits[j] : std::max(mx, logits[j]);
    if (std::isnan(mx)) break;
  }
  if (!any) throw ContractError("resource block has no legal entry");
  double z = 0.0;
  for (std::size_t j = 0; j < w; ++j)
    if (mask[j]) z += std::exp(logits[j] - mx);
  const double log_z = mx + std::log(z);
  for (std::size_t j = 0; j < w; ++j) {
    if (!mask[j]) continue;
    d.log_prob[j] = logits[j] - log_z;
    d.prob[j] = std::exp(d.log_prob[j]);
    d.entropy -= d.prob[j] * d.log_prob[j];
  }
  return d;
}

// Entry index chosen on each RB.
using Choices = std::vector<int>;

struct SampledAction {
  Choices choices;
  double log_prob = 0.0;
  std::vector<double> step_log_probs;
};

// Samples (or, with greedy = true, takes the argmax) RB by RB.
inline SampledAction sample_action(const ActionLayout& layout, std::span<const double> logits,
                                   Mask mask, Rng* rng, bool greedy) {
  if (static_cast<int>(logits.size()) != layout.logits_size())
    throw ContractError("logit vector has the wrong length");
  SampledAction out;
  const auto w = static_cast<std::size_t>(layout.width());
  for (int n = 0; n < layout.n_rb; ++n) {
    auto d = masked_softmax(logits.subspan(static_cast<std::size_t>(n) * w, w), mask);
    std::size_t pick = 0;
    if (greedy) {
      double best = -1.0;
      for (std::size_t j = 0; j < w; ++j)
        if (mask[j] && d.prob[j] > best) {
          best = d.prob[j];
          pick = j;
        }
    } else {
      const double u = rng->uniform();
      double acc = 0.0;
      pick = w;
      std::size_t last_legal = 0;
      for (std::size_t j = 0; j < w; ++j) {
        if (!mask[j]) continue;
        last_legal = j;
        acc += d.prob[j];
        if (u < acc) {
          pick = j;
          break;
        }
      }
      if (pick == w) pick = last_legal;
    }
    out.choices.push_back(static_cast<int>(pick));
    out.step_log_probs.push_back(d.log_prob[pick]);
    out.log_prob += d.log_prob[pick];
    if (pick != kIdleEntry) mask[pick] = 0;
  }
  return out;
}

struct ActionEvaluation {
  double log_prob = 0.0;
  double entropy = 0.0;  // sum of per-RB entropies along the taken prefix
  std::vector<double> dlogp_dlogits;
  std::vector<double> dentropy_dlogits;
};

// Log-probability, entropy and their logit gradients for given choices.
inline ActionEvaluation evaluate_action(const ActionLayout& layout, std::span<const double> logits,
                                        Mask mask, const Choices& choices) {
  if (static_cast<int>(choices.size()) != layout.n_rb)
    throw ContractError("choice vector has the wrong length");
  ActionEvaluation ev;
  const auto w = static_cast<std::size_t>(layout.width());
  ev.dlogp_dlogits.assign(logits.size(), 0.0);
  ev.dentropy_dlogits.assign(logits.size(), 0.0);
  for (int n = 0; n < layout.n_rb; ++n) {
    const std::size_t base = static_cast<std::size_t>(n) * w;
    auto d = masked_softmax(logits.subspan(base, w), mask);
    const auto pick = static_cast<std::size_t>(choices[static_cast<std::size_t>(n)]);
    if (pick >= w || !mask[pick]) throw ContractError("choice is masked");
    ev.log_prob += d.log_prob[pick];
    ev.entropy += d.entropy;
    for (std::size_t j = 0; j < w; ++j) {
      if (!mask[j]) continue;
      ev.dlogp_dlogits[base + j] = (j == pick ? 1.0 : 0.0) - d.prob[j];
      ev.dentropy_dlogits[base + j] = -d.prob[j] * (d.log_prob[j] + d.entropy);
    }
    if (pick != kIdleEntry) mask[pick] = 0;
  }
  return ev;
}

inline ScheduleAction to_schedule(const ActionLayout& layout, const Choices& choices) {
  ScheduleAction a = ScheduleAction::all_idle(layout.n_rb);
  for (int n = 0; n < layout.n_rb; ++n) {
    const int c = choices[static_cast<std::size_t>(n)];
    if (c == kIdleEntry) continue;
    if (c <= layout.n_uav)
      a.rbs[static_cast<std::size_t>(n)] = Unicast{c - 1};
    else
      a.rbs[static_cast<std::size_t>(n)] = Multicast{c - 1 - layout.n_uav};
  }
  return a;
}

}  // namespace semcc::ppo
