#pragma once

// Generalized advantage estimation.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "semcc/errors.hpp"

namespace semcc::ppo {

struct AdvantageResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// values[t] = V(s_t); next_values[t] = V(s_{t+1}) (the bootstrap of the state
// reached after step t, including across time-limit cuts). A true
// `episode_end[t]` stops the recursion from leaking into the next episode.
inline AdvantageResult gae_advantages(std::span<const double> rewards,
                                      std::span<const double> values,
                                      std::span<const double> next_values,
                                      std::span<const std::uint8_t> episode_end, double gamma,
                                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || episode_end.size() != n)
    throw ContractError("rollout arrays differ in length");
  AdvantageResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (episode_end[i]) carry = 0.0;
    const double delta = rewards[i] + gamma * next_values[i] - values[i];
    carry = delta + gamma * lambda * carry;
    out.advantages[i] = carry;
    out.returns[i] = carry + values[i];
  }
  return out;
}

// Single trajectory form: values has one extra trailing bootstrap entry.
inline AdvantageResult gae_advantages(std::span<const double> rewards,
                                      std::span<const double> values_with_bootstrap, double gamma,
                                      double lambda) {
  const std::size_t n = rewards.size();
  if (n == 0) throw ContractError("empty trajectory");
  if (values_with_bootstrap.size() != n + 1)
    throw ContractError("values need one bootstrap entry past the last reward");
  const std::vector<std::uint8_t> no_cuts(n, 0);
  return gae_advantages(rewards, values_with_bootstrap.first(n), values_with_bootstrap.subspan(1),
                        no_cuts, gamma, lambda);
}

// Zero mean, unit variance; a constant vector maps to all zeros.
inline void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double sd = std::sqrt(var) + 1e-8;
  for (double& a : adv) a = (a - mean) / sd;
}

}  // namespace semcc::ppo
