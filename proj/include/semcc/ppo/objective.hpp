#pragma once

// Clipped surrogate objective and its piecewise derivative in the ratio.

#include <algorithm>
#include <span>

#include "semcc/errors.hpp"

namespace semcc::ppo {

inline double clip_ratio(double ratio, double eps) {
  return std::clamp(ratio, 1.0 - eps, 1.0 + eps);
}

inline double clipped_term(double ratio, double advantage, double eps) {
  return std::min(ratio * advantage, clip_ratio(ratio, eps) * advantage);
}

inline double clipped_objective(std::span<const double> ratios, std::span<const double> advantages,
                                double eps) {
  if (ratios.size() != advantages.size()) throw ContractError("ratio/advantage length mismatch");
  if (ratios.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0)) throw DomainError("probability ratios must be positive");
    sum += clipped_term(ratios[i], advantages[i], eps);
  }
  return sum / static_cast<double>(ratios.size());
}

// d/d(ratio) of min(ratio * A, clip(ratio) * A): A where the unclipped branch
// is the minimum, 0 where the clipped branch is.
inline double clipped_term_slope(double ratio, double advantage, double eps) {
  if (advantage >= 0.0) return ratio <= 1.0 + eps ? advantage : 0.0;
  return ratio >= 1.0 - eps ? advantage : 0.0;
}

// Scale applied to grad log pi: slope * ratio.
inline double modified_advantage(double ratio, double advantage, double eps) {
  return clipped_term_slope(ratio, advantage, eps) * ratio;
}

}  // namespace semcc::ppo
