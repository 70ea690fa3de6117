#pragma once

// Command-level semantics: per-UAV temporal difference, inter-UAV weighted
// similarity, the equivalence relation and multicast grouping, and the
// per-command change trigger.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "semcc/errors.hpp"

namespace semcc {

inline constexpr std::size_t kNumCommands = 4;

enum class Command : std::size_t { Roll = 0, Pitch = 1, Thrust = 2, Yaw = 3 };

inline constexpr std::array<const char*, kNumCommands> kCommandNames{"ROLL", "PITCH", "THRUST",
                                                                     "YAW"};
inline constexpr std::array<double, kNumCommands> kCommandMin{-35.0, -35.0, -5.0, -150.0};
inline constexpr std::array<double, kNumCommands> kCommandMax{35.0, 35.0, 5.0, 150.0};

using SemanticVector = std::array<double, kNumCommands>;

// One UAV's C&C message, always in (ROLL, PITCH, THRUST, YAW) order.
struct CommandVector {
  SemanticVector values{0.0, 0.0, 0.0, 0.0};

  double& operator[](Command c) { return values[static_cast<std::size_t>(c)]; }
  double operator[](Command c) const { return values[static_cast<std::size_t>(c)]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool in_range() const {
    for (std::size_t i = 0; i < kNumCommands; ++i)
      if (!(values[i] >= kCommandMin[i] && values[i] <= kCommandMax[i])) return false;
    return true;
  }

  friend bool operator==(const CommandVector&, const CommandVector&) = default;
};

struct SemanticConfig {
  SemanticVector ranges{70.0, 70.0, 10.0, 300.0};
  SemanticVector weights{0.35, 0.35, 0.2, 0.1};
  double equiv_tolerance = 0.05;
  SemanticVector trigger_thresholds{0.02, 0.02, 0.02, 0.02};

  void validate() const {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("importance weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("importance weights must sum to 1");
    for (double u : ranges)
      if (!(u > 0.0)) throw ConfigError("command ranges must be positive");
    if (!(equiv_tolerance >= 0.0 && equiv_tolerance <= 1.0))
      throw ConfigError("equivalence tolerance must lie in [0, 1]");
    for (double t : trigger_thresholds)
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("trigger thresholds must lie in [0, 1]");
  }
};

namespace detail {
inline void require_in_range(const CommandVector& c) {
  if (!c.in_range()) throw DomainError("command component outside its admissible range");
}
}  // namespace detail

// Normalized per-command change between two consecutive messages of one UAV.
inline SemanticVector semantic_diff(const CommandVector& current, const CommandVector& previous,
                                    const SemanticConfig& cfg) {
  detail::require_in_range(current);
  detail::require_in_range(previous);
  SemanticVector out{};
  for (std::size_t i = 0; i < kNumCommands; ++i)
    out[i] = std::abs(current[i] - previous[i]) / cfg.ranges[i];
  return out;
}

// Importance-weighted normalized L1 distance between two UAVs' commands.
inline double pairwise_similarity(const CommandVector& a, const CommandVector& b,
                                  const SemanticConfig& cfg) {
  detail::require_in_range(a);
  detail::require_in_range(b);
  double l = 0.0;
  for (std::size_t i = 0; i < kNumCommands; ++i)
    l += cfg.weights[i] * std::abs(a[i] - b[i]) / cfg.ranges[i];
  return l;
}

inline bool semantically_equivalent(double similarity, const SemanticConfig& cfg) {
  return similarity <= cfg.equiv_tolerance;
}

// Fires when any command changed by strictly more than its threshold.
inline bool trigger(const SemanticVector& diff, const SemanticConfig& cfg) {
  for (std::size_t i = 0; i < kNumCommands; ++i)
    if (diff[i] > cfg.trigger_thresholds[i]) return true;
  return false;
}

struct MulticastGroup {
  std::vector<int> members;  // ascending; members.front() is the leader
  int leader() const { return members.front(); }
  std::size_t size() const { return members.size(); }
};

struct Grouping {
  std::vector<MulticastGroup> groups;
  std::vector<int> singletons;
};

// Complete-linkage greedy clustering over the candidate UAV indices (taken in
// the order given). The first unassigned candidate leads a new cluster and
// absorbs each later candidate equivalent to every current member. Clusters
// smaller than two are released as singletons.
//
// `similarity(a, b)` supplies L between candidate UAVs a and b.
template <typename SimilarityFn>
Grouping build_multicast_groups(std::span<const int> candidates, SimilarityFn&& similarity,
                                double equiv_tolerance) {
  Grouping out;
  std::vector<bool> taken(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (taken[i]) continue;
    taken[i] = true;
    MulticastGroup g;
    g.members.push_back(candidates[i]);
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (taken[j]) continue;
      bool fits = true;
      for (int m : g.members) {
        if (!(similarity(m, candidates[j]) <= equiv_tolerance)) {
          fits = false;
          break;
        }
      }
      if (fits) {
        g.members.push_back(candidates[j]);
        taken[j] = true;
      }
    }
    if (g.members.size() >= 2)
      out.groups.push_back(std::move(g));
    else
      out.singletons.push_back(candidates[i]);
  }
  return out;
}

// Convenience overload over explicit command vectors, candidates 0..K-1.
inline Grouping build_multicast_groups(std::span<const CommandVector> commands,
                                       const SemanticConfig& cfg) {
  std::vector<int> idx(commands.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return build_multicast_groups(
      std::span<const int>(idx),
      [&](int a, int b) {
        return pairwise_similarity(commands[static_cast<std::size_t>(a)],
                                   commands[static_cast<std::size_t>(b)], cfg);
      },
      cfg.equiv_tolerance);
}

}  // namespace semcc
