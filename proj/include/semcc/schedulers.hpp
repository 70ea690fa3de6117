#pragma once

// Non-learning baselines behind a common scheduler interface.

#include <algorithm>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "semcc/action.hpp"
#include "semcc/env.hpp"
#include "semcc/random.hpp"

namespace semcc {

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual ScheduleAction schedule(const Env& env) = 0;
};

// Round-robin over all K UAVs, unicast only, blind to semantics: every
// message goes out every TTI it can get an RB.
inline ScheduleAction bit_oriented_schedule(int n_uav, int n_rb, int& rr_cursor) {
  ScheduleAction a = ScheduleAction::all_idle(n_rb);
  const int used = std::min(n_rb, n_uav);
  for (int n = 0; n < used; ++n) a.rbs[static_cast<std::size_t>(n)] = Unicast{(rr_cursor + n) % n_uav};
  rr_cursor = (rr_cursor + n_rb) % n_uav;
  return a;
}

// Largest entity first: groups by member count (ties to the lower leader),
// then unicast candidates by ascending index.
inline ScheduleAction greedy_semantic_schedule(const EntitySet& entities) {
  ScheduleAction a = ScheduleAction::all_idle(entities.capacity);
  std::vector<std::size_t> order(entities.groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& gx = entities.groups[x];
    const auto& gy = entities.groups[y];
    if (gx.size() != gy.size()) return gx.size() > gy.size();
    return gx.leader() < gy.leader();
  });
  std::vector<int> singles = entities.unicast;
  std::sort(singles.begin(), singles.end());

  std::size_t n = 0;
  const auto cap = static_cast<std::size_t>(entities.capacity);
  for (std::size_t g : order) {
    if (n >= cap) break;
    a.rbs[n++] = Multicast{static_cast<int>(g)};
  }
  for (int k : singles) {
    if (n >= cap) break;
    a.rbs[n++] = Unicast{k};
  }
  return a;
}

// Uniform draw of min(N, |entities|) distinct entities, placed on RB 0, 1, ...
inline ScheduleAction random_schedule(const EntitySet& entities, Rng& rng) {
  ScheduleAction a = ScheduleAction::all_idle(entities.capacity);
  std::vector<RbAssignment> pool;
  pool.reserve(entities.size());
  for (std::size_t g = 0; g < entities.groups.size(); ++g)
    pool.emplace_back(Multicast{static_cast<int>(g)});
  for (int k : entities.unicast) pool.emplace_back(Unicast{k});
  const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(entities.capacity));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    a.rbs[i] = pool[i];
  }
  return a;
}

class BitOrientedScheduler final : public Scheduler {
 public:
  std::string name() const override { return "bit"; }
  void reset() override { cursor_ = 0; }
  ScheduleAction schedule(const Env& env) override {
    return bit_oriented_schedule(env.n_uav(), env.n_rb(), cursor_);
  }
  int cursor() const { return cursor_; }

 private:
  int cursor_ = 0;
};

class GreedySemanticScheduler final : public Scheduler {
 public:
  std::string name() const override { return "greedy"; }
  ScheduleAction schedule(const Env& env) override {
    return greedy_semantic_schedule(env.entities());
  }
};

class RandomScheduler final : public Scheduler {
 public:
  explicit RandomScheduler(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "random"; }
  void reset() override { rng_ = Rng(seed_); }
  ScheduleAction schedule(const Env& env) override { return random_schedule(env.entities(), rng_); }

 private:
  std::uint64_t seed_;
  Rng rng_;
};

// Never transmits.
class IdleScheduler final : public Scheduler {
 public:
  std::string name() const override { return "idle"; }
  ScheduleAction schedule(const Env& env) override { return ScheduleAction::all_idle(env.n_rb()); }
};

}  // namespace semcc
