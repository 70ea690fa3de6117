#pragma once

// Episode runner, transmission/effectiveness accounting, sweeps over the
// repeat window e or the fleet size K, and CSV emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "semcc/env.hpp"
#include "semcc/harness/config.hpp"
#include "semcc/ppo/trainer.hpp"
#include "semcc/schedulers.hpp"

namespace semcc::harness {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunMetrics {
  std::string scheduler;
  std::uint64_t seed = 0;
  long attempts = 0;  // RB-uses; one multicast counts once
  long successes = 0;
  long effective_total = 0;
  long effective_delivered = 0;
  std::vector<double> reward_trace;
  std::string config_hash;

  double effectiveness() const {
    return effective_total > 0 ? static_cast<double>(effective_delivered) / effective_total : 0.0;
  }
  double total_reward() const {
    double s = 0.0;
    for (double r : reward_trace) s += r;
    return s;
  }
};

inline const std::vector<std::string>& known_schedulers() {
  static const std::vector<std::string> ids{"bit", "random", "greedy", "ppo"};
  return ids;
}

inline constexpr std::uint64_t kRandomSchedulerSalt = 0xa5a5a5a5deadbeefULL;

// `agent` is required for "ppo" and evaluated greedily.
inline std::unique_ptr<Scheduler> make_scheduler(const std::string& id, std::uint64_t seed,
                                                 ppo::PpoAgent* agent = nullptr) {
  if (id == "bit") return std::make_unique<BitOrientedScheduler>();
  if (id == "greedy") return std::make_unique<GreedySemanticScheduler>();
  if (id == "random") return std::make_unique<RandomScheduler>(seed ^ kRandomSchedulerSalt);
  if (id == "idle") return std::make_unique<IdleScheduler>();
  if (id == "ppo") {
    if (!agent) throw UsageError("the ppo scheduler needs a trained policy");
    return std::make_unique<ppo::PpoScheduler>(*agent, true);
  }
  throw UsageError("unknown scheduler '" + id + "'");
}

inline RunMetrics run_episode(Scheduler& sched, const SimConfig& sim, std::uint64_t seed) {
  Env env(sim);
  env.reset(seed);
  sched.reset();
  RunMetrics m;
  m.scheduler = sched.name();
  m.seed = seed;
  m.reward_trace.reserve(static_cast<std::size_t>(sim.episode_ttis));
  while (!env.done()) m.reward_trace.push_back(env.step(sched.schedule(env)).reward);
  const auto& c = env.counters();
  m.attempts = c.attempts;
  m.successes = c.successes;
  m.effective_total = c.effective_total;
  m.effective_delivered = c.effective_delivered;
  return m;
}

inline RunMetrics run_episode(const std::string& scheduler_id, const SimConfig& sim,
                              std::uint64_t seed, ppo::PpoAgent* agent = nullptr) {
  auto sched = make_scheduler(scheduler_id, seed, agent);
  auto m = run_episode(*sched, sim, seed);
  m.scheduler = scheduler_id;
  return m;
}

enum class SweepAxis { RepeatE, NumUav };

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "e" || s == "repeat_e") return SweepAxis::RepeatE;
  if (s == "k" || s == "n_uav") return SweepAxis::NumUav;
  throw UsageError("axis must be e or k");
}

inline std::string axis_name(SweepAxis a) { return a == SweepAxis::RepeatE ? "e" : "k"; }

inline constexpr double kSweepGroupCoverage = 0.6;

// Per-point config. On the K axis, N = floor(K / 2) and the synthetic group
// count is re-derived so groups cover about 60% of the fleet.
inline RunConfig sweep_point_config(const RunConfig& base, SweepAxis axis, int value) {
  RunConfig c = base;
  if (axis == SweepAxis::RepeatE) {
    c.repeat_e = value;
  } else {
    c.n_uav = value;
    c.n_rb = value / 2;
    if (c.equiv_group_count > 0 && c.equiv_group_size >= 2) {
      const int want = static_cast<int>(std::ceil(kSweepGroupCoverage * value / c.equiv_group_size));
      c.equiv_group_count = std::max(0, std::min(want, value / c.equiv_group_size));
    }
  }
  return c;
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::RepeatE;
  std::vector<int> values;
  std::vector<std::string> schedulers;
  int seeds = 3;
  RunConfig base;
};

struct SweepRow {
  int axis_value = 0;
  RunMetrics metrics;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::RepeatE;
  std::vector<SweepRow> rows;  // ordered by (axis value, scheduler, seed)
  std::string config_hash;
};

inline void validate_spec(const SweepSpec& spec) {
  if (spec.values.empty() || spec.schedulers.empty()) throw UsageError("sweep needs axis values and schedulers");
  if (spec.seeds < 3) throw UsageError("sweep needs at least 3 seeds per point");
  for (const auto& s : spec.schedulers)
    if (std::find(known_schedulers().begin(), known_schedulers().end(), s) == known_schedulers().end())
      throw UsageError("unknown scheduler '" + s + "'");
}

// Runs every (value, scheduler, seed) cell. PPO is trained once per point
// with the base config's learning budget.
inline SweepResult sweep(const SweepSpec& spec) {
  validate_spec(spec);
  SweepResult res;
  res.axis = spec.axis;
  res.config_hash = config_hash(spec.base);
  for (int v : spec.values) {
    const RunConfig point = sweep_point_config(spec.base, spec.axis, v);
    const SimConfig sim = point.to_sim_config();
    sim.validate();
    const std::string hash = config_hash(point);
    std::unique_ptr<ppo::PpoAgent> agent;
    for (const auto& sid : spec.schedulers) {
      if (sid == "ppo" && !agent) {
        agent = std::make_unique<ppo::PpoAgent>(ppo::make_agent(sim, point.to_ppo_config()));
        ppo::train(*agent, sim);
      }
      for (int s = 0; s < spec.seeds; ++s) {
        const std::uint64_t seed = point.seed + static_cast<std::uint64_t>(s);
        SweepRow row;
        row.axis_value = v;
        row.metrics = run_episode(sid, sim, seed, agent.get());
        row.metrics.config_hash = hash;
        res.rows.push_back(std::move(row));
      }
    }
  }
  return res;
}

inline constexpr const char* kCsvHeader =
    "axis,scheduler,seed,attempts,successes,effective_total,effective_delivered,effectiveness";

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    for (double x : xs) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(s.sd / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace detail

// Per-seed rows followed by `mean` and `std` rows for each (value, scheduler).
inline std::string render_csv(const SweepResult& res) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : res.rows) {
    const auto& m = r.metrics;
    out += std::to_string(r.axis_value) + "," + m.scheduler + "," + std::to_string(m.seed) + "," +
           std::to_string(m.attempts) + "," + std::to_string(m.successes) + "," +
           std::to_string(m.effective_total) + "," + std::to_string(m.effective_delivered) + "," +
           detail::fmt(m.effectiveness()) + "\n";
  }
  // Group rows by (value, scheduler) keeping first-seen order.
  std::vector<std::pair<int, std::string>> keys;
  std::map<std::pair<int, std::string>, std::vector<const RunMetrics*>> groups;
  for (const auto& r : res.rows) {
    auto key = std::make_pair(r.axis_value, r.metrics.scheduler);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r.metrics);
  }
  for (const auto& key : keys) {
    std::vector<double> att, suc, tot, del, eff;
    for (const auto* m : groups[key]) {
      att.push_back(static_cast<double>(m->attempts));
      suc.push_back(static_cast<double>(m->successes));
      tot.push_back(static_cast<double>(m->effective_total));
      del.push_back(static_cast<double>(m->effective_delivered));
      eff.push_back(m->effectiveness());
    }
    const auto a = detail::summarize(att), s = detail::summarize(suc), t = detail::summarize(tot),
               d = detail::summarize(del), e = detail::summarize(eff);
    const std::string prefix = std::to_string(key.first) + "," + key.second + ",";
    out += prefix + "mean," + detail::fmt(a.mean) + "," + detail::fmt(s.mean) + "," + detail::fmt(t.mean) +
           "," + detail::fmt(d.mean) + "," + detail::fmt(e.mean) + "\n";
    out += prefix + "std," + detail::fmt(a.sd) + "," + detail::fmt(s.sd) + "," + detail::fmt(t.sd) + "," +
           detail::fmt(d.sd) + "," + detail::fmt(e.sd) + "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

// Writes transmissions_vs_<axis>.csv, effectiveness_vs_<axis>.csv and a
// sweep_meta_<axis>.txt carrying the config hash and the full base config.
inline std::vector<std::filesystem::path> report(const SweepResult& res, const RunConfig& base,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const std::string axis = axis_name(res.axis);
  const std::string csv = render_csv(res);
  std::vector<std::filesystem::path> written{out_dir / ("transmissions_vs_" + axis + ".csv"),
                                             out_dir / ("effectiveness_vs_" + axis + ".csv"),
                                             out_dir / ("sweep_meta_" + axis + ".txt")};
  write_text(written[0], csv);
  write_text(written[1], csv);
  write_text(written[2], "config_hash = " + res.config_hash + "\n" + serialize_config(base));
  return written;
}

}  // namespace semcc::harness
