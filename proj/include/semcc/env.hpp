#pragma once

// Discrete-time downlink C&C environment. One base station at the origin
// serves K UAVs over N orthogonal RBs; every e TTIs each UAV's command is
// refreshed, and a scheduler decides per TTI which UAVs or multicast groups
// get an RB.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "semcc/action.hpp"
#include "semcc/channel.hpp"
#include "semcc/errors.hpp"
#include "semcc/random.hpp"
#include "semcc/semantics.hpp"

namespace semcc {

struct SimConfig {
  int n_uav = 10;
  int n_rb = 5;
  double radius_m = 500.0;
  double max_alt_m = 300.0;
  double min_alt_m = 10.0;
  int repeat_e = 5;
  int episode_ttis = 200;
  int equiv_group_count = 2;
  int equiv_group_size = 3;
  // Scales the member offsets; 0 yields exact copies of the leader.
  double equiv_perturb = 1.0;
  double mobility_sigma_m = 1.0;
  bool mobile = true;
  std::uint64_t seed = 1;
  double discount = 0.99;
  ChannelParams channel{};
  SemanticConfig semantics{};

  // Keeps channel.n_rb in step with n_rb.
  SimConfig& sync() {
    channel.n_rb = n_rb;
    return *this;
  }

  void validate() const {
    if (n_uav < 2) throw ConfigError("n_uav must be >= 2");
    if (n_rb < 1) throw ConfigError("n_rb must be >= 1");
    if (repeat_e < 1) throw ConfigError("repeat_e must be >= 1");
    if (episode_ttis < repeat_e) throw ConfigError("episode_ttis must be >= repeat_e");
    if (!(radius_m > 0.0)) throw ConfigError("radius_m must be positive");
    if (!(min_alt_m > 0.0 && min_alt_m <= max_alt_m))
      throw ConfigError("altitudes must satisfy 0 < min_alt_m <= max_alt_m");
    if (equiv_group_count < 0) throw ConfigError("equiv_group_count must be >= 0");
    if (equiv_group_count > 0 && equiv_group_size < 2)
      throw ConfigError("synthetic equivalent groups need at least two UAVs");
    if (equiv_group_count * equiv_group_size > n_uav)
      throw ConfigError("synthetic equivalent groups exceed the number of UAVs");
    if (!(equiv_perturb >= 0.0 && equiv_perturb <= 1.0))
      throw ConfigError("equiv_perturb must lie in [0, 1]");
    if (!(mobility_sigma_m >= 0.0)) throw ConfigError("mobility_sigma_m must be >= 0");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
    if (channel.n_rb != n_rb) throw ConfigError("channel.n_rb disagrees with n_rb");
    channel.validate();
    semantics.validate();
  }

  int observation_size() const { return 4 * n_uav + n_uav * (n_uav - 1) / 2 + 2 * n_uav; }
};

inline constexpr double kFailedLatencySentinel = 2.0;

using Observation = std::vector<double>;

struct WindowCommands {
  std::vector<CommandVector> commands;
  std::vector<std::vector<int>> synthetic_groups;  // ascending members, leader first
};

inline CommandVector random_command(Rng& rng) {
  CommandVector c;
  for (std::size_t i = 0; i < kNumCommands; ++i) c[i] = rng.uniform(kCommandMin[i], kCommandMax[i]);
  return c;
}

// Fresh window commands. Designated synthetic groups copy their leader with a
// per-command offset of at most perturb * tolerance / 4 (normalized), so every
// in-group pair stays within tolerance / 2.
inline WindowCommands generate_commands(const SimConfig& cfg, Rng& rng) {
  const int k_total = cfg.n_uav;
  if (cfg.equiv_group_count * cfg.equiv_group_size > k_total)
    throw ConfigError("synthetic equivalent groups exceed the number of UAVs");
  WindowCommands out;
  out.commands.reserve(static_cast<std::size_t>(k_total));
  for (int k = 0; k < k_total; ++k) out.commands.push_back(random_command(rng));

  if (cfg.equiv_group_count == 0) return out;
  std::vector<int> order(static_cast<std::size_t>(k_total));
  for (int k = 0; k < k_total; ++k) order[static_cast<std::size_t>(k)] = k;
  std::shuffle(order.begin(), order.end(), rng.engine());

  const double half_width = cfg.equiv_perturb * cfg.semantics.equiv_tolerance / 4.0;
  for (int g = 0; g < cfg.equiv_group_count; ++g) {
    auto first = order.begin() + g * cfg.equiv_group_size;
    std::vector<int> members(first, first + cfg.equiv_group_size);
    std::sort(members.begin(), members.end());
    const CommandVector leader = out.commands[static_cast<std::size_t>(members.front())];
    for (std::size_t m = 1; m < members.size(); ++m) {
      CommandVector c = leader;
      for (std::size_t i = 0; i < kNumCommands; ++i) {
        const double offset =
            half_width > 0.0 ? rng.uniform(-half_width, half_width) * cfg.semantics.ranges[i] : 0.0;
        c[i] = std::clamp(leader[i] + offset, kCommandMin[i], kCommandMax[i]);
      }
      out.commands[static_cast<std::size_t>(members[m])] = c;
    }
    out.synthetic_groups.push_back(std::move(members));
  }
  return out;
}

inline UavGeometry sample_position(const SimConfig& cfg, Rng& rng) {
  const double r = cfg.radius_m * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  double z = cfg.max_alt_m - rng.uniform() * (cfg.max_alt_m - cfg.min_alt_m);
  return UavGeometry::at(r * std::cos(phi), r * std::sin(phi), z);
}

// Gaussian random-walk step projected back onto the admissible cylinder.
inline UavGeometry random_walk_step(const UavGeometry& g, const SimConfig& cfg, Rng& rng) {
  if (!cfg.mobile || cfg.mobility_sigma_m == 0.0) return g;
  double x = g.position_m[0] + rng.normal(0.0, cfg.mobility_sigma_m);
  double y = g.position_m[1] + rng.normal(0.0, cfg.mobility_sigma_m);
  double z = g.position_m[2] + rng.normal(0.0, cfg.mobility_sigma_m);
  const double rho = std::hypot(x, y);
  if (rho > cfg.radius_m) {
    x *= cfg.radius_m / rho;
    y *= cfg.radius_m / rho;
    // Rounding can leave the scaled point a hair outside.
    while (x * x + y * y > cfg.radius_m * cfg.radius_m) {
      x = std::nextafter(x, 0.0);
      y = std::nextafter(y, 0.0);
    }
  }
  z = std::clamp(z, cfg.min_alt_m, cfg.max_alt_m);
  return UavGeometry::at(x, y, z);
}

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  std::vector<int> qos;
  int attempts = 0;
  int successes = 0;
  int newly_delivered = 0;
  bool window_refreshed = false;
  bool done = false;
};

struct EpisodeCounters {
  long attempts = 0;
  long successes = 0;
  long effective_total = 0;
  long effective_delivered = 0;
  double total_reward = 0.0;
};

class Env {
 public:
  explicit Env(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    const auto k = static_cast<std::size_t>(cfg_.n_uav);
    geoms_.resize(k);
    current_.resize(k);
    held_.resize(k);
    triggered_.assign(k, false);
    delivered_.assign(k, false);
    pending_.assign(k, false);
    latency_norm_.assign(k, 0.0);
    diffs_.resize(k);
    similarity_.assign(k * k, 0.0);
    reset();
  }

  const SimConfig& config() const { return cfg_; }
  int n_uav() const { return cfg_.n_uav; }
  int n_rb() const { return cfg_.n_rb; }
  int tti() const { return tti_; }
  int window_index() const { return window_; }
  bool done() const { return tti_ >= cfg_.episode_ttis; }

  Observation reset() { return reset(cfg_.seed); }

  // Draws positions and the commands the UAVs already hold, then opens the
  // first window with fresh commands measured against those.
  Observation reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    for (auto& g : geoms_) g = sample_position(cfg_, rng_);
    for (auto& c : held_) c = random_command(rng_);
    current_ = held_;
    std::fill(latency_norm_.begin(), latency_norm_.end(), 0.0);
    counters_ = {};
    tti_ = 0;
    window_ = 0;
    open_window();
    refresh_semantic_state();
    return encode_observation();
  }

  StepOutcome step(const ScheduleAction& action) {
    if (done()) throw ContractError("step called after the episode ended");
    require_valid_action(action, cfg_.n_uav, cfg_.n_rb, grouping_.groups);

    last_channel_ = forced_snr_ ? forced_channel(*forced_snr_)
                                : realize_channel(std::span<const UavGeometry>(geoms_),
                                                  cfg_.channel, rng_);
    StepOutcome out;
    const auto k_total = static_cast<std::size_t>(cfg_.n_uav);
    out.qos.assign(k_total, 0);
    std::vector<double> next_latency(k_total, 0.0);

    auto deliver = [&](std::span<const int> recipients, const CommandVector& payload,
                       double latency) {
      const bool ok = transmission_succeeds(latency, cfg_.channel);
      ++out.attempts;
      if (ok) ++out.successes;
      for (int k : recipients) {
        const auto u = static_cast<std::size_t>(k);
        next_latency[u] = ok ? latency / cfg_.channel.tti_s : kFailedLatencySentinel;
        if (!ok) continue;
        held_[u] = payload;
        if (!delivered_[u]) {
          delivered_[u] = true;
          ++out.newly_delivered;
          if (triggered_[u]) out.qos[u] = 1;
        }
      }
    };

    for (int n = 0; n < cfg_.n_rb; ++n) {
      const auto& a = action.rbs[static_cast<std::size_t>(n)];
      if (const auto* uni = std::get_if<Unicast>(&a)) {
        const double rate = unicast_rate(last_channel_.snr_at(uni->uav, n), cfg_.channel);
        const int who[1] = {uni->uav};
        deliver(who, current_[static_cast<std::size_t>(uni->uav)],
                transmission_latency(rate, cfg_.channel));
      } else if (const auto* mc = std::get_if<Multicast>(&a)) {
        const auto& grp = grouping_.groups[static_cast<std::size_t>(mc->group)];
        std::vector<double> snrs;
        snrs.reserve(grp.size());
        for (int k : grp.members) snrs.push_back(last_channel_.snr_at(k, n));
        const double rate = multicast_rate(snrs, cfg_.channel);
        deliver(grp.members, current_[static_cast<std::size_t>(grp.leader())],
                transmission_latency(rate, cfg_.channel));
      }
    }
    latency_norm_ = next_latency;
    for (int q : out.qos) out.reward += q;

    counters_.attempts += out.attempts;
    counters_.successes += out.successes;
    counters_.effective_delivered += out.newly_delivered;
    counters_.total_reward += out.reward;

    ++tti_;
    if (!done() && tti_ % cfg_.repeat_e == 0) {
      ++window_;
      open_window();
      out.window_refreshed = true;
    }
    move_uavs();
    refresh_semantic_state();
    out.observation = encode_observation();
    out.done = done();
    return out;
  }

  void move_uavs() {
    for (auto& g : geoms_) g = random_walk_step(g, cfg_, rng_);
  }

  // Layout: K x 4 temporal diffs, upper-triangle pairwise similarities
  // (row-major, k < k'), K normalized latencies, K pending flags.
  Observation encode_observation() const {
    Observation obs;
    obs.reserve(static_cast<std::size_t>(cfg_.observation_size()));
    for (const auto& d : diffs_) obs.insert(obs.end(), d.begin(), d.end());
    const auto k_total = static_cast<std::size_t>(cfg_.n_uav);
    for (std::size_t a = 0; a < k_total; ++a)
      for (std::size_t b = a + 1; b < k_total; ++b) obs.push_back(similarity_[a * k_total + b]);
    for (double l : latency_norm_) obs.push_back(l);
    for (bool p : pending_) obs.push_back(p ? 1.0 : 0.0);
    return obs;
  }

  EntitySet entities() const {
    EntitySet e;
    e.unicast = grouping_.singletons;
    e.groups = grouping_.groups;
    e.capacity = cfg_.n_rb;
    return e;
  }

  const Grouping& grouping() const { return grouping_; }
  const std::vector<bool>& pending() const { return pending_; }
  const std::vector<bool>& delivered() const { return delivered_; }
  const std::vector<bool>& triggered() const { return triggered_; }
  const std::vector<CommandVector>& commands() const { return current_; }
  const std::vector<CommandVector>& held_commands() const { return held_; }
  const std::vector<UavGeometry>& geometries() const { return geoms_; }
  const std::vector<std::vector<int>>& synthetic_groups() const { return synthetic_groups_; }
  const ChannelRealization& last_channel() const { return last_channel_; }
  const EpisodeCounters& counters() const { return counters_; }
  double similarity(int a, int b) const {
    return similarity_[static_cast<std::size_t>(a * cfg_.n_uav + b)];
  }

  // Test hook: every (k, n) SNR equals the given value instead of a draw.
  void force_snr(std::optional<double> snr) { forced_snr_ = snr; }

 private:
  void open_window() {
    auto fresh = generate_commands(cfg_, rng_);
    current_ = std::move(fresh.commands);
    synthetic_groups_ = std::move(fresh.synthetic_groups);
    for (std::size_t k = 0; k < current_.size(); ++k) {
      triggered_[k] = trigger(semantic_diff(current_[k], held_[k], cfg_.semantics), cfg_.semantics);
      delivered_[k] = false;
    }
    counters_.effective_total += cfg_.n_uav;
  }

  void refresh_semantic_state() {
    const auto k_total = static_cast<std::size_t>(cfg_.n_uav);
    for (std::size_t k = 0; k < k_total; ++k) {
      diffs_[k] = semantic_diff(current_[k], held_[k], cfg_.semantics);
      pending_[k] = triggered_[k] && !delivered_[k];
    }
    for (std::size_t a = 0; a < k_total; ++a) {
      similarity_[a * k_total + a] = 0.0;
      for (std::size_t b = a + 1; b < k_total; ++b) {
        const double l = pairwise_similarity(current_[a], current_[b], cfg_.semantics);
        similarity_[a * k_total + b] = l;
        similarity_[b * k_total + a] = l;
      }
    }
    std::vector<int> candidates;
    for (std::size_t k = 0; k < k_total; ++k)
      if (pending_[k]) candidates.push_back(static_cast<int>(k));
    grouping_ = build_multicast_groups(
        std::span<const int>(candidates),
        [this](int a, int b) { return similarity(a, b); }, cfg_.semantics.equiv_tolerance);
  }

  ChannelRealization forced_channel(double snr) const {
    ChannelRealization ch;
    ch.n_uav = cfg_.n_uav;
    ch.n_rb = cfg_.n_rb;
    const auto cells = static_cast<std::size_t>(cfg_.n_uav * cfg_.n_rb);
    ch.snr.assign(cells, snr);
    ch.gain.assign(cells, snr * cfg_.channel.noise_power() / cfg_.channel.power_per_rb());
    return ch;
  }

  SimConfig cfg_;
  Rng rng_;
  int tti_ = 0;
  int window_ = 0;
  std::vector<UavGeometry> geoms_;
  std::vector<CommandVector> current_;
  std::vector<CommandVector> held_;  // last command each UAV received
  std::vector<bool> triggered_;      // window message changed beyond threshold
  std::vector<bool> delivered_;      // window message received this window
  std::vector<bool> pending_;
  std::vector<double> latency_norm_;
  std::vector<SemanticVector> diffs_;
  std::vector<double> similarity_;
  std::vector<std::vector<int>> synthetic_groups_;
  Grouping grouping_;
  ChannelRealization last_channel_;
  EpisodeCounters counters_;
  std::optional<double> forced_snr_;
};

}  // namespace semcc
