#pragma once

// Versioned text checkpoint: shapes, config hash, RNG state, every actor and
// critic weight and both optimizers' moment estimates. Doubles are written
// with 17 significant digits so a save/load cycle is exact.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>
#include <sstream>
#include <string>
#include <vector>

#include "semcc/errors.hpp"
#include "semcc/ppo/agent.hpp"

namespace semcc::ppo {

inline constexpr const char* kCheckpointMagic = "semcc-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void write_vec(std::ostream& os, const char* tag, const std::vector<double>& v) {
  os << tag << ' ' << v.size();
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << ' ' << buf;
  }
  os << '\n';
}

inline std::vector<double> read_vec(std::istream& is, const char* tag, std::size_t expected) {
  std::string got;
  std::size_t n = 0;
  if (!(is >> got >> n) || got != tag) throw ConfigError(std::string("checkpoint: expected ") + tag);
  if (n != expected) throw ContractError(std::string("checkpoint: ") + tag + " has the wrong size");
  std::vector<double> v(n);
  for (auto& x : v) {
    std::string tok;
    if (!(is >> tok)) throw ConfigError("checkpoint: truncated weights");
    x = std::stod(tok);
  }
  return v;
}

template <typename T>
T read_field(std::istream& is, const char* tag) {
  std::string got;
  T value{};
  if (!(is >> got >> value) || got != tag) throw ConfigError(std::string("checkpoint: expected ") + tag);
  return value;
}

}  // namespace detail

inline void save_checkpoint(const PpoAgent& agent, const std::string& config_hash,
                            std::ostream& os) {
  const auto& l = agent.layout();
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "n_uav " << l.n_uav << '\n' << "n_rb " << l.n_rb << '\n';
  os << "group_slots " << l.group_slots << '\n';
  os << "obs_size " << agent.observation_size() << '\n';
  os << "hidden " << agent.config().hidden.size();
  for (auto h : agent.config().hidden) os << ' ' << h;
  os << '\n';
  os << "config_hash " << (config_hash.empty() ? "-" : config_hash) << '\n';
  os << "adam_steps " << agent.actor_optimizer().steps() << ' '
     << agent.critic_optimizer().steps() << '\n';
  os << "rng " << agent.rng().state() << '\n';
  detail::write_vec(os, "actor", agent.actor().params());
  detail::write_vec(os, "critic", agent.critic().params());
  detail::write_vec(os, "actor_m", agent.actor_optimizer().first_moment());
  detail::write_vec(os, "actor_v", agent.actor_optimizer().second_moment());
  detail::write_vec(os, "critic_m", agent.critic_optimizer().first_moment());
  detail::write_vec(os, "critic_v", agent.critic_optimizer().second_moment());
}

inline void save_checkpoint(const PpoAgent& agent, const std::string& config_hash,
                            const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save_checkpoint(agent, config_hash, os);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

struct CheckpointInfo {
  std::string config_hash;
};

// Loads into an agent already built for the expected (K, N); any shape
// disagreement is rejected before a weight is touched.
inline CheckpointInfo load_checkpoint(PpoAgent& agent, std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kCheckpointMagic)
    throw ConfigError("not a semcc checkpoint");
  if (version != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
  const auto n_uav = detail::read_field<int>(is, "n_uav");
  const auto n_rb = detail::read_field<int>(is, "n_rb");
  const auto slots = detail::read_field<int>(is, "group_slots");
  const auto& l = agent.layout();
  if (n_uav != l.n_uav || n_rb != l.n_rb || slots != l.group_slots)
    throw ContractError("checkpoint was trained for a different (K, N)");
  if (detail::read_field<std::size_t>(is, "obs_size") != agent.observation_size())
    throw ContractError("checkpoint observation size mismatch");
  const auto layers = detail::read_field<std::size_t>(is, "hidden");
  std::vector<std::size_t> hidden(layers);
  for (auto& h : hidden)
    if (!(is >> h)) throw ConfigError("checkpoint: truncated hidden sizes");
  if (hidden != agent.config().hidden) throw ContractError("checkpoint hidden layer shape mismatch");
  CheckpointInfo info;
  info.config_hash = detail::read_field<std::string>(is, "config_hash");
  std::string tag;
  long actor_steps = 0, critic_steps = 0;
  if (!(is >> tag >> actor_steps >> critic_steps) || tag != "adam_steps")
    throw ConfigError("checkpoint: expected adam_steps");
  if (!(is >> tag) || tag != "rng") throw ConfigError("checkpoint: expected rng");
  std::string rng_state;
  std::getline(is, rng_state);
  auto actor = detail::read_vec(is, "actor", agent.actor().num_params());
  auto critic = detail::read_vec(is, "critic", agent.critic().num_params());
  auto am = detail::read_vec(is, "actor_m", agent.actor().num_params());
  auto av = detail::read_vec(is, "actor_v", agent.actor().num_params());
  auto cm = detail::read_vec(is, "critic_m", agent.critic().num_params());
  auto cv = detail::read_vec(is, "critic_v", agent.critic().num_params());

  agent.actor().params() = std::move(actor);
  agent.critic().params() = std::move(critic);
  agent.actor_optimizer().first_moment() = std::move(am);
  agent.actor_optimizer().second_moment() = std::move(av);
  agent.critic_optimizer().first_moment() = std::move(cm);
  agent.critic_optimizer().second_moment() = std::move(cv);
  agent.actor_optimizer().set_steps(actor_steps);
  agent.critic_optimizer().set_steps(critic_steps);
  agent.rng().set_state(rng_state);
  return info;
}

inline CheckpointInfo load_checkpoint(PpoAgent& agent, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(agent, is);
}

// Reads only the (K, N) header, so callers can build a matching agent.
inline std::pair<int, int> peek_checkpoint_shape(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kCheckpointMagic)
    throw ConfigError("not a semcc checkpoint");
  const auto k = detail::read_field<int>(is, "n_uav");
  const auto n = detail::read_field<int>(is, "n_rb");
  return {k, n};
}

}  // namespace semcc::ppo
