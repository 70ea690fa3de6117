#pragma once

// Flat, typed `key = value` run configuration. Values are stored exactly as
// written (dB where the key says so); conversion to linear units happens
// once, in to_sim_config().

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semcc/env.hpp"
#include "semcc/errors.hpp"
#include "semcc/ppo/agent.hpp"

namespace semcc::harness {

struct RunConfig {
  // scenario
  int n_uav = 10;
  int n_rb = 0;  // 0 derives floor(K / 2)
  double radius_m = 500.0;
  double max_alt_m = 300.0;
  double min_alt_m = 10.0;
  int repeat_e = 5;
  int episode_ttis = 200;
  int equiv_group_count = 2;
  int equiv_group_size = 3;
  double equiv_perturb = 1.0;
  double mobility_sigma_m = 1.0;
  bool mobile = true;
  std::uint64_t seed = 1;
  // channel
  double carrier_freq_hz = 2.4e9;
  double light_speed_m_s = 3.0e8;
  double los_a = 9.61;
  double los_b = 0.16;
  double eta_los_db = 1.0;   // excess loss
  double eta_nlos_db = 20.0;
  double noise_psd_dbm_hz = -174.0;
  double rb_bandwidth_hz = 180e3;
  double total_power_w = 2.0;
  double msg_bits = 256.0;
  double tti_s = 0.02;
  // semantics
  double equiv_tolerance = 0.05;
  std::vector<double> trigger_thresholds{0.02, 0.02, 0.02, 0.02};
  // learning
  double discount = 0.99;
  double clip_eps = 0.2;
  double learn_rate = 3e-4;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatch = 256;
  int rollout_len = 2048;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  long total_steps = 100000;
  std::vector<double> hidden{128, 128};
  std::string optimizer = "adam";
  bool normalize_advantages = true;
  double max_grad_norm = 0.5;
  int eval_every = 10;
  std::uint64_t ppo_seed = 7;

  int effective_n_rb() const { return n_rb > 0 ? n_rb : n_uav / 2; }

  SimConfig to_sim_config() const {
    SimConfig s;
    s.n_uav = n_uav;
    s.n_rb = effective_n_rb();
    s.radius_m = radius_m;
    s.max_alt_m = max_alt_m;
    s.min_alt_m = min_alt_m;
    s.repeat_e = repeat_e;
    s.episode_ttis = episode_ttis;
    s.equiv_group_count = equiv_group_count;
    s.equiv_group_size = equiv_group_size;
    s.equiv_perturb = equiv_perturb;
    s.mobility_sigma_m = mobility_sigma_m;
    s.mobile = mobile;
    s.seed = seed;
    s.discount = discount;
    s.channel.carrier_freq_hz = carrier_freq_hz;
    s.channel.light_speed_m_s = light_speed_m_s;
    s.channel.a_env = los_a;
    s.channel.b_env = los_b;
    s.channel.eta_los = db_to_linear(-eta_los_db);
    s.channel.eta_nlos = db_to_linear(-eta_nlos_db);
    s.channel.noise_psd_w_hz = dbm_to_watts(noise_psd_dbm_hz);
    s.channel.rb_bandwidth_hz = rb_bandwidth_hz;
    s.channel.total_power_w = total_power_w;
    s.channel.msg_bits = msg_bits;
    s.channel.tti_s = tti_s;
    s.semantics.equiv_tolerance = equiv_tolerance;
    if (trigger_thresholds.size() != kNumCommands)
      throw ConfigError("trigger_thresholds needs exactly four values");
    for (std::size_t i = 0; i < kNumCommands; ++i) s.semantics.trigger_thresholds[i] = trigger_thresholds[i];
    s.sync();
    return s;
  }

  ppo::PpoConfig to_ppo_config() const {
    ppo::PpoConfig p;
    p.clip_eps = clip_eps;
    p.learn_rate = learn_rate;
    p.discount = discount;
    p.gae_lambda = gae_lambda;
    p.epochs = epochs;
    p.minibatch = minibatch;
    p.rollout_len = rollout_len;
    p.entropy_coef = entropy_coef;
    p.value_coef = value_coef;
    p.total_steps = total_steps;
    p.hidden.clear();
    for (double h : hidden) {
      if (!(h >= 1.0) || h != static_cast<double>(static_cast<std::size_t>(h)))
        throw ConfigError("hidden sizes must be positive integers");
      p.hidden.push_back(static_cast<std::size_t>(h));
    }
    if (optimizer == "adam")
      p.optimizer = ppo::Optimizer::Adam;
    else if (optimizer == "sgd")
      p.optimizer = ppo::Optimizer::Sgd;
    else
      throw ConfigError("optimizer must be adam or sgd");
    p.normalize_advantages = normalize_advantages;
    p.max_grad_norm = max_grad_norm;
    p.eval_every = eval_every;
    p.seed = ppo_seed;
    return p;
  }

  // Full semantic validation of both derived configs.
  void validate() const {
    to_sim_config().validate();
    to_ppo_config().validate();
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return d;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return i;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') throw ConfigError("key '" + key + "': expected a non-negative integer");
  char* end = nullptr;
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0') throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SEMCC_DOUBLE(name)                                                                   \
  Field{#name, [](const RunConfig& c) { return format_double(c.name); },                    \
        [](RunConfig& c, const std::string& v) { c.name = parse_double(#name, v); }}
#define SEMCC_INT(name)                                                                      \
  Field{#name, [](const RunConfig& c) { return std::to_string(c.name); },                   \
        [](RunConfig& c, const std::string& v) {                                             \
          c.name = static_cast<decltype(c.name)>(parse_int(#name, v));                       \
        }}
#define SEMCC_U64(name)                                                                      \
  Field{#name, [](const RunConfig& c) { return std::to_string(c.name); },                   \
        [](RunConfig& c, const std::string& v) { c.name = parse_u64(#name, v); }}
#define SEMCC_BOOL(name)                                                                     \
  Field{#name, [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); },   \
        [](RunConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }}
#define SEMCC_LIST(name)                                                                     \
  Field{#name, [](const RunConfig& c) { return format_list(c.name); },                      \
        [](RunConfig& c, const std::string& v) { c.name = parse_list(#name, v); }}

// Schema, in serialization order.
inline const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      SEMCC_INT(n_uav),
      SEMCC_INT(n_rb),
      SEMCC_DOUBLE(radius_m),
      SEMCC_DOUBLE(max_alt_m),
      SEMCC_DOUBLE(min_alt_m),
      SEMCC_INT(repeat_e),
      SEMCC_INT(episode_ttis),
      SEMCC_INT(equiv_group_count),
      SEMCC_INT(equiv_group_size),
      SEMCC_DOUBLE(equiv_perturb),
      SEMCC_DOUBLE(mobility_sigma_m),
      SEMCC_BOOL(mobile),
      SEMCC_U64(seed),
      SEMCC_DOUBLE(carrier_freq_hz),
      SEMCC_DOUBLE(light_speed_m_s),
      SEMCC_DOUBLE(los_a),
      SEMCC_DOUBLE(los_b),
      SEMCC_DOUBLE(eta_los_db),
      SEMCC_DOUBLE(eta_nlos_db),
      SEMCC_DOUBLE(noise_psd_dbm_hz),
      SEMCC_DOUBLE(rb_bandwidth_hz),
      SEMCC_DOUBLE(total_power_w),
      SEMCC_DOUBLE(msg_bits),
      SEMCC_DOUBLE(tti_s),
      SEMCC_DOUBLE(equiv_tolerance),
      SEMCC_LIST(trigger_thresholds),
      SEMCC_DOUBLE(discount),
      SEMCC_DOUBLE(clip_eps),
      SEMCC_DOUBLE(learn_rate),
      SEMCC_DOUBLE(gae_lambda),
      SEMCC_INT(epochs),
      SEMCC_INT(minibatch),
      SEMCC_INT(rollout_len),
      SEMCC_DOUBLE(entropy_coef),
      SEMCC_DOUBLE(value_coef),
      SEMCC_INT(total_steps),
      SEMCC_LIST(hidden),
      Field{"optimizer", [](const RunConfig& c) { return c.optimizer; },
            [](RunConfig& c, const std::string& v) { c.optimizer = v; }},
      SEMCC_BOOL(normalize_advantages),
      SEMCC_DOUBLE(max_grad_norm),
      SEMCC_INT(eval_every),
      SEMCC_U64(ppo_seed),
  };
  return table;
}

#undef SEMCC_DOUBLE
#undef SEMCC_INT
#undef SEMCC_U64
#undef SEMCC_BOOL
#undef SEMCC_LIST

}  // namespace detail

inline void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : detail::fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

// `#` starts a comment; blank lines are ignored; each key may appear once.
inline RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    set_value(cfg, key, value);
  }
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is);
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : detail::fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

// FNV-1a 64 over the canonical serialization, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// SEMCC_SEED, when set, replaces the scenario seed.
inline void apply_env_overrides(RunConfig& cfg) {
  if (const char* s = std::getenv("SEMCC_SEED"); s && *s) cfg.seed = detail::parse_u64("SEMCC_SEED", s);
}

}  // namespace semcc::harness
