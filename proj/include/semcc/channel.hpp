#pragma once

// Air-to-ground downlink channel: probabilistic LoS/NLoS large-scale gain,
// Rayleigh small-scale fading, per-RB SNR, Shannon rates and the latency
// test against one TTI. Everything here works in linear units.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "semcc/errors.hpp"
#include "semcc/random.hpp"

namespace semcc {

struct ChannelParams {
  double carrier_freq_hz = 2.4e9;
  double light_speed_m_s = 3.0e8;
  double a_env = 9.61;
  double b_env = 0.16;
  double eta_los = 0.7943282347242815;  // 1 dB excess loss
  double eta_nlos = 0.01;               // 20 dB excess loss
  double noise_psd_w_hz = 3.981071705534986e-21;  // -174 dBm/Hz
  double rb_bandwidth_hz = 180e3;
  double total_power_w = 2.0;
  int n_rb = 5;
  double msg_bits = 256.0;
  double tti_s = 0.02;

  double power_per_rb() const { return total_power_w / n_rb; }
  double noise_power() const { return noise_psd_w_hz * rb_bandwidth_hz; }

  void validate() const {
    if (!(a_env > 0.0) || !(b_env > 0.0))
      throw ConfigError("LoS shape parameters a, b must be positive");
    if (!(eta_los > 0.0 && eta_los <= 1.0) || !(eta_nlos > 0.0 && eta_nlos <= 1.0))
      throw ConfigError("excess-loss factors must lie in (0, 1]");
    if (n_rb < 1) throw ConfigError("n_rb must be >= 1");
    if (!(total_power_w > 0.0)) throw ConfigError("total power must be positive");
    if (!(noise_psd_w_hz > 0.0) || !(rb_bandwidth_hz > 0.0))
      throw ConfigError("noise power must be positive");
    if (!(carrier_freq_hz > 0.0) || !(light_speed_m_s > 0.0))
      throw ConfigError("carrier frequency and light speed must be positive");
    if (!(msg_bits > 0.0) || !(tti_s > 0.0))
      throw ConfigError("message size and TTI duration must be positive");
  }
};

struct UavGeometry {
  std::array<double, 3> position_m{0.0, 0.0, 1.0};
  double distance_m = 1.0;
  double elevation_deg = 90.0;

  // Derives distance and elevation; a UAV straight above the BS sits at 90 deg.
  static UavGeometry at(double x, double y, double z) {
    UavGeometry g;
    g.position_m = {x, y, z};
    g.distance_m = std::sqrt(x * x + y * y + z * z);
    if (g.distance_m > 0.0) {
      const double ratio = std::clamp(z / g.distance_m, -1.0, 1.0);
      g.elevation_deg = std::asin(ratio) * 180.0 / std::numbers::pi;
    } else {
      g.elevation_deg = 90.0;
    }
    return g;
  }
};

// K x N row-major matrices.
struct ChannelRealization {
  int n_uav = 0;
  int n_rb = 0;
  std::vector<double> gain;
  std::vector<double> snr;

  double gain_at(int k, int n) const { return gain[static_cast<std::size_t>(k * n_rb + n)]; }
  double snr_at(int k, int n) const { return snr[static_cast<std::size_t>(k * n_rb + n)]; }
};

inline double los_probability(double elevation_deg, const ChannelParams& p) {
  if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0))
    throw DomainError("elevation must lie in [0, 90] degrees");
  return 1.0 / (1.0 + p.a_env * std::exp(-p.b_env * (elevation_deg - p.a_env)));
}

inline double free_space_gain(double distance_m, const ChannelParams& p) {
  const double x = 4.0 * std::numbers::pi * p.carrier_freq_hz * distance_m / p.light_speed_m_s;
  return 1.0 / (x * x);
}

inline double large_scale_gain(const UavGeometry& geom, const ChannelParams& p) {
  if (!(geom.distance_m > 0.0)) throw DomainError("distance must be positive");
  const double plos = los_probability(geom.elevation_deg, p);
  return free_space_gain(geom.distance_m, p) * (plos * p.eta_los + (1.0 - plos) * p.eta_nlos);
}

inline double sample_small_scale(Rng& rng) { return rng.exponential(); }

// Fading draw order: row-major over (k, n).
template <typename FadingSource>
ChannelRealization realize_channel(std::span<const UavGeometry> geoms, const ChannelParams& p,
                                   FadingSource&& fading) {
  if (geoms.empty()) throw ContractError("realize_channel needs at least one UAV");
  ChannelRealization out;
  out.n_uav = static_cast<int>(geoms.size());
  out.n_rb = p.n_rb;
  const std::size_t cells = geoms.size() * static_cast<std::size_t>(p.n_rb);
  out.gain.resize(cells);
  out.snr.resize(cells);
  const double scale = p.power_per_rb() / p.noise_power();
  for (std::size_t k = 0; k < geoms.size(); ++k) {
    const double g_ls = large_scale_gain(geoms[k], p);
    for (int n = 0; n < p.n_rb; ++n) {
      const std::size_t i = k * static_cast<std::size_t>(p.n_rb) + static_cast<std::size_t>(n);
      out.gain[i] = g_ls * fading();
      out.snr[i] = scale * out.gain[i];
    }
  }
  return out;
}

inline ChannelRealization realize_channel(std::span<const UavGeometry> geoms,
                                          const ChannelParams& p, Rng& rng) {
  return realize_channel(geoms, p, [&rng] { return sample_small_scale(rng); });
}

inline double unicast_rate(double snr, const ChannelParams& p) {
  if (!(snr >= 0.0)) throw DomainError("SNR must be non-negative");
  return p.rb_bandwidth_hz * std::log2(1.0 + snr);
}

// Rate of a multicast group is capped by its weakest member.
inline double multicast_rate(std::span<const double> member_snrs, const ChannelParams& p) {
  if (member_snrs.size() < 2) throw ContractError("multicast group needs at least two members");
  return unicast_rate(*std::min_element(member_snrs.begin(), member_snrs.end()), p);
}

// Seconds to push one C&C message; a zero rate never finishes.
inline double transmission_latency(double rate_bps, const ChannelParams& p) {
  if (rate_bps < 0.0) throw DomainError("rate must be non-negative");
  if (rate_bps == 0.0) return std::numeric_limits<double>::infinity();
  return p.msg_bits / rate_bps;
}

inline bool transmission_succeeds(double latency_s, const ChannelParams& p) {
  return latency_s <= p.tti_s;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace semcc
