#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "semcc/channel.hpp"

using namespace semcc;

namespace {

ChannelParams default_params() {
  ChannelParams p;
  p.n_rb = 5;
  return p;
}

}  // namespace

TEST(LosProbability, AtShapeParameterExponentIsOne) {
  const auto p = default_params();
  EXPECT_NEAR(los_probability(9.61, p), 1.0 / 10.61, 1e-15);
  EXPECT_NEAR(los_probability(9.61, p), 0.09425, 5e-6);
}

TEST(LosProbability, EndpointValues) {
  const auto p = default_params();
  EXPECT_NEAR(los_probability(90.0, p), 0.999975074537903, 1e-12);
  EXPECT_NEAR(los_probability(0.0, p), 0.021872621233283412, 1e-12);
}

TEST(LosProbability, RejectsOutOfRangeElevation) {
  const auto p = default_params();
  EXPECT_THROW(los_probability(-0.1, p), DomainError);
  EXPECT_THROW(los_probability(90.01, p), DomainError);
}

// Strict while 1 - P is resolvable; non-decreasing through double saturation.
TEST(LosProbability, IncreasingOnGrid) {
  for (double a : {0.5, 4.88, 9.61, 27.23}) {
    for (double b : {0.08, 0.16, 0.43}) {
      ChannelParams p;
      p.a_env = a;
      p.b_env = b;
      double prev = los_probability(0.0, p);
      for (int i = 1; i <= 1000; ++i) {
        const double cur = los_probability(90.0 * i / 1000.0, p);
        if (1.0 - prev > 1e-12)
          ASSERT_GT(cur, prev) << "a=" << a << " b=" << b << " i=" << i;
        else
          ASSERT_GE(cur, prev);
        prev = cur;
      }
    }
  }
}

TEST(LargeScaleGain, FreeSpaceAtHundredMetres) {
  auto p = default_params();
  p.eta_los = p.eta_nlos = 1.0;
  const auto g = UavGeometry::at(60.0, 0.0, 80.0);
  ASSERT_DOUBLE_EQ(g.distance_m, 100.0);
  const double gain = large_scale_gain(g, p);
  EXPECT_NEAR(gain / 9.894646840072049e-09, 1.0, 1e-6);
  EXPECT_NEAR(10.0 * std::log10(gain), -80.0, 0.05);
}

TEST(LargeScaleGain, EqualExcessLossCollapsesToFreeSpace) {
  auto p = default_params();
  p.eta_los = p.eta_nlos = 0.3;
  for (double z : {1.0, 20.0, 99.0}) {
    const auto g = UavGeometry::at(std::sqrt(100.0 * 100.0 - z * z), 0.0, z);
    EXPECT_NEAR(large_scale_gain(g, p) / (free_space_gain(100.0, p) * 0.3), 1.0, 1e-12);
  }
}

TEST(LargeScaleGain, InverseSquareInDistance) {
  const auto p = default_params();
  const auto near = UavGeometry::at(30.0, 40.0, 50.0);
  const auto far = UavGeometry::at(60.0, 80.0, 100.0);  // same elevation, twice the range
  EXPECT_NEAR(near.elevation_deg, far.elevation_deg, 1e-12);
  EXPECT_NEAR(large_scale_gain(near, p) / large_scale_gain(far, p), 4.0, 1e-12);
}

TEST(LargeScaleGain, StrictlyDecreasingInDistanceAtFixedElevation) {
  const auto p = default_params();
  const double elev = 35.0 * std::acos(-1.0) / 180.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 200; ++i) {
    const double d = 5.0 * i;
    const auto g = UavGeometry::at(d * std::cos(elev), 0.0, d * std::sin(elev));
    const double gain = large_scale_gain(g, p);
    ASSERT_LT(gain, prev);
    prev = gain;
  }
}

TEST(LargeScaleGain, ZeroDistanceIsDomainError) {
  UavGeometry g;
  g.distance_m = 0.0;
  EXPECT_THROW(large_scale_gain(g, default_params()), DomainError);
}

TEST(Geometry, DirectlyAboveIsNinetyDegrees) {
  EXPECT_DOUBLE_EQ(UavGeometry::at(0.0, 0.0, 50.0).elevation_deg, 90.0);
  const auto g = UavGeometry::at(3.0, 4.0, 0.0 + 5.0);
  EXPECT_NEAR(g.distance_m, std::sqrt(50.0), 1e-12);
  EXPECT_NEAR(g.elevation_deg, std::asin(5.0 / std::sqrt(50.0)) * 180.0 / std::acos(-1.0), 1e-12);
}

TEST(SmallScale, UnitMeanAndExponentialTail) {
  Rng rng(2024);
  const int n = 1000000;
  double sum = 0.0;
  int above_one = 0;
  for (int i = 0; i < n; ++i) {
    const double s = sample_small_scale(rng);
    ASSERT_GT(s, 0.0);
    sum += s;
    if (s > 1.0) ++above_one;
  }
  EXPECT_NEAR(sum / n, 1.0, 0.01);
  EXPECT_NEAR(static_cast<double>(above_one) / n, std::exp(-1.0), 0.005);
}

TEST(SmallScale, SameSeedSameSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_small_scale(a), sample_small_scale(b));
}

TEST(RealizeChannel, DegenerateFadingGivesLargeScaleSnr) {
  auto p = default_params();
  p.n_rb = 1;
  const std::vector<UavGeometry> geoms{UavGeometry::at(100.0, 50.0, 120.0)};
  const auto ch = realize_channel(std::span<const UavGeometry>(geoms), p, [] { return 1.0; });
  const double expected = p.power_per_rb() * large_scale_gain(geoms[0], p) / p.noise_power();
  EXPECT_EQ(ch.snr_at(0, 0), expected);
}

TEST(RealizeChannel, NoisePowerFromPsdAndBandwidth) {
  ChannelParams p;
  p.noise_psd_w_hz = dbm_to_watts(-174.0);
  p.rb_bandwidth_hz = 180e3;
  EXPECT_NEAR(p.noise_power() / 7.165929069962951e-16, 1.0, 1e-12);
}

TEST(RealizeChannel, IdenticalPositionsShareLargeScaleRow) {
  const auto p = default_params();
  const std::vector<UavGeometry> geoms{UavGeometry::at(10.0, 20.0, 30.0), UavGeometry::at(10.0, 20.0, 30.0)};
  const auto ch = realize_channel(std::span<const UavGeometry>(geoms), p, [] { return 1.0; });
  for (int n = 0; n < p.n_rb; ++n) EXPECT_EQ(ch.gain_at(0, n), ch.gain_at(1, n));
}

TEST(RealizeChannel, SnrConsistencyAndPositivity) {
  const auto p = default_params();
  Rng rng(5);
  std::vector<UavGeometry> geoms;
  for (int k = 0; k < 8; ++k) geoms.push_back(UavGeometry::at(20.0 * k + 1.0, -15.0 * k, 10.0 + 30.0 * k));
  for (int rep = 0; rep < 100; ++rep) {
    const auto ch = realize_channel(std::span<const UavGeometry>(geoms), p, rng);
    ASSERT_EQ(ch.snr.size(), geoms.size() * static_cast<std::size_t>(p.n_rb));
    for (std::size_t i = 0; i < ch.snr.size(); ++i) {
      ASSERT_TRUE(std::isfinite(ch.gain[i]) && ch.gain[i] > 0.0);
      const double expect = p.power_per_rb() * ch.gain[i] / p.noise_power();
      ASSERT_NEAR(ch.snr[i] / expect, 1.0, 1e-12);
    }
  }
}

TEST(RealizeChannel, EmptyListRejected) {
  std::vector<UavGeometry> none;
  Rng rng(1);
  EXPECT_THROW(realize_channel(std::span<const UavGeometry>(none), default_params(), rng), ContractError);
}

TEST(Rates, UnicastShannonValues) {
  const auto p = default_params();
  EXPECT_EQ(unicast_rate(0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(unicast_rate(1.0, p), 180000.0);
  EXPECT_DOUBLE_EQ(unicast_rate(3.0, p), 360000.0);
  EXPECT_THROW(unicast_rate(-1e-9, p), DomainError);
}

TEST(Rates, MulticastLimitedByWeakestMember) {
  const auto p = default_params();
  const std::vector<double> snrs{1.0, 3.0};
  EXPECT_DOUBLE_EQ(multicast_rate(snrs, p), 180000.0);
  const std::vector<double> equal{2.5, 2.5, 2.5};
  EXPECT_EQ(multicast_rate(equal, p), unicast_rate(2.5, p));
  const std::vector<double> weaker{1.0, 3.0, 0.5};
  EXPECT_LE(multicast_rate(weaker, p), multicast_rate(snrs, p));
  const std::vector<double> single{4.0};
  EXPECT_THROW(multicast_rate(single, p), ContractError);
  EXPECT_THROW(multicast_rate(std::vector<double>{}, p), ContractError);
}

TEST(Rates, MulticastEqualsMinUnicastOnRandomLists) {
  const auto p = default_params();
  Rng rng(17);
  for (int c = 0; c < 10000; ++c) {
    std::vector<double> snrs(2 + rng.index(8));
    double min_rate = std::numeric_limits<double>::infinity();
    for (auto& s : snrs) {
      s = std::exp(rng.uniform(-10.0, 10.0));
      min_rate = std::min(min_rate, unicast_rate(s, p));
    }
    ASSERT_EQ(multicast_rate(snrs, p), min_rate);
  }
}

TEST(Latency, SuccessBoundaryAtOneTti) {
  const auto p = default_params();
  EXPECT_EQ(transmission_latency(12800.0, p), 0.02);
  EXPECT_TRUE(transmission_succeeds(transmission_latency(12800.0, p), p));
  EXPECT_DOUBLE_EQ(transmission_latency(25600.0, p), 0.01);
  EXPECT_TRUE(transmission_succeeds(transmission_latency(25600.0, p), p));
  EXPECT_GT(transmission_latency(12799.0, p), 0.02);
  EXPECT_FALSE(transmission_succeeds(transmission_latency(12799.0, p), p));
}

TEST(Latency, ZeroRateIsFailureNotCrash) {
  const auto p = default_params();
  const double l = transmission_latency(0.0, p);
  EXPECT_TRUE(std::isinf(l));
  EXPECT_FALSE(transmission_succeeds(l, p));
  EXPECT_THROW(transmission_latency(-1.0, p), DomainError);
}

TEST(Latency, LatencyTimesRateIsPayload) {
  const auto p = default_params();
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double r = std::exp(rng.uniform(0.0, 25.0));
    ASSERT_NEAR(transmission_latency(r, p) * r / p.msg_bits, 1.0, 1e-12);
  }
}

TEST(ChannelParams, Validation) {
  ChannelParams p;
  EXPECT_NO_THROW(p.validate());
  p.eta_los = 1.0;  // boundary admitted
  EXPECT_NO_THROW(p.validate());
  p.eta_nlos = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = ChannelParams{};
  p.a_env = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}
