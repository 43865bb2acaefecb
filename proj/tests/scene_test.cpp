#include <gtest/gtest.h>

#include <cmath>

#include "facet/error.hpp"
#include "facet/scene.hpp"

namespace facet {
namespace {

ScenarioConfig unit_gain(int M, double d, double alpha) {
  ScenarioConfig c;
  c.num_devices = 2;
  c.num_subcarriers = 3;
  c.num_antennas = M;
  c.pathloss_exponent = alpha;
  c.distance_range = {d, d};
  c.fading_model = FadingModel::fixed_unit_gain;
  return c;
}

TEST(Scene, FixedUnitGainIsAntennaCountOverPathloss) {
  const auto r = generate(unit_gain(4, 10.0, 2.0));
  for (double g : r.uplink_gain) EXPECT_DOUBLE_EQ(g, 0.04);
  for (double g : r.downlink_gain.data()) EXPECT_DOUBLE_EQ(g, 0.04);
  for (double d : r.distances) EXPECT_DOUBLE_EQ(d, 10.0);
}

TEST(Scene, SameSeedSameRealization) {
  ScenarioConfig c;
  c.seed = 42;
  EXPECT_EQ(generate(c), generate(c));
  auto other = c;
  other.seed = 43;
  EXPECT_NE(generate(c).uplink_gain, generate(other).uplink_gain);
}

TEST(Scene, DistancesStayInRange) {
  ScenarioConfig c;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    c.seed = seed;
    for (double d : generate(c).distances) {
      EXPECT_GE(d, c.distance_range[0]);
      EXPECT_LE(d, c.distance_range[1]);
    }
  }
}

TEST(Scene, ArrayGainConcentratesAtManyAntennas) {
  // sum of 64 unit-mean exponentials: mean 64, sd 8
  ScenarioConfig c;
  c.num_devices = 1;
  c.num_subcarriers = 1;
  c.num_antennas = 64;
  int inside = 0;
  double mean = 0.0;
  const int seeds = 1000;
  for (int seed = 1; seed <= seeds; ++seed) {
    c.seed = static_cast<std::uint64_t>(seed);
    const auto r = generate(c);
    const double n = r.uplink_gain[0] / std::pow(r.distances[0], -c.pathloss_exponent);
    mean += n / seeds;
    if (std::abs(n - 64.0) <= 0.2 * 64.0) ++inside;
  }
  EXPECT_NEAR(mean, 64.0, 64.0 * 0.02);
  EXPECT_GT(inside, seeds * 8 / 10);
}

TEST(Scene, CoefficientsFromGains) {
  auto c = unit_gain(4, 10.0, 2.0);
  c.uplink_noise = 1e-12;
  c.downlink_noise = 1e-10;
  const auto r = generate(c);
  const auto k = coefficients(r, 0.15);
  EXPECT_DOUBLE_EQ(k.U0[0], 2.5e-11);
  EXPECT_DOUBLE_EQ(k.U1(0, 0), 0.15 * 0.04);
  EXPECT_DOUBLE_EQ(k.U2(0, 0), 0.04 / 1e-10);
  EXPECT_DOUBLE_EQ(k.kappa, 0.15);
}

TEST(Scene, HarvestAndSnrCoefficientsShareTheGain) {
  ScenarioConfig c;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    c.seed = seed;
    const auto r = generate(c);
    const auto k = coefficients(r, 0.3);
    for (std::size_t s = 0; s < k.U1.rows(); ++s) {
      for (std::size_t l = 0; l < k.U1.cols(); ++l) {
        EXPECT_NEAR(k.U1(s, l), 0.3 * c.downlink_noise * k.U2(s, l), 1e-14 * k.U1(s, l));
      }
    }
  }
}

TEST(Scene, KappaOutsideOpenIntervalThrows) {
  const auto r = generate(ScenarioConfig{});
  EXPECT_THROW(coefficients(r, 0.0), DomainError);
  EXPECT_THROW(coefficients(r, 1.0), DomainError);
  EXPECT_THROW(coefficients(r, -0.1), DomainError);
}

TEST(Scene, ValidateListsEveryViolation) {
  ScenarioConfig c;
  EXPECT_TRUE(validate(c).empty());
  c.num_subcarriers = 5;  // < L
  c.uplink_noise = 0.0;
  c.harvest_efficiency = 1.0;
  EXPECT_EQ(validate(c).size(), 3u);
  try {
    generate(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("num_subcarriers"), std::string::npos);
    EXPECT_NE(msg.find("uplink_noise"), std::string::npos);
    EXPECT_NE(msg.find("harvest_efficiency"), std::string::npos);
  }
}

TEST(Scene, FadingModelNames) {
  EXPECT_EQ(fading_model_from_string(to_string(FadingModel::fixed_unit_gain)), FadingModel::fixed_unit_gain);
  EXPECT_EQ(fading_model_from_string(to_string(FadingModel::rayleigh_unit_variance)),
            FadingModel::rayleigh_unit_variance);
  EXPECT_THROW(fading_model_from_string("nakagami"), ConfigError);
}

}  // namespace
}  // namespace facet
