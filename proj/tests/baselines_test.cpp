#include <gtest/gtest.h>

#include <cmath>

#include "facet/baselines.hpp"
#include "facet/error.hpp"
#include "helpers.hpp"

namespace facet {
namespace {

using testing::default_problem;
using testing::rel_diff;

TEST(FcaIot, NeverHarvests) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto res = solve_fca_iot(default_problem(seed, 48.0), SolverConfig{});
    for (double r : res.solution.allocation.rho) EXPECT_EQ(r, 0.0);
    for (double e : res.solution.harvested_power) EXPECT_EQ(e, 0.0);
    EXPECT_TRUE(res.solution.converged);
  }
}

TEST(FcaIot, IgnoresHarvestEfficiency) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double a = solve_fca_iot(default_problem(seed, 46.0, 0.05), SolverConfig{}).solution.r;
    const double b = solve_fca_iot(default_problem(seed, 46.0, 0.3), SolverConfig{}).solution.r;
    EXPECT_EQ(a, b);
  }
}

TEST(FixedSplit, UplinkSitsAtTheTarget) {
  const auto p = default_problem(3, 50.0);
  const auto spec = baseline_spec("polar_wpt");
  const auto sol = solve_fixed_split_wpt(p, spec, SolverConfig{}).solution;
  double total = 0.0;
  for (double v : sol.allocation.p_tilde) total += v;
  EXPECT_LE(total, p.total_power * (1 + 1e-9));
  for (int l = 0; l < 10; ++l) {
    EXPECT_EQ(sol.allocation.rho[l], 1.0);
    EXPECT_NEAR(sol.uplink_power[l], p.coeffs.U0[l] * std::pow(10.0, 0.6), 1e-12 * sol.uplink_power[l]);
  }
}

TEST(FixedSplit, SingleDeviceClosedForm) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = default_problem(seed, 44.0, 0.15, 1, 1);
    const double expected = p.coeffs.U0[0] * std::pow(10.0, 0.5) - 0.15 * p.realization.downlink_gain(0, 0) * p.total_power;
    const auto sol = solve_fixed_split_wpt(p, baseline_spec("turbo_wpt"), SolverConfig{}).solution;
    EXPECT_NEAR(sol.r, expected, 1e-9 * std::abs(expected));
  }
}

TEST(FixedSplit, TwoDevicesMatchTheLineCrossing) {
  // With rho = 1 and t fixed each net power is affine in p1 on the budget face p1 + p2 = P;
  // the min-max sits at an end point or where the lines cross.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = default_problem(seed, 47.0, 0.15, 2, 2);
    const double P = p.total_power;
    const double k = 0.15;
    auto net = [&](int l, double p1) {
      const auto& g = p.realization.downlink_gain;
      return p.coeffs.U0[l] * std::pow(10.0, 0.6) - k * (g(0, l) * p1 + g(1, l) * (P - p1));
    };
    auto worst = [&](double p1) { return std::max(net(0, p1), net(1, p1)); };
    double best = std::min(worst(0.0), worst(P));
    const double a0 = net(0, 0.0), b0 = (net(0, P) - a0) / P;
    const double a1 = net(1, 0.0), b1 = (net(1, P) - a1) / P;
    if (b0 != b1) {
      const double x = (a1 - a0) / (b0 - b1);
      if (x > 0.0 && x < P) best = std::min(best, worst(x));
    }
    const auto sol = solve_fixed_split_wpt(p, baseline_spec("polar_wpt"), SolverConfig{}).solution;
    EXPECT_LT(rel_diff(sol.r, best), 1e-9) << seed;
  }
}

TEST(FixedSplit, StrictlyBetterWithMoreEfficientHarvesting) {
  for (const char* name : {"polar_wpt", "turbo_wpt"}) {
    double prev = 1e300;
    for (double kappa : {0.05, 0.15, 0.3}) {
      const double r = solve_fixed_split_wpt(default_problem(2, 50.0, kappa), baseline_spec(name), SolverConfig{}).solution.r;
      EXPECT_LT(r, prev) << name << " " << kappa;
      prev = r;
    }
  }
}

TEST(FixedSplit, LowerTargetIsCheaper) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = default_problem(seed, 50.0);
    const double polar = solve_fixed_split_wpt(p, baseline_spec("polar_wpt"), SolverConfig{}).solution.r;
    const double turbo = solve_fixed_split_wpt(p, baseline_spec("turbo_wpt"), SolverConfig{}).solution.r;
    EXPECT_LT(turbo, polar);
  }
}

TEST(FixedSplit, EqualTargetsGiveIdenticalResults) {
  const auto p = default_problem(4, 49.0);
  const std::map<std::string, double> same{{"polar_wpt", 5.5}, {"turbo_wpt", 5.5}};
  const auto a = solve_fixed_split_wpt(p, baseline_spec("polar_wpt", same), SolverConfig{}).solution;
  const auto b = solve_fixed_split_wpt(p, baseline_spec("turbo_wpt", same), SolverConfig{}).solution;
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.allocation.p_tilde, b.allocation.p_tilde);
}

TEST(Specs, PresetsAndOverrides) {
  const auto presets = forward_code_presets();
  EXPECT_EQ(presets.at("polar_wpt"), 6.0);
  EXPECT_EQ(presets.at("turbo_wpt"), 5.0);
  EXPECT_EQ(baseline_spec("turbo_wpt").forward_snr_threshold_db, 5.0);
  EXPECT_EQ(baseline_spec("turbo_wpt", {{"turbo_wpt", 3.0}}).forward_snr_threshold_db, 3.0);
  EXPECT_EQ(baseline_spec("polar_wpt").fixed_rho, 1.0);
  EXPECT_FALSE(baseline_spec("fca_iot").is_forward());
  EXPECT_THROW(baseline_spec("custom"), ConfigError);
  EXPECT_THROW(baseline_spec("ldpc_wpt"), ConfigError);
}

TEST(Specs, ValidateCatchesInconsistentSpecs) {
  BaselineSpec s{"polar_wpt", std::nullopt, 0.5};
  EXPECT_EQ(validate(s).size(), 2u);
  s = {"fca_iot", 4.0, 0.0};
  EXPECT_FALSE(validate(s).empty());
  s = {"custom", 4.0, 0.3};
  EXPECT_TRUE(validate(s).empty());
  s = {"custom", 4.0, 1.3};
  EXPECT_FALSE(validate(s).empty());
  EXPECT_THROW(solve_fixed_split_wpt(default_problem(1, 40.0), baseline_spec("fca_iot"), SolverConfig{}), ConfigError);
}

TEST(Specs, DispatchAgreesWithDirectCalls) {
  const auto p = default_problem(5, 45.0);
  EXPECT_EQ(solve_baseline(p, baseline_spec("fca_iot"), SolverConfig{}).solution.r,
            solve_fca_iot(p, SolverConfig{}).solution.r);
  EXPECT_EQ(solve_baseline(p, baseline_spec("turbo_wpt"), SolverConfig{}).solution.r,
            solve_fixed_split_wpt(p, baseline_spec("turbo_wpt"), SolverConfig{}).solution.r);
}

}  // namespace
}  // namespace facet
