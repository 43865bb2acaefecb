#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "facet/baselines.hpp"
#include "facet/error.hpp"
#include "facet/oracle.hpp"
#include "facet/solver.hpp"
#include "helpers.hpp"

namespace facet {
namespace {

using testing::assignment;
using testing::default_problem;
using testing::realization;
using testing::rel_diff;

// One device on one subcarrier with round numbers: U0 = 1, U1 = 0.15, U2 = 1e4.
Problem unit_problem(double total_power = 1.0) {
  auto r = realization({{1.0}}, {1e-9}, 1e-9, 1e-4);
  return make_problem(r, assignment({0}, 1), 0.15, CodeParams{}, total_power);
}

// Two devices on subcarriers 0 and 2 of three.
Problem two_device_problem(double total_power = 2.0) {
  auto r = realization({{1e-6, 2e-7}, {5e-7, 5e-7}, {3e-7, 8e-7}}, {2e-6, 1e-6}, 1e-9, 1e-4);
  return make_problem(r, assignment({0, 2}, 3), 0.15, CodeParams{}, total_power);
}

DualState duals(int L, double lambda, double mu, double eta) {
  DualState d;
  d.lambda.assign(L, lambda);
  d.gamma.assign(L, lambda);
  d.mu.assign(L, mu);
  d.nu.assign(L, mu);
  d.eta = eta;
  return d;
}

TEST(Evaluate, FeedbackSnrOfAKnownPoint) {
  auto r = realization({{1e-6}}, {1e-9}, 1e-9, 1e-13);  // U2 = 1e7
  const auto p = make_problem(r, assignment({0}, 1), 0.15, CodeParams{}, 1.0);
  Allocation a{{1.0}, {0.0}, {0.0}};
  EXPECT_NEAR(effective_feedback_snr_db(p, a)[0], 70.0, 1e-12);
  a.rho = {0.5};
  EXPECT_NEAR(effective_feedback_snr_db(p, a)[0], 70.0 - 10.0 * std::log10(2.0), 1e-12);
  a.rho = {1.0};
  EXPECT_EQ(effective_feedback_snr_db(p, a)[0], -std::numeric_limits<double>::infinity());
}

TEST(Evaluate, ReceivedRfSumsThePoweredSubcarriers) {
  const auto p = two_device_problem();
  const Allocation a{{1.0, 5.0, 2.0}, {0.3, 0.6}, {0.0, 0.0}};
  const auto rf = received_rf_power(p, a);
  EXPECT_DOUBLE_EQ(rf[0], 1.0 * 1e-6 + 2.0 * 3e-7);
  EXPECT_DOUBLE_EQ(rf[1], 1.0 * 2e-7 + 2.0 * 8e-7);
}

TEST(Evaluate, NetPowerOfAKnownPoint) {
  // uplink 10^{-1} with t = -10 dB, harvest 0.5 * 0.15 * 0.8
  const auto p = unit_problem();
  const Allocation a{{0.8}, {0.5}, {-10.0}};
  const auto sol = evaluate(p, a);
  EXPECT_NEAR(sol.uplink_power[0], 0.1, 1e-15);
  EXPECT_NEAR(sol.harvested_power[0], 0.06, 1e-15);
  EXPECT_NEAR(sol.net_power[0], 0.04, 1e-15);
  EXPECT_NEAR(sol.r, 0.04, 1e-15);
  EXPECT_NEAR(net_power(p, {{0.8}, {0.0}, {-10.0}}).max, 0.1, 1e-15);
}

TEST(Evaluate, MaxMatchesAnIndependentLoop) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto p = default_problem(3, 45.0);
  for (int i = 0; i < 100; ++i) {
    Allocation a;
    a.p_tilde.resize(12);
    for (auto& v : a.p_tilde) v = u(gen) * p.total_power / 12.0;
    for (int l = 0; l < 10; ++l) {
      a.rho.push_back(u(gen));
      a.t.push_back(-1.9 + 12.0 * u(gen));
    }
    double worst = -1e300;
    for (int l = 0; l < 10; ++l) {
      double rf = 0.0;
      for (int s = 0; s < 12; ++s) {
        if (p.device_of[s] >= 0) rf += a.p_tilde[s] * p.realization.downlink_gain(s, l);
      }
      const double up = p.realization.uplink_noise / p.realization.uplink_gain[l] * std::pow(10.0, a.t[l] / 10.0);
      worst = std::max(worst, up - a.rho[l] * 0.15 * rf);
    }
    EXPECT_NEAR(evaluate(p, a).r, worst, 1e-12 * std::abs(worst));
  }
}

TEST(Evaluate, TightenedTClampsInsideTheLawRange) {
  const auto p = unit_problem(1e30);
  const CodeParams code;
  EXPECT_NEAR(tighten_t(p, {{1e30}, {0.0}, {0.0}}, 1e-6)[0], code.t_floor() + 1e-6, 1e-12);
  EXPECT_NEAR(tighten_t(p, {{1.0}, {1.0}, {0.0}}, 1e-6)[0], code.t_ceiling() - 1e-6, 1e-12);
  const Allocation a{{1e-3}, {0.2}, {0.0}};
  const double x = effective_feedback_snr_db(p, a)[0];
  EXPECT_NEAR(tighten_t(p, a, 1e-6)[0], critical_uplink_snr_db(x, code), 1e-12);
}

TEST(Evaluate, ShapeMismatchThrows) {
  const auto p = two_device_problem();
  EXPECT_THROW(evaluate(p, {{1.0}, {0.0, 0.0}, {0.0, 0.0}}), DomainError);
}

TEST(Problem, RejectsInconsistentPieces) {
  auto r = realization({{1.0}, {1.0}}, {1e-9});
  EXPECT_THROW(make_problem(r, assignment({0}, 3), 0.15, CodeParams{}, 1.0), ConfigError);
  EXPECT_THROW(make_problem(r, assignment({2}, 2), 0.15, CodeParams{}, 1.0), ConfigError);
  EXPECT_THROW(make_problem(r, assignment({0}, 2), 0.15, CodeParams{}, -1.0), ConfigError);
  EXPECT_NO_THROW(make_problem(r, assignment({1}, 2), 0.15, CodeParams{}, 0.0));
}

TEST(Updates, PowerIsAStationaryPointOfTheLagrangian) {
  const auto p = two_device_problem();
  const SolverConfig cfg;
  DualState d = duals(2, 0.5, 0.0, 1.0);
  d.mu = {2e-3, 5e-3};
  const Allocation a{{0.5, 0.3, 0.7}, {0.4, 0.7}, {1.0, 2.0}};
  const auto up = update_power(d, p, a, cfg);
  EXPECT_EQ(up.degenerate, 0);
  EXPECT_EQ(up.p_tilde[1], 0.0);
  for (int s : {0, 2}) {
    Allocation w = a;
    w.p_tilde = up.p_tilde;
    const double v = w.p_tilde[s];
    const double h = 1e-6 * v;
    w.p_tilde[s] = v + h;
    const double hi = lagrangian(p, w, 0.0, d);
    w.p_tilde[s] = v - h;
    const double lo = lagrangian(p, w, 0.0, d);
    EXPECT_NEAR((hi - lo) / (2 * h), 0.0, 1e-6) << s;
  }
}

TEST(Updates, PowerEdgeCases) {
  const auto p = two_device_problem(3.0);
  SolverConfig cfg;
  const Allocation a{{0.5, 0.3, 0.7}, {0.4, 0.7}, {1.0, 2.0}};
  auto d = duals(2, 0.5, 0.0, 1.0);
  EXPECT_EQ(update_power(d, p, a, cfg).p_tilde, (std::vector<double>{0.0, 0.0, 0.0}));

  d.eta = 0.0;  // denominator <= 0 everywhere
  auto up = update_power(d, p, a, cfg);
  EXPECT_EQ(up.degenerate, 2);
  EXPECT_EQ(up.p_tilde, (std::vector<double>{3.0, 0.0, 3.0}));
  cfg.power_cap_w = 0.25;
  EXPECT_EQ(update_power(d, p, a, cfg).p_tilde, (std::vector<double>{0.25, 0.0, 0.25}));

  d = duals(2, 0.0, 0.0, 2.0);
  d.mu = {1.0, 3.0};
  cfg = SolverConfig{};
  EXPECT_EQ(update_power(d, p, a, cfg).p_tilde, (std::vector<double>{0.5, 0.0, 1.5}));
  cfg.power_numerator = PowerNumerator::all_devices;
  EXPECT_EQ(update_power(d, p, a, cfg).p_tilde, (std::vector<double>{2.0, 0.0, 2.0}));
}

TEST(Updates, RhoIsAStationaryPointOfTheLagrangian) {
  const auto p = two_device_problem();
  auto d = duals(2, 0.5, 0.0, 1.0);
  d.mu = {2e-8, 1e-8};
  const Allocation a{{0.5, 0.3, 0.7}, {0.4, 0.7}, {1.0, 2.0}};
  const auto rho = update_rho(d, p, a);
  for (int l = 0; l < 2; ++l) {
    ASSERT_GT(rho[l], 0.0);
    ASSERT_LT(rho[l], 1.0);
    Allocation w = a;
    w.rho = rho;
    const double h = 1e-7;
    w.rho[l] = rho[l] + h;
    const double hi = lagrangian(p, w, 0.0, d);
    w.rho[l] = rho[l] - h;
    const double lo = lagrangian(p, w, 0.0, d);
    EXPECT_NEAR((hi - lo) / (2 * h), 0.0, 1e-9) << l;
  }
}

TEST(Updates, RhoEdgeCases) {
  const auto p = two_device_problem();
  const Allocation a{{0.5, 0.3, 0.7}, {0.4, 0.7}, {1.0, 2.0}};
  auto d = duals(2, 0.5, 0.0, 1.0);
  EXPECT_EQ(update_rho(d, p, a), (std::vector<double>{1.0, 1.0}));
  d.mu = {1.0, 1.0};
  EXPECT_EQ(update_rho(d, p, a), (std::vector<double>{0.0, 0.0}));
  d = duals(2, 0.0, 1.0, 1.0);
  EXPECT_EQ(update_rho(d, p, a), (std::vector<double>{0.0, 0.0}));
}

TEST(Updates, DualStepTakesTheScheduledStep) {
  const auto p = two_device_problem(2.0);
  SolverConfig cfg;
  cfg.step_a0 = 0.5;
  cfg.step_decay = 0.5;
  const Allocation a{{1.5, 0.0, 1.5}, {0.4, 0.7}, {1.0, 2.0}};
  auto d = duals(2, 0.5, 0.1, 0.25);
  d.step_index = 4;
  const auto next = dual_step(d, p, a, 0.0, cfg, 1.0);
  EXPECT_DOUBLE_EQ(next.eta, 0.25 + 0.25 * 1.0);  // 0.5 / sqrt(4) times the excess of 1 W
  EXPECT_EQ(next.step_index, 5);

  const Allocation under{{0.5, 0.0, 0.5}, {0.4, 0.7}, {1.0, 2.0}};
  d.eta = 0.0;
  EXPECT_EQ(dual_step(d, p, under, 0.0, cfg, 1.0).eta, 0.0);
  for (double m : dual_step(d, p, under, 1e9, cfg, 1.0).lambda) EXPECT_GE(m, 0.0);

  d.step_index = 0;
  EXPECT_THROW(dual_step(d, p, a, 0.0, cfg, 1.0), DomainError);
  d.step_index = 1;
  EXPECT_THROW(dual_step(d, p, a, 0.0, cfg, 0.0), DomainError);
}

TEST(Updates, SimplexProjection) {
  EXPECT_EQ(project_to_simplex({0.5, 0.5}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(project_to_simplex({2.0, 0.0}), (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(project_to_simplex({-1.0, -1.0}), (std::vector<double>{0.5, 0.5}));
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(7);
    for (auto& x : v) x = n(gen);
    const auto w = project_to_simplex(v);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    for (double x : w) EXPECT_GE(x, 0.0);
    const auto again = project_to_simplex(w);
    for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(again[j], w[j], 1e-14);
  }
}

TEST(Constraints, KnownSlacks) {
  const auto p = two_device_problem(2.0);
  Allocation a{{0.5, 0.0, 0.5}, {0.4, 0.7}, {0.0, 0.0}};
  a.t = tighten_t(p, a, 1e-6);
  const auto res = constraint_residuals(p, a);
  EXPECT_DOUBLE_EQ(res.power_slack, 1.0);
  EXPECT_NEAR(res.rho_slack[0], 0.4, 1e-15);
  EXPECT_NEAR(res.rho_slack[1], 0.3, 1e-15);
  for (double s : res.t_direct_slack) EXPECT_NEAR(s, 0.0, 1e-12);
  for (std::size_t l = 0; l < 2; ++l) {
    ASSERT_TRUE(res.t_log_in_domain[l]);
    EXPECT_NEAR(res.t_log_slack[l], 0.0, 1e-9);
  }
}

TEST(Constraints, DirectAndLogFormsAgreeInSign) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto p = default_problem(4, 40.0);
  const CodeParams code;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Allocation a;
    for (int s = 0; s < 12; ++s) a.p_tilde.push_back(u(gen) * 1e-2);
    for (int l = 0; l < 10; ++l) {
      a.rho.push_back(0.99 * u(gen));
      a.t.push_back(code.t_floor() + (0.01 + 0.98 * u(gen)) / code.u3);
    }
    const auto res = constraint_residuals(p, a);
    for (int l = 0; l < 10; ++l) {
      ASSERT_TRUE(res.t_log_in_domain[l]);
      if (std::abs(res.t_direct_slack[l]) < 1e-9) continue;
      EXPECT_EQ(res.t_direct_slack[l] > 0, res.t_log_slack[l] > 0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 9000);
}

TEST(Kkt, ReportsBudgetViolation) {
  const auto p = two_device_problem(2.0);
  Allocation a{{2.0, 0.0, 2.0}, {0.4, 0.7}, {0.0, 0.0}};
  a.t = tighten_t(p, a, 1e-6);
  const auto k = kkt_report(p, evaluate(p, a), duals(2, 0.5, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(k.power_violation, 2.0);
  EXPECT_DOUBLE_EQ(k.simplex_residual, 0.0);
  EXPECT_EQ(k.min_multiplier, 0.0);
}

TEST(Config, ValidateListsEveryViolation) {
  SolverConfig c;
  EXPECT_TRUE(validate(c).empty());
  c.init_rho = 2.0;
  c.t_guard_db = 0.0;
  c.power_cap_w = -1.0;
  EXPECT_EQ(validate(c).size(), 3u);
  EXPECT_THROW(solve(unit_problem(), c), ConfigError);
}

TEST(Solve, SingleDeviceMatchesTheMeshOracle) {
  GridSpec grid;
  grid.power_points = 2000;
  grid.rho_points = 2000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (double dbm : {36.0, 44.0, 50.0}) {
      const auto p = default_problem(seed, dbm, 0.15, 1, 1);
      const auto res = solve(p, SolverConfig{});
      EXPECT_TRUE(res.solution.converged);
      const auto o = grid_search(p, grid);
      EXPECT_LT(rel_diff(res.solution.r, o.objective_watt), 1e-3) << seed << " " << dbm;
    }
  }
}

TEST(Solve, TwoDevicesMatchTheMeshOracle) {
  GridSpec grid;
  grid.power_points = 4000;
  grid.rho_points = 4000;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto p = default_problem(seed, 46.0, 0.15, 2, 3);
    const auto res = solve(p, SolverConfig{});
    const auto o = grid_search(p, grid);
    EXPECT_LT(rel_diff(res.solution.r, o.objective_watt), 1e-3) << seed;
    // the mesh minimum can only sit above the continuous one
    EXPECT_LE(res.solution.r, o.objective_watt + 1e-9 * std::abs(o.objective_watt)) << seed;
  }
}

class DefaultInstances : public ::testing::TestWithParam<std::tuple<std::uint64_t, double>> {};

TEST_P(DefaultInstances, CertifiedFeasibleAndStationary) {
  const auto [seed, dbm] = GetParam();
  const auto p = default_problem(seed, dbm);
  const auto res = solve(p, SolverConfig{});
  const auto& sol = res.solution;
  ASSERT_TRUE(sol.converged) << res.refine_status;

  double total = 0.0;
  for (int s = 0; s < 12; ++s) {
    EXPECT_GE(sol.allocation.p_tilde[s], 0.0);
    if (p.device_of[s] < 0) EXPECT_EQ(sol.allocation.p_tilde[s], 0.0);
    total += sol.allocation.p_tilde[s];
  }
  EXPECT_LE(total, p.total_power * (1 + 1e-9));
  for (double r : sol.allocation.rho) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
  const auto fresh = evaluate(p, sol.allocation);
  EXPECT_NEAR(fresh.r, sol.r, 1e-12 * std::abs(sol.r));

  const auto k = kkt_report(p, sol, res.duals);
  EXPECT_LT(k.max_power_stationarity, 1e-4);
  EXPECT_LT(k.max_rho_stationarity, 1e-4);
  EXPECT_LT(k.max_comp_slackness, 1e-4);
  EXPECT_LT(k.max_t_residual_db, 1e-12);
  EXPECT_LT(k.t_identity_mismatch, 1e-9);
  EXPECT_LT(k.simplex_residual, 1e-9);
  EXPECT_GE(k.min_multiplier, 0.0);

  const auto fca = solve_fca_iot(p, SolverConfig{});
  EXPECT_LE(sol.r, fca.solution.r + 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Grid, DefaultInstances,
                         ::testing::Combine(::testing::Values<std::uint64_t>(1, 2, 3, 4, 5),
                                            ::testing::Values(36.0, 44.0, 50.0)));

TEST(Solve, HarvestingGrowsWithBudget) {
  double low = 0.0, high = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    low += solve(default_problem(seed, 36.0), SolverConfig{}).solution.optimal_rho / 10;
    high += solve(default_problem(seed, 50.0), SolverConfig{}).solution.optimal_rho / 10;
  }
  EXPECT_LT(low, 0.05);
  EXPECT_GT(high, low);
}

TEST(Solve, FixedRhoRestrictionHolds) {
  const auto p = default_problem(2, 48.0);
  Restriction r;
  r.fixed_rho = 0.0;
  for (double rho : solve(p, SolverConfig{}, r).solution.allocation.rho) EXPECT_EQ(rho, 0.0);
  r.fixed_rho = 1.5;
  EXPECT_THROW(solve(p, SolverConfig{}, r), ConfigError);
}

TEST(Solve, ZeroBudgetLeavesEveryoneAtTheCeiling) {
  const auto p = default_problem(1, 40.0, 0.15, 3, 4);
  auto zero = make_problem(p.realization, p.assignment, 0.15, CodeParams{}, 0.0);
  const auto sol = solve(zero, SolverConfig{}).solution;
  const CodeParams code;
  double worst = 0.0;
  for (double u0 : zero.coeffs.U0) worst = std::max(worst, u0 * std::pow(10.0, (code.t_ceiling() - 1e-6) / 10.0));
  EXPECT_NEAR(sol.r, worst, 1e-9 * worst);
}

TEST(Solve, TraceIsRecordedOnRequest) {
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto res = solve(default_problem(1, 44.0), cfg);
  ASSERT_FALSE(res.trace.empty());
  for (const auto& t : res.trace) EXPECT_TRUE(std::isfinite(t.r_watt));
  EXPECT_TRUE(solve(default_problem(1, 44.0), SolverConfig{}).trace.empty());
}

}  // namespace
}  // namespace facet
