#pragma once

// Seed-averaged sweeps over total feedback power and harvesting efficiency, CSV output and
// the side-by-side scheme table.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "facet/baselines.hpp"
#include "facet/fbcode.hpp"
#include "facet/scene.hpp"
#include "facet/solver.hpp"

namespace facet {

/// Scheme names accepted in a sweep, in canonical order.
const std::vector<std::string>& known_schemes();

struct OutputPaths {
  std::string csv = "sweep.csv";
  std::string trials;  // JSON-lines dump of every trial; empty disables it
  bool operator==(const OutputPaths&) const = default;
};

/// Random tiny instances compared against the mesh oracle (`oracle` verb).
struct OracleSuiteConfig {
  int instances = 50;
  int power_points = 4000;
  int rho_points = 4000;
  std::uint64_t seed = 1;
  double tolerance = 1e-3;  // relative objective error
  bool operator==(const OracleSuiteConfig&) const = default;
};

struct SweepConfig {
  // total_feedback_power and harvest_efficiency are replaced by the grid values;
  // trial i draws its channels with seed scenario.seed + i.
  ScenarioConfig scenario;
  CodeParams code;
  SolverConfig solver;
  std::map<std::string, BaselineSpec> baselines;  // polar_wpt / turbo_wpt overrides
  std::vector<double> p_total_grid_dbm;
  std::vector<double> kappa_grid;
  std::vector<std::string> schemes;
  int num_seeds = 1;
  int threads = 0;  // 0: hardware concurrency
  OutputPaths output;
  OracleSuiteConfig oracle;

  bool operator==(const SweepConfig&) const = default;
};

/// Every violated invariant; empty when valid.
std::vector<std::string> validate(const SweepConfig& config);

/// Baseline spec used for a forward scheme, honouring the config overrides.
BaselineSpec scheme_spec(const SweepConfig& config, const std::string& scheme);

struct TrialRecord {
  std::string scheme;
  double p_total_dbm = 0.0;
  double kappa = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double r_watt = 0.0;
  double optimal_rho = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  std::string status;  // empty, refinement failure reason, or error text
};

struct SweepCell {
  std::string scheme;
  double p_total_dbm = 0.0;
  double kappa = 0.0;
  int trials = 0;
  int converged = 0;  // contributes to the means
  int failed = 0;     // infeasible output or solver error
  double net_w_mean = 0.0;
  double net_w_std = 0.0;    // sample standard deviation, 0 for a single trial
  double net_dbm_mean = 0.0; // dBm of net_w_mean; NaN when that mean is not positive
  double mean_rho = 0.0;
  double mean_iters = 0.0;
  double converged_frac = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;     // sorted by (scheme, p_total_dbm, kappa)
  std::vector<TrialRecord> trials;  // sorted the same way, then by trial
};

/// Runs every (trial, P_total, kappa) job on a bounded pool; the result does not depend
/// on the thread count. threads <= 0 uses config.threads, then hardware concurrency.
SweepResult run_sweep(const SweepConfig& config, int threads = 0);

/// Means over the converged trials of one cell, summed in trial order.
SweepCell aggregate(const std::vector<TrialRecord>& trials);

std::string csv_header();
std::string to_csv(const SweepResult& result);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const SweepResult& result, const std::string& path);

/// One JSON object per line.
std::string trials_jsonl(const SweepResult& result);
void emit_trials(const SweepResult& result, const std::string& path);
/// Reads a dump back (used to recompute aggregates).
std::vector<TrialRecord> parse_trials_jsonl(const std::string& text);

/// (from - to) / from in percent.
double percent_reduction(double from, double to);

/// Table of one (P_total, kappa) cell. Throws ConfigError listing the available cells
/// when the requested one is missing.
std::string compare_schemes(const SweepResult& result, double p_total_dbm, double kappa);

struct OracleCheck {
  int index = 0;
  int num_devices = 0;
  int num_subcarriers = 0;
  double p_total_dbm = 0.0;
  double solver_watt = 0.0;
  double oracle_watt = 0.0;
  double rel_error = 0.0;
  bool converged = false;
  double seconds = 0.0;
};

struct OracleSuiteReport {
  std::vector<OracleCheck> checks;
  double worst_rel_error = 0.0;
  bool passed = false;
};

/// Random instances with L in {1,2}, S in {L..3}, P_total uniform in [36, 50] dBm and
/// kappa = scenario.harvest_efficiency, each solved and grid-searched.
OracleSuiteReport run_oracle_suite(const SweepConfig& config);

}  // namespace facet
