#pragma once

// Comparison schemes. All of them reuse the stage-two solver on a restricted feasible set:
//   fca_iot    feedback coding without harvesting (rho = 0)
//   polar_wpt  forward-coded uplink at a fixed SNR target, everything harvested (rho = 1)
//   turbo_wpt  same with the turbo target
//   custom     any fixed target and fixed split

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "facet/solver.hpp"

namespace facet {

struct BaselineSpec {
  std::string name;  // fca_iot, polar_wpt, turbo_wpt or custom
  std::optional<double> forward_snr_threshold_db;  // forward-coded schemes only
  double fixed_rho = 0.0;

  bool is_forward() const { return forward_snr_threshold_db.has_value(); }
  bool operator==(const BaselineSpec&) const = default;
};

/// Every violated invariant; empty when valid.
std::vector<std::string> validate(const BaselineSpec& spec);

/// Uplink SNR targets (dB) of the forward-coded schemes, keyed by scheme name.
/// These are calibration values, not measured code thresholds.
std::map<std::string, double> forward_code_presets();

/// Spec of a named scheme. Forward thresholds come from `thresholds` when present there,
/// else from the presets. Throws ConfigError for unknown names or "custom".
BaselineSpec baseline_spec(const std::string& name, const std::map<std::string, double>& thresholds = {});

/// FACET with rho frozen at 0: no harvesting, feedback-coded uplink.
SolveResult solve_fca_iot(const Problem& problem, const SolverConfig& config);

/// Fixed split and fixed uplink target: the remaining problem in p is a linear min-max.
/// Throws ConfigError unless spec is a valid forward scheme.
SolveResult solve_fixed_split_wpt(const Problem& problem, const BaselineSpec& spec, const SolverConfig& config);

/// Dispatches on spec: forward schemes to solve_fixed_split_wpt, fca_iot to solve_fca_iot.
SolveResult solve_baseline(const Problem& problem, const BaselineSpec& spec, const SolverConfig& config);

}  // namespace facet
