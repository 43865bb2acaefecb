#pragma once

// Strict JSON for sweep configurations. Unknown and duplicate keys are rejected, numbers
// must have the right kind, and errors carry the line they refer to.
//
// Layout:
//   { "scenario": {...}, "code_params": {...}, "solver": {...},
//     "baselines": { "polar_wpt": {"forward_snr_threshold_db": 6, "fixed_rho": 1}, ... },
//     "p_total_grid_dbm": [...], "kappa_grid": [...], "schemes": [...], "num_seeds": n,
//     "threads": 0, "output": {"csv": "...", "trials": ""},
//     "oracle": {"instances": 50, "power_points": 4000, "rho_points": 4000, "seed": 1,
//                "tolerance": 1e-3} }
// scenario, p_total_grid_dbm, kappa_grid, schemes and num_seeds are required.

#include <string>

#include "facet/bench.hpp"
#include "json.hpp"

namespace facet {

nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const CodeParams& params);
nlohmann::json to_json(const SolverConfig& config);
nlohmann::json to_json(const BaselineSpec& spec);
nlohmann::json to_json(const SweepConfig& config);

/// Parses and validates. `source` names the document in error messages.
/// Throws ConfigError.
SweepConfig parse_sweep_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source = "<scenario>");

/// Reads the file; a missing file is a ConfigError as well.
SweepConfig load_config(const std::string& path);

/// Canonical text (two-space indent, trailing newline); parse(dump(c)) == c.
std::string dump_config(const SweepConfig& config);

}  // namespace facet
