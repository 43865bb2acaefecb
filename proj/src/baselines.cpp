#include "facet/baselines.hpp"

#include <cmath>
#include <sstream>

#include "facet/error.hpp"

namespace facet {
namespace {

void require_valid(const BaselineSpec& spec) {
  const auto errs = validate(spec);
  if (errs.empty()) return;
  std::ostringstream msg;
  msg << "invalid baseline '" << spec.name << "':";
  for (const auto& e : errs) msg << "\n  " << e;
  throw ConfigError(msg.str());
}

}  // namespace

std::vector<std::string> validate(const BaselineSpec& spec) {
  std::vector<std::string> errs;
  const bool known = spec.name == "fca_iot" || spec.name == "polar_wpt" || spec.name == "turbo_wpt" ||
                     spec.name == "custom";
  if (!known) errs.push_back("name must be one of fca_iot, polar_wpt, turbo_wpt, custom");
  if (!(spec.fixed_rho >= 0.0 && spec.fixed_rho <= 1.0)) errs.push_back("fixed_rho must lie in [0, 1]");
  if (spec.forward_snr_threshold_db && !std::isfinite(*spec.forward_snr_threshold_db)) {
    errs.push_back("forward_snr_threshold_db must be finite");
  }
  if (spec.name == "fca_iot") {
    if (spec.forward_snr_threshold_db) errs.push_back("fca_iot carries no forward threshold");
    if (spec.fixed_rho != 0.0) errs.push_back("fca_iot fixes rho at 0");
  }
  if (spec.name == "polar_wpt" || spec.name == "turbo_wpt") {
    if (!spec.forward_snr_threshold_db) errs.push_back(spec.name + " needs a forward threshold");
    if (spec.fixed_rho != 1.0) errs.push_back(spec.name + " fixes rho at 1");
  }
  return errs;
}

std::map<std::string, double> forward_code_presets() { return {{"polar_wpt", 6.0}, {"turbo_wpt", 5.0}}; }

BaselineSpec baseline_spec(const std::string& name, const std::map<std::string, double>& thresholds) {
  if (name == "fca_iot") return {name, std::nullopt, 0.0};
  if (name == "polar_wpt" || name == "turbo_wpt") {
    auto it = thresholds.find(name);
    const double t = it != thresholds.end() ? it->second : forward_code_presets().at(name);
    BaselineSpec spec{name, t, 1.0};
    require_valid(spec);
    return spec;
  }
  throw ConfigError("no preset for baseline '" + name + "'");
}

SolveResult solve_fca_iot(const Problem& problem, const SolverConfig& config) {
  Restriction r;
  r.fixed_rho = 0.0;
  return solve(problem, config, r);
}

SolveResult solve_fixed_split_wpt(const Problem& problem, const BaselineSpec& spec, const SolverConfig& config) {
  require_valid(spec);
  if (!spec.is_forward()) throw ConfigError("baseline '" + spec.name + "' is not forward-coded");
  Restriction r;
  r.fixed_rho = spec.fixed_rho;
  r.fixed_t_db = spec.forward_snr_threshold_db;
  return solve(problem, config, r);
}

SolveResult solve_baseline(const Problem& problem, const BaselineSpec& spec, const SolverConfig& config) {
  require_valid(spec);
  if (spec.is_forward()) return solve_fixed_split_wpt(problem, spec, config);
  if (spec.name == "fca_iot") return solve_fca_iot(problem, config);
  Restriction r;
  r.fixed_rho = spec.fixed_rho;
  return solve(problem, config, r);
}

}  // namespace facet
