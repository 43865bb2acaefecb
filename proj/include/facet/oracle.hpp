#pragma once

// Brute-force ground truth for stage two on tiny instances (L <= 2, S <= 3).
//
// Two exact reductions keep the mesh small. Every p_s lowers every device's net power
// (less uplink power, more harvest), so an optimum spends the whole budget: with two
// assigned subcarriers the power mesh is the segment p1 + p2 = P_total. For fixed powers
// each device's net power depends on its own rho only, so the max over devices of the
// per-device minimum over the rho mesh is the exact mesh minimum. t is tightened at every
// mesh point. The oracle shares no code with the solver's update formulas.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "facet/solver.hpp"

namespace facet {

struct GridSpec {
  int power_points = 500;  // mesh over [0, P_total] for the first assigned subcarrier
  int rho_points = 500;    // mesh over [0, 1]
  std::int64_t max_evaluations = 100'000'000;
  int threads = 0;         // 0 picks the hardware concurrency

  bool operator==(const GridSpec&) const = default;
};

/// Every violated invariant; empty when valid.
std::vector<std::string> validate(const GridSpec& grid);

struct OracleResult {
  double objective_watt = 0.0;
  Allocation argmin;
  std::vector<double> net_power;  // W, per device at the argmin
  GridSpec resolution;
  std::int64_t evaluations = 0;   // (power point, device, rho point) triples
};

/// Exhaustive mesh minimum of max_l net_l. Throws DomainError outside L <= 2, S <= 3 and
/// ConfigError when the mesh would exceed grid.max_evaluations (message carries the count).
OracleResult grid_search(const Problem& problem, const GridSpec& grid, double guard_db = 1e-6);

struct JointResult {
  Assignment assignment;  // best over all injective maps
  OracleResult oracle;
  std::vector<std::pair<Assignment, double>> per_assignment;  // enumeration order
};

/// Enumerates every assignment and grid-searches each. Ties go to the lexicographically
/// smallest assignment.
JointResult joint_exhaustive(const ChannelRealization& realization, double kappa, const CodeParams& code,
                             double total_power, const GridSpec& grid, double guard_db = 1e-6);

nlohmann::json to_json(const OracleResult& result);

}  // namespace facet
