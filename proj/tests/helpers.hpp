#pragma once

#include <cmath>
#include <vector>

#include "facet/assign.hpp"
#include "facet/scene.hpp"
#include "facet/solver.hpp"
#include "facet/units.hpp"

namespace facet::testing {

// Hand-built realization: downlink(s, l) from `down` (row per subcarrier), uplink gains per device.
inline ChannelRealization realization(const std::vector<std::vector<double>>& down, const std::vector<double>& up,
                                      double uplink_noise = 1e-9, double downlink_noise = 1e-4) {
  ChannelRealization r;
  r.num_subcarriers = static_cast<int>(down.size());
  r.num_devices = static_cast<int>(up.size());
  r.uplink_gain = up;
  r.downlink_gain = Matrix(down.size(), up.size());
  for (std::size_t s = 0; s < down.size(); ++s) {
    for (std::size_t l = 0; l < up.size(); ++l) r.downlink_gain(s, l) = down[s][l];
  }
  r.distances.assign(up.size(), 10.0);
  r.uplink_noise = uplink_noise;
  r.downlink_noise = downlink_noise;
  return r;
}

inline Assignment assignment(std::vector<int> subcarrier_of, int num_subcarriers) {
  Assignment a;
  a.subcarrier_of = std::move(subcarrier_of);
  a.num_subcarriers = num_subcarriers;
  return a;
}

/// Default scenario with a few overrides, Hungarian-assigned.
inline Problem default_problem(std::uint64_t seed, double p_dbm, double kappa = 0.15, int L = 10, int S = 12) {
  ScenarioConfig c;
  c.seed = seed;
  c.num_devices = L;
  c.num_subcarriers = S;
  const auto r = generate(c);
  return make_problem(r, hungarian_max(gain_matrix(r)), kappa, CodeParams{}, units::dbm_to_watt(p_dbm));
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace facet::testing
