#include "facet/scene.hpp"

#include <cmath>
#include <sstream>

#include "facet/error.hpp"
#include "facet/rng.hpp"

namespace facet {

std::string to_string(FadingModel model) {
  switch (model) {
    case FadingModel::rayleigh_unit_variance:
      return "rayleigh_unit_variance";
    case FadingModel::fixed_unit_gain:
      return "fixed_unit_gain";
  }
  return "unknown";
}

FadingModel fading_model_from_string(const std::string& name) {
  if (name == "rayleigh_unit_variance") return FadingModel::rayleigh_unit_variance;
  if (name == "fixed_unit_gain") return FadingModel::fixed_unit_gain;
  throw ConfigError("fading_model: unknown value '" + name +
                    "' (expected rayleigh_unit_variance or fixed_unit_gain)");
}

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> errors;
  if (c.num_devices < 1) errors.emplace_back("num_devices: L >= 1 required");
  if (c.num_subcarriers < 1) errors.emplace_back("num_subcarriers: S >= 1 required");
  if (c.num_antennas < 1) errors.emplace_back("num_antennas: M >= 1 required");
  if (c.num_subcarriers < c.num_devices) errors.emplace_back("num_subcarriers: S ≥ L required");
  if (!(c.pathloss_exponent > 0.0) || !std::isfinite(c.pathloss_exponent)) {
    errors.emplace_back("pathloss_exponent: α > 0 required");
  }
  const auto [dmin, dmax] = c.distance_range;
  if (!(dmin > 0.0) || !(dmin <= dmax) || !std::isfinite(dmax)) {
    errors.emplace_back("distance_range: 0 < d_min ≤ d_max required");
  }
  if (!(c.uplink_noise > 0.0) || !std::isfinite(c.uplink_noise)) {
    errors.emplace_back("uplink_noise: σ² > 0 required");
  }
  if (!(c.downlink_noise > 0.0) || !std::isfinite(c.downlink_noise)) {
    errors.emplace_back("downlink_noise: σ̃² > 0 required");
  }
  if (!(c.total_feedback_power > 0.0) || !std::isfinite(c.total_feedback_power)) {
    errors.emplace_back("total_feedback_power: P_total > 0 required");
  }
  if (!(c.harvest_efficiency > 0.0 && c.harvest_efficiency < 1.0)) {
    errors.emplace_back("harvest_efficiency: κ ∈ (0,1) required");
  }
  return errors;
}

ChannelRealization generate(const ScenarioConfig& config) {
  if (const auto errors = validate(config); !errors.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario:";
    for (const auto& e : errors) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  const auto L = static_cast<std::size_t>(config.num_devices);
  const auto S = static_cast<std::size_t>(config.num_subcarriers);
  const int M = config.num_antennas;
  const bool fixed = config.fading_model == FadingModel::fixed_unit_gain;

  Rng rng(config.seed);
  ChannelRealization out;
  out.num_devices = config.num_devices;
  out.num_subcarriers = config.num_subcarriers;
  out.uplink_noise = config.uplink_noise;
  out.downlink_noise = config.downlink_noise;
  out.seed = config.seed;

  // Draw order is part of the reproducibility contract: distances, uplink, downlink.
  out.distances.resize(L);
  for (auto& d : out.distances) d = rng.uniform(config.distance_range[0], config.distance_range[1]);

  auto antenna_sum = [&] {
    if (fixed) return static_cast<double>(M);
    double acc = 0.0;
    for (int m = 0; m < M; ++m) acc += rng.complex_gaussian_power();
    return acc;
  };

  out.uplink_gain.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    out.uplink_gain[l] = std::pow(out.distances[l], -config.pathloss_exponent) * antenna_sum();
  }
  out.downlink_gain = Matrix(S, L);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t l = 0; l < L; ++l) {
      out.downlink_gain(s, l) = std::pow(out.distances[l], -config.pathloss_exponent) * antenna_sum();
    }
  }
  return out;
}

Coefficients coefficients(const ChannelRealization& realization, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw DomainError("coefficients: κ ∈ (0,1) required, got " + std::to_string(kappa));
  }
  const auto L = static_cast<std::size_t>(realization.num_devices);
  const auto S = static_cast<std::size_t>(realization.num_subcarriers);
  Coefficients c;
  c.kappa = kappa;
  c.U0.resize(L);
  for (std::size_t l = 0; l < L; ++l) c.U0[l] = realization.uplink_noise / realization.uplink_gain[l];
  c.U1 = Matrix(S, L);
  c.U2 = Matrix(S, L);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t l = 0; l < L; ++l) {
      const double g = realization.downlink_gain(s, l);
      c.U1(s, l) = kappa * g;
      c.U2(s, l) = g / realization.downlink_noise;
    }
  }
  return c;
}

}  // namespace facet
