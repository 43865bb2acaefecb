#pragma once

// Multi-device channel scenarios and the propagation coefficients used by the allocator.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "facet/matrix.hpp"

namespace facet {

enum class FadingModel { rayleigh_unit_variance, fixed_unit_gain };

std::string to_string(FadingModel model);
FadingModel fading_model_from_string(const std::string& name);

struct ScenarioConfig {
  int num_devices = 10;      // L
  int num_subcarriers = 12;  // S
  int num_antennas = 4;      // M
  double pathloss_exponent = 3.0;
  std::array<double, 2> distance_range{10.0, 100.0};  // metres
  double uplink_noise = 1e-9;    // W
  double downlink_noise = 1e-4;  // W
  double total_feedback_power = 100.0;  // W
  double harvest_efficiency = 0.15;     // kappa
  FadingModel fading_model = FadingModel::rayleigh_unit_variance;
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Every violated invariant, never just the first. Empty when valid.
std::vector<std::string> validate(const ScenarioConfig& config);

/// One Monte Carlo draw of all channels.
struct ChannelRealization {
  int num_devices = 0;
  int num_subcarriers = 0;
  std::vector<double> uplink_gain;  // d^-a * sum_m |h_m|^2, per device
  Matrix downlink_gain;             // S x L, d^-a * ||h_s||^2
  std::vector<double> distances;    // metres
  double uplink_noise = 0.0;
  double downlink_noise = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ChannelRealization&) const = default;
};

/// Draws distances uniformly in the configured range and per-antenna fading
/// (or unit gains), uplink and downlink independently. Throws ConfigError listing
/// every violated bound.
ChannelRealization generate(const ScenarioConfig& config);

struct Coefficients {
  std::vector<double> U0;  // W, uplink noise over uplink gain
  Matrix U1;               // S x L, kappa * downlink gain
  Matrix U2;               // S x L, per W, downlink gain over downlink noise
  double kappa = 0.0;
};

/// Throws DomainError unless kappa is in (0, 1).
Coefficients coefficients(const ChannelRealization& realization, double kappa);

}  // namespace facet
