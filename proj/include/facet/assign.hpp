#pragma once

// Stage one: exclusive one-to-one subcarrier assignment maximising total channel gain.

#include <optional>
#include <string>
#include <vector>

#include "facet/matrix.hpp"
#include "facet/scene.hpp"

namespace facet {

/// subcarrier_of[l] is the 0-based subcarrier serving device l. Serialized 1-based.
struct Assignment {
  std::vector<int> subcarrier_of;
  int num_subcarriers = 0;

  int num_devices() const { return static_cast<int>(subcarrier_of.size()); }
  /// Inverse map, -1 for unassigned subcarriers.
  std::vector<int> device_of() const;

  bool operator==(const Assignment&) const = default;
};

/// S x L matrix of downlink gains, entry (s, l) = realization.downlink_gain(s, l).
Matrix gain_matrix(const ChannelRealization& realization);

/// Sum of matrix(subcarrier_of[l], l), accumulated in device order.
double total_weight(const Matrix& matrix, const Assignment& assignment);

/// Maximum-weight assignment (Hungarian method on a zero-padded square cost matrix).
/// Among optimal assignments the lexicographically smallest subcarrier_of is returned.
/// Throws InfeasibleError when S < L and DomainError on non-finite or negative entries.
Assignment hungarian_max(const Matrix& matrix);

/// Exhaustive maximum over all injective maps; same tie-break as hungarian_max.
/// Refuses L > 8.
Assignment brute_force_max(const Matrix& matrix);

/// Returns an error message for duplicate or out-of-range subcarriers, nothing if valid.
std::optional<std::string> validate_assignment(const Assignment& assignment);

}  // namespace facet
