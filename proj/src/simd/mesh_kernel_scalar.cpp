#include <algorithm>
#include <cmath>
#include <numbers>

#include "facet/simd/mesh_kernel.hpp"

namespace facet::simd {

MeshMin mesh_min_scalar(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                        const double* log1m, int n) {
  MeshMin best;
  for (int j = 0; j < n; ++j) {
    const double x = a_db + log1m[j];
    const double t = std::clamp(law.u0 + 1.0 / (std::exp(law.u1 + law.u2 * x) + law.u3), law.t_lo, law.t_hi);
    const double v = u0_coeff * std::exp(t * (std::numbers::ln10 / 10.0)) - rho[j] * harvest;
    if (best.index < 0 || v < best.value) best = {v, j};
  }
  return best;
}

}  // namespace facet::simd
