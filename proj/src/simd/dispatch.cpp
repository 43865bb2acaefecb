#include <cstdlib>
#include <stdexcept>
#include <string>

#include "facet/simd/mesh_kernel.hpp"

namespace facet::simd {

#ifndef FACET_HAVE_AVX2_KERNEL
MeshMin mesh_min_avx2(const LawConstants&, double, double, double, const double*, const double*, int) {
  throw std::logic_error("AVX2 mesh kernel not compiled in");
}
#endif

std::string to_string(Kernel kernel) { return kernel == Kernel::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(FACET_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Kernel active_kernel() {
  static const Kernel k = [] {
    const char* env = std::getenv("FACET_SIMD");
    if (env && std::string(env) == "scalar") return Kernel::scalar;
    return avx2_available() ? Kernel::avx2 : Kernel::scalar;
  }();
  return k;
}

MeshMin mesh_min(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                 const double* log1m, int n) {
  if (active_kernel() == Kernel::avx2) return mesh_min_avx2(law, a_db, u0_coeff, harvest, rho, log1m, n);
  return mesh_min_scalar(law, a_db, u0_coeff, harvest, rho, log1m, n);
}

}  // namespace facet::simd
