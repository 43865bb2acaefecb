#pragma once

// Inner loop of the brute-force oracle: for one device at one downlink power point, the
// smallest net power over a mesh of splitting ratios,
//
//   min_j  U0 * 10^{t(a + d_j) / 10} - rho_j * k_h,     d_j = 10 log10(1 - rho_j),
//
// with t the guarded feedback-code law and a = 10 log10(p_own U2) the feedback SNR at
// rho = 0. The scalar kernel is the reference; the AVX2 kernel must agree with it to
// rounding. Ties go to the smallest index.

#include <string>

namespace facet::simd {

struct LawConstants {
  double u0 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double u3 = 0.0;
  double t_lo = 0.0;  // guarded clamp
  double t_hi = 0.0;
};

struct MeshMin {
  double value = 0.0;
  int index = -1;
};

/// rho and log1m hold n entries; log1m[j] = 10 log10(1 - rho[j]) (-inf at rho = 1).
MeshMin mesh_min_scalar(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                        const double* log1m, int n);

/// Same contract; requires AVX2 and FMA. Throws std::logic_error when not compiled in.
MeshMin mesh_min_avx2(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                      const double* log1m, int n);

enum class Kernel { scalar, avx2 };

std::string to_string(Kernel kernel);

/// True when the AVX2 kernel was compiled in and the CPU supports AVX2 and FMA.
bool avx2_available();

/// Kernel picked at first use: AVX2 when available unless FACET_SIMD=scalar is set.
Kernel active_kernel();

/// Calls the active kernel.
MeshMin mesh_min(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                 const double* log1m, int n);

}  // namespace facet::simd
