#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <numbers>

#include "facet/simd/mesh_kernel.hpp"

namespace facet::simd {
namespace {

// exp(x) for x in [-708, 708]: x = n ln2 + r with |r| <= ln2 / 2, Taylor to r^13, then
// 2^n spliced into the exponent bits.
inline __m256d exp_pd(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(std::numbers::log2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // ln2 split so that n * kLn2Hi is exact.
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(0x1.62e42fefa39efp-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(0x1.abc9e3b39803fp-56), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  constexpr double kInvFact[] = {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
                                 1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
                                 1.0 / 24.0,        1.0 / 6.0,        0.5,             1.0,
                                 1.0};
  for (double c : kInvFact) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c));

  // n + 1.5 * 2^52 leaves n in the low mantissa bits.
  const __m256i bits = _mm256_castpd_si256(_mm256_add_pd(n, _mm256_set1_pd(0x1.8p52)));
  const __m256i biased = _mm256_sub_epi64(bits, _mm256_castpd_si256(_mm256_set1_pd(0x1.8p52)));
  const __m256i scale = _mm256_slli_epi64(_mm256_add_epi64(biased, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(scale));
}

}  // namespace

MeshMin mesh_min_avx2(const LawConstants& law, double a_db, double u0_coeff, double harvest, const double* rho,
                      const double* log1m, int n) {
  const __m256d va = _mm256_set1_pd(a_db);
  const __m256d u0 = _mm256_set1_pd(law.u0);
  const __m256d u1 = _mm256_set1_pd(law.u1);
  const __m256d u2 = _mm256_set1_pd(law.u2);
  const __m256d u3 = _mm256_set1_pd(law.u3);
  const __m256d lo = _mm256_set1_pd(law.t_lo);
  const __m256d hi = _mm256_set1_pd(law.t_hi);
  const __m256d coeff = _mm256_set1_pd(u0_coeff);
  const __m256d kh = _mm256_set1_pd(harvest);
  const __m256d db = _mm256_set1_pd(std::numbers::ln10 / 10.0);
  const __m256d one = _mm256_set1_pd(1.0);

  // Per-lane running minimum; lanes keep the first index reaching their minimum.
  __m256d best_v = _mm256_set1_pd(INFINITY);
  __m256d best_i = _mm256_set1_pd(-1.0);
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    // a + log1m is -inf at rho = 1; the clamp inside exp_pd maps it to the no-feedback limit.
    const __m256d x = _mm256_add_pd(va, _mm256_loadu_pd(log1m + j));
    const __m256d e = exp_pd(_mm256_fmadd_pd(u2, x, u1));
    __m256d t = _mm256_add_pd(u0, _mm256_div_pd(one, _mm256_add_pd(e, u3)));
    t = _mm256_min_pd(_mm256_max_pd(t, lo), hi);
    const __m256d v = _mm256_fnmadd_pd(_mm256_loadu_pd(rho + j), kh, _mm256_mul_pd(coeff, exp_pd(_mm256_mul_pd(t, db))));
    const __m256d lt = _mm256_cmp_pd(v, best_v, _CMP_LT_OQ);
    best_v = _mm256_blendv_pd(best_v, v, lt);
    best_i = _mm256_blendv_pd(best_i, idx, lt);
    idx = _mm256_add_pd(idx, four);
  }
  alignas(32) double lv[4];
  alignas(32) double li[4];
  _mm256_store_pd(lv, best_v);
  _mm256_store_pd(li, best_i);
  MeshMin best;
  for (int k = 0; k < 4; ++k) {
    if (li[k] < 0.0) continue;
    const int i = static_cast<int>(li[k]);
    if (best.index < 0 || lv[k] < best.value || (lv[k] == best.value && i < best.index)) best = {lv[k], i};
  }
  if (j < n) {
    const MeshMin tail = mesh_min_scalar(law, a_db, u0_coeff, harvest, rho + j, log1m + j, n - j);
    if (best.index < 0 || tail.value < best.value) best = {tail.value, tail.index + j};
  }
  return best;
}

}  // namespace facet::simd
