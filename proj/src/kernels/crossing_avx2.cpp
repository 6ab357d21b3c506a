#include <immintrin.h>

#include "flexilab/kernels/crossing.hpp"

namespace flexilab::kernels {

// Four rays per lane group; same operation order as the scalar kernel.
bool crossings_avx2(const TriangleSoup& t, const RayBatch& rays, int* winding,
                    unsigned char* degenerate) {
  detail::Prepared p;
  if (!detail::prepare(t, rays.dir, p)) return false;
  const std::size_t n = t.size();
  const __m256d dx = _mm256_set1_pd(rays.dir[0]);
  const __m256d dy = _mm256_set1_pd(rays.dir[1]);
  const __m256d dz = _mm256_set1_pd(rays.dir[2]);
  const __m256d eps = _mm256_set1_pd(kCrossingEps);
  const __m256d neps = _mm256_set1_pd(-kCrossingEps);
  const __m256d lo = _mm256_set1_pd(1.0 - kCrossingEps);
  const __m256d hi = _mm256_set1_pd(1.0 + kCrossingEps);

  std::size_t i = 0;
  for (; i + 4 <= rays.count; i += 4) {
    const __m256d ox = _mm256_loadu_pd(rays.ox + i);
    const __m256d oy = _mm256_loadu_pd(rays.oy + i);
    const __m256d oz = _mm256_loadu_pd(rays.oz + i);
    __m256d acc = _mm256_setzero_pd();
    __m256d deg = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n; ++k) {
      const __m256d tx = _mm256_sub_pd(ox, _mm256_set1_pd(t.v0x[k]));
      const __m256d ty = _mm256_sub_pd(oy, _mm256_set1_pd(t.v0y[k]));
      const __m256d tz = _mm256_sub_pd(oz, _mm256_set1_pd(t.v0z[k]));
      const __m256d inv = _mm256_set1_pd(p.inv[k]);
      const __m256d u = _mm256_mul_pd(
          _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, _mm256_set1_pd(p.px[k])),
                                      _mm256_mul_pd(ty, _mm256_set1_pd(p.py[k]))),
                        _mm256_mul_pd(tz, _mm256_set1_pd(p.pz[k]))),
          inv);
      const __m256d e1x = _mm256_set1_pd(t.e1x[k]);
      const __m256d e1y = _mm256_set1_pd(t.e1y[k]);
      const __m256d e1z = _mm256_set1_pd(t.e1z[k]);
      const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
      const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
      const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
      const __m256d v = _mm256_mul_pd(
          _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)),
                        _mm256_mul_pd(dz, qz)),
          inv);
      const __m256d s = _mm256_mul_pd(
          _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(t.e2x[k]), qx),
                                      _mm256_mul_pd(_mm256_set1_pd(t.e2y[k]), qy)),
                        _mm256_mul_pd(_mm256_set1_pd(t.e2z[k]), qz)),
          inv);
      const __m256d uv = _mm256_add_pd(u, v);
      const __m256d tol = _mm256_set1_pd(p.tol[k]);
      const __m256d strict = _mm256_and_pd(
          _mm256_and_pd(_mm256_cmp_pd(u, eps, _CMP_GT_OQ), _mm256_cmp_pd(v, eps, _CMP_GT_OQ)),
          _mm256_and_pd(_mm256_cmp_pd(uv, lo, _CMP_LT_OQ), _mm256_cmp_pd(s, tol, _CMP_GT_OQ)));
      const __m256d near = _mm256_and_pd(
          _mm256_and_pd(_mm256_cmp_pd(u, neps, _CMP_GT_OQ), _mm256_cmp_pd(v, neps, _CMP_GT_OQ)),
          _mm256_and_pd(_mm256_cmp_pd(uv, hi, _CMP_LT_OQ),
                        _mm256_cmp_pd(s, _mm256_sub_pd(_mm256_setzero_pd(), tol), _CMP_GT_OQ)));
      acc = _mm256_add_pd(acc, _mm256_and_pd(strict, _mm256_set1_pd(p.sign[k])));
      deg = _mm256_or_pd(deg, _mm256_andnot_pd(strict, near));
    }
    alignas(32) double w[4];
    _mm256_store_pd(w, acc);
    const int mask = _mm256_movemask_pd(deg);
    for (int l = 0; l < 4; ++l) {
      winding[i + l] = static_cast<int>(w[l]);
      degenerate[i + l] = static_cast<unsigned char>((mask >> l) & 1);
    }
  }
  for (; i < rays.count; ++i) {
    detail::ray_scalar(t, p, rays.dir, rays.ox[i], rays.oy[i], rays.oz[i], winding[i], degenerate[i]);
  }
  return true;
}

}  // namespace flexilab::kernels
