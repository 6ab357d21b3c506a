#include <cstdlib>
#include <cstring>

#include "flexilab/kernels/crossing.hpp"

namespace flexilab::kernels {

#ifndef FLEXILAB_HAVE_AVX2
bool crossings_avx2(const TriangleSoup& tris, const RayBatch& rays, int* winding,
                    unsigned char* degenerate) {
  return crossings_scalar(tris, rays, winding, degenerate);
}
#endif

bool avx2_compiled() {
#ifdef FLEXILAB_HAVE_AVX2
  return true;
#else
  return false;
#endif
}

bool avx2_supported() {
#if defined(FLEXILAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported;
#else
  return false;
#endif
}

namespace {
bool use_avx2() {
  const char* env = std::getenv("FLEXILAB_SIMD");
  if (env && std::strcmp(env, "off") == 0) return false;
  return avx2_supported();
}
}  // namespace

const char* active_kernel() { return use_avx2() ? "avx2" : "scalar"; }

bool crossings(const TriangleSoup& tris, const RayBatch& rays, int* winding,
               unsigned char* degenerate) {
  if (use_avx2()) return crossings_avx2(tris, rays, winding, degenerate);
  return crossings_scalar(tris, rays, winding, degenerate);
}

}  // namespace flexilab::kernels
