#pragma once

#include <cstddef>
#include <vector>

namespace flexilab::kernels {

// Triangles in structure-of-arrays form: corner v0, edges e1 = v1 - v0 and
// e2 = v2 - v0, and a length scale for the on-surface tolerance.
struct TriangleSoup {
  std::vector<double> v0x, v0y, v0z;
  std::vector<double> e1x, e1y, e1z;
  std::vector<double> e2x, e2y, e2z;
  std::vector<double> scale;

  std::size_t size() const { return v0x.size(); }
  void add(const double* a, const double* b, const double* c);
};

// Rays with a common direction.
struct RayBatch {
  const double* ox = nullptr;
  const double* oy = nullptr;
  const double* oz = nullptr;
  std::size_t count = 0;
  double dir[3] = {0, 0, 1};
};

inline constexpr double kCrossingEps = 1e-9;

// Signed crossing counts of each ray with the oriented triangles (+1 when the
// ray leaves through the outward side). degenerate[i] is set when ray i
// passes within tolerance of a triangle boundary or starts on one. Returns
// false when some triangle is parallel to the direction; outputs are then
// unspecified.
bool crossings_scalar(const TriangleSoup& tris, const RayBatch& rays, int* winding,
                      unsigned char* degenerate);
bool crossings_avx2(const TriangleSoup& tris, const RayBatch& rays, int* winding,
                    unsigned char* degenerate);

// Runtime dispatch: AVX2 when the CPU supports it and FLEXILAB_SIMD != "off".
bool crossings(const TriangleSoup& tris, const RayBatch& rays, int* winding,
               unsigned char* degenerate);
bool avx2_compiled();
bool avx2_supported();
const char* active_kernel();

namespace detail {

// Per-triangle quantities that depend only on the direction.
struct Prepared {
  std::vector<double> px, py, pz, inv, sign, tol;
};

bool prepare(const TriangleSoup& tris, const double* dir, Prepared& out);

// Compiled without vector flags so the tail path is safe on any CPU.
void ray_scalar(const TriangleSoup& t, const Prepared& p, const double* dir, double ox, double oy,
                double oz, int& winding, unsigned char& degenerate);

}  // namespace detail

}  // namespace flexilab::kernels
