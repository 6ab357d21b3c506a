#include <cmath>

#include "flexilab/kernels/crossing.hpp"

namespace flexilab::kernels {

void TriangleSoup::add(const double* a, const double* b, const double* c) {
  v0x.push_back(a[0]);
  v0y.push_back(a[1]);
  v0z.push_back(a[2]);
  e1x.push_back(b[0] - a[0]);
  e1y.push_back(b[1] - a[1]);
  e1z.push_back(b[2] - a[2]);
  e2x.push_back(c[0] - a[0]);
  e2y.push_back(c[1] - a[1]);
  e2z.push_back(c[2] - a[2]);
  const double l1 = std::sqrt(e1x.back() * e1x.back() + e1y.back() * e1y.back() + e1z.back() * e1z.back());
  const double l2 = std::sqrt(e2x.back() * e2x.back() + e2y.back() * e2y.back() + e2z.back() * e2z.back());
  scale.push_back(l1 > l2 ? l1 : l2);
}

namespace detail {

bool prepare(const TriangleSoup& t, const double* dir, Prepared& out) {
  const std::size_t n = t.size();
  out.px.resize(n);
  out.py.resize(n);
  out.pz.resize(n);
  out.inv.resize(n);
  out.sign.resize(n);
  out.tol.resize(n);
  bool ok = true;
  for (std::size_t k = 0; k < n; ++k) {
    const double px = dir[1] * t.e2z[k] - dir[2] * t.e2y[k];
    const double py = dir[2] * t.e2x[k] - dir[0] * t.e2z[k];
    const double pz = dir[0] * t.e2y[k] - dir[1] * t.e2x[k];
    const double det = t.e1x[k] * px + t.e1y[k] * py + t.e1z[k] * pz;
    out.px[k] = px;
    out.py[k] = py;
    out.pz[k] = pz;
    // Parallel triangles would need the in-plane case; the caller redraws.
    if (!(std::abs(det) > 1e-12 * t.scale[k] * t.scale[k])) {
      ok = false;
      out.inv[k] = 0.0;
      out.sign[k] = 0.0;
    } else {
      out.inv[k] = 1.0 / det;
      out.sign[k] = det < 0 ? 1.0 : -1.0;
    }
    out.tol[k] = kCrossingEps * t.scale[k];
  }
  return ok;
}

void ray_scalar(const TriangleSoup& t, const Prepared& p, const double* dir, double ox,
                       double oy, double oz, int& winding, unsigned char& degenerate) {
  int w = 0;
  unsigned char deg = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double tx = ox - t.v0x[k];
    const double ty = oy - t.v0y[k];
    const double tz = oz - t.v0z[k];
    const double u = (tx * p.px[k] + ty * p.py[k] + tz * p.pz[k]) * p.inv[k];
    const double qx = ty * t.e1z[k] - tz * t.e1y[k];
    const double qy = tz * t.e1x[k] - tx * t.e1z[k];
    const double qz = tx * t.e1y[k] - ty * t.e1x[k];
    const double v = (dir[0] * qx + dir[1] * qy + dir[2] * qz) * p.inv[k];
    const double s = (t.e2x[k] * qx + t.e2y[k] * qy + t.e2z[k] * qz) * p.inv[k];
    const double uv = u + v;
    const bool strict = u > kCrossingEps && v > kCrossingEps && uv < 1.0 - kCrossingEps && s > p.tol[k];
    const bool near = u > -kCrossingEps && v > -kCrossingEps && uv < 1.0 + kCrossingEps && s > -p.tol[k];
    if (strict) {
      w += static_cast<int>(p.sign[k]);
    } else if (near) {
      deg = 1;
    }
  }
  winding = w;
  degenerate = deg;
}

}  // namespace detail

bool crossings_scalar(const TriangleSoup& tris, const RayBatch& rays, int* winding,
                      unsigned char* degenerate) {
  detail::Prepared p;
  if (!detail::prepare(tris, rays.dir, p)) return false;
  for (std::size_t i = 0; i < rays.count; ++i) {
    detail::ray_scalar(tris, p, rays.dir, rays.ox[i], rays.oy[i], rays.oz[i], winding[i],
                       degenerate[i]);
  }
  return true;
}

}  // namespace flexilab::kernels
