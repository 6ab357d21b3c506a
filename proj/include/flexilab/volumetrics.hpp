#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flexilab/flexfamily.hpp"
#include "flexilab/geomkit.hpp"

namespace flexilab {

// Sum over oriented facets of det(x_1, ..., x_n) / n!.
double generalized_volume_euclidean(const Polyhedron& p);

// Winding number of an oriented triangulated surface in R^3 around x, by a
// signed ray count. Throws OnSurfaceError or RetryExhaustedError.
int winding_number(const Polyhedron& p, const Vec& x, std::uint64_t seed = 0);

// Characteristic function lambda_{P,y}(x) on S^3: signed crossings of the
// geodesic from x to y. Degenerate geodesics are replaced by a detour
// through a random point.
int winding_number_sphere(const Polyhedron& p, const Vec& x, const Vec& y, std::uint64_t seed = 0);

// (-1, 0, 0, 0) unless it lies within 1e-6 of the image of P, then a
// seeded random point far enough from it.
Vec default_base_point(const Polyhedron& p, std::uint64_t seed = 0);

// Reduces a spherical volume to (-sigma_n / 2, sigma_n / 2].
double spherical_representative(double volume, int n);

struct MonteCarloEstimate {
  double estimate = 0;
  double std_error = 0;
  long long samples = 0;
  int retries = 0;
  Vec base_point;  // spherical only
};

// Euclidean: mean winding number over the bounding box (padded 10%).
// Spherical: sigma_3 * mean of lambda_{P,y} over uniform points of S^3.
// Deterministic for a fixed seed regardless of FLEXILAB_THREADS.
MonteCarloEstimate monte_carlo_volume(const Polyhedron& p, long long samples, std::uint64_t seed,
                                      std::optional<Vec> base_point = std::nullopt);

// Threads used by Monte Carlo sampling (FLEXILAB_THREADS caps it).
int worker_threads();

struct SchlafliResult {
  double delta = 0;                // Richardson-refined total
  double trapezoid = 0;
  std::vector<double> step_terms;  // sum_F V_F * delta alpha_F per step
  std::vector<double> max_abs_piece;  // max_F |V_F * delta alpha_F| per step
  std::vector<double> cumulative;  // running volume change, starts at 0
  double max_angle_step = 0;
};

// Volume change along a sampled path in S^n (+1/(n-1)) or H^n (-1/(n-1)).
// Throws CoarsePathError when some angle moves by 0.05 rad or more per step.
SchlafliResult schlafli_variation(const std::vector<Polyhedron>& samples);

struct SphericalPolygon {
  Mat points;   // rows on the equatorial sphere x0 = 0 of S^3
  double area = 0;
};

// Quadrilateral v0 v1 v2 v3 with sides l1..l4 (v0v1, v1v2, v2v3, v3v0) and
// diagonal d = |v0 v2|. Throws NotRealizableError.
SphericalPolygon spherical_flexible_quadrilateral(const Vec& sides, double diagonal);

// Feasible open interval of the diagonal.
std::pair<double, double> quadrilateral_diagonal_range(const Vec& sides);

// Bipyramid over a polygon on the equatorial sphere with apexes (+-1, 0, 0, 0).
Polyhedron suspension_s3(const Mat& base);

// Suspension over the flexing quadrilateral, parametrized by the diagonal.
FlexFamily bipyramid_family(const Vec& sides, double lower, double upper);

enum class VolumeMethod { ConeSum, SchlafliDelta, MonteCarlo };

std::string to_string(VolumeMethod m);
VolumeMethod volume_method_from_string(const std::string& s);

struct VolumeReport {
  VolumeMethod method = VolumeMethod::ConeSum;
  std::vector<double> sweep;
  std::vector<double> volumes;
  std::vector<double> std_errors;  // Monte Carlo only
  std::vector<double> edge_dev;
  double max_deviation = 0;        // max |V - V_0|
  double tolerance = 0;            // threshold the verdict used
  bool constant = true;
};

struct ReportOptions {
  long long samples = 200000;      // Monte Carlo per sweep point
  std::uint64_t seed = 1;
  double tolerance = 0;            // 0: method default
};

// Cone-sum verdict: max |V - V_0| < tol * (1 + |V_0|), tol = 1e-8.
// Schlafli verdict: max |cumulative| < tol, tol = 1e-6.
// Monte Carlo verdict: every |V - V_0| (mod sigma_n on spheres) below
// 5 pooled standard errors.
VolumeReport bellows_report(const FlexFamily& family, const std::vector<double>& sweep,
                            VolumeMethod method, const ReportOptions& options = {});

}  // namespace flexilab
