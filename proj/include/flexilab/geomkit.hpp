#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "flexilab/complexes.hpp"

namespace flexilab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Relative eigenvalue / singular value threshold below which a value counts as zero.
inline constexpr double kRankTolerance = 1e-9;

enum class Geometry { Euclidean, Sphere, Hyperbolic };

// R^n, the unit sphere S^n in R^{n+1}, or the upper sheet of the hyperboloid
// <x,x> = 1 in R^{1,n} with <x,y> = x0 y0 - x1 y1 - ... - xn yn.
class ModelSpace {
 public:
  static ModelSpace euclidean(int n) { return {Geometry::Euclidean, n}; }
  static ModelSpace sphere(int n) { return {Geometry::Sphere, n}; }
  static ModelSpace hyperbolic(int n) { return {Geometry::Hyperbolic, n}; }

  Geometry kind() const { return kind_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return kind_ == Geometry::Euclidean ? dim_ : dim_ + 1; }
  bool is_euclidean() const { return kind_ == Geometry::Euclidean; }

  // Ambient bilinear form: dot product for R^n and S^n, Lorentz form for H^n.
  double inner(const Vec& x, const Vec& y) const;
  // Positive-definite metric on tangent vectors (negated Lorentz form for H^n).
  double tangent_inner(const Vec& x, const Vec& y) const;
  // cos t on the sphere, cosh t in hyperbolic space.
  double c(double t) const;
  // Inverse of c, clamped to the admissible range.
  double c_inverse(double value) const;
  bool on_model(const Vec& x, double tol = 1e-10) const;

  // Total volume of the unit sphere S^n.
  static double sphere_volume(int n);
  std::string name() const;

 private:
  ModelSpace(Geometry kind, int dim) : kind_(kind), dim_(dim) {}
  Geometry kind_;
  int dim_;
};

// A vertex placement of an oriented pseudo-manifold in a model space.
struct Polyhedron {
  std::shared_ptr<const PseudoManifold> complex;
  ModelSpace space = ModelSpace::euclidean(3);
  Mat coords;  // vertex_count x ambient_dim, one row per vertex

  Vec point(int v) const { return coords.row(v).transpose(); }
  // Rows of the given vertices, in order.
  Mat points(const Simplex& s) const;
};

// Geodesic distance; throws OffModelError for points off the model surface.
double distance(const ModelSpace& space, const Vec& x, const Vec& y);

// Edge lengths of P in K's edge order.
Vec edge_lengths(const Polyhedron& p);

// Bordered Cayley-Menger determinant of a p x p matrix of squared distances.
double cayley_menger_det(const Mat& squared_distances);

// Canonical realization of a simplex from its (p x p) edge-length matrix:
// vertex 0 at the anchor (origin or e0) and vertex j in the span of the first
// j coordinate directions with a positive j-th coordinate. Rows are points.
Mat realize_simplex_from_lengths(const Mat& lengths, const ModelSpace& space);

// A hyperplane (n-1)-simplex a_1..a_n in R^n with its altitudes, interior
// facet normals (inside the hyperplane) and hyperplane normal m.
struct SimplexFrame {
  Mat vertices;    // n x n, rows a_i
  Vec altitudes;   // a_i, from vertex i to the opposite facet
  Mat normals;     // n x n, rows n_i (interior unit normals to facet i)
  Vec m;           // unit normal of the hyperplane
  Mat gram;        // g_ij = <n_i, n_j>

  int n() const { return static_cast<int>(vertices.rows()); }
};

// m is oriented so that (a_2 - a_1, ..., a_n - a_1, m) is a positive frame.
SimplexFrame simplex_frame(const Mat& vertices);

// Realizes a normal Gram matrix (PSD, rank n-1, unit diagonal, one-signed
// kernel). Scale is fixed by min altitude = 1.
SimplexFrame realize_from_normal_gram(const Mat& gram);

// Linear functional on ambient vectors that vanishes on the oriented facet's
// span and is positive on its outward side.
double facet_side(const ModelSpace& space, const Mat& facet_vertices, const Vec& w);

// Interior dihedral angle in (0, 2 pi) at a ridge, on the side selected by the
// facet orientations. Throws DegenerateFacetError.
double dihedral_angle(const Polyhedron& p, int ridge_index);
double dihedral_angle(const Polyhedron& p, const Simplex& ridge);

// Normalized combination sum(beta_i v_i) / sqrt(<.,.>) on S^n or H^n.
Vec pseudo_linear_point(const ModelSpace& space, const Mat& vertices, const Vec& beta);

// (k)-dimensional measure of a k-simplex (rows = k+1 points). Non-Euclidean
// spaces support k <= 2 (length or triangle area via angle excess/defect).
double simplex_measure(const ModelSpace& space, const Mat& vertices);

}  // namespace flexilab
