#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flexilab/complexes.hpp"
#include "flexilab/flexfamily.hpp"
#include "flexilab/geomkit.hpp"

namespace flexilab {

// How one vertex coordinate depends on the unknowns: sign * x[variable] +
// constant (variable < 0 means the coordinate is the constant).
struct CoordinateLink {
  int variable = -1;
  double sign = 1.0;
  double constant = 0.0;
};

enum class EquationKind {
  Length,  // Euclidean |x_u - x_v|^2 = l^2, otherwise <x_u, x_v> = c(l)
  Norm     // <x_v, x_v> = 1
};

struct Equation {
  EquationKind kind = EquationKind::Length;
  int u = -1;
  int v = -1;
  int edge = -1;       // index into K's edges for Length equations
  double target = 0;   // l^2, c(l) or 1
};

struct Evaluation {
  Vec residual;
  Mat jacobian;  // equations x variables
};

// Quadratic edge-length variety with its variable layout. The same type
// serves the pinned full system and symmetry-reduced systems.
class ConstraintSystem {
 public:
  ConstraintSystem(ModelSpace space, std::shared_ptr<const PseudoManifold> complex, Vec lengths,
                   std::vector<CoordinateLink> links, int variable_count,
                   std::vector<Equation> equations);

  const ModelSpace& space() const { return space_; }
  const std::shared_ptr<const PseudoManifold>& complex() const { return complex_; }
  const Vec& lengths() const { return lengths_; }
  const std::vector<Equation>& equations() const { return equations_; }
  int variable_count() const { return variable_count_; }
  int equation_count() const { return static_cast<int>(equations_.size()); }
  const CoordinateLink& link(int vertex, int coord) const;

  // Vertex coordinates (one row per vertex) for an unknown vector.
  Mat lift(const Vec& x) const;
  Polyhedron polyhedron(const Vec& x) const;
  // Unknowns read back from vertex coordinates that already satisfy the
  // pinning/gauge constraints.
  Vec variables_from(const Mat& coords) const;

  Vec residual(const Vec& x) const;
  Evaluation evaluate(const Vec& x) const;

 private:
  ModelSpace space_;
  std::shared_ptr<const PseudoManifold> complex_;
  Vec lengths_;
  std::vector<CoordinateLink> links_;  // vertex-major, ambient_dim per vertex
  int variable_count_;
  std::vector<Equation> equations_;
};

// Full system with a pinned facet. Defaults: the lexicographically first
// facet (sorted vertex order) pinned at its canonical realization.
ConstraintSystem build_constraint_system(std::shared_ptr<const PseudoManifold> complex,
                                         const Vec& lengths, const ModelSpace& space,
                                         std::optional<Simplex> pinned = std::nullopt,
                                         std::optional<Mat> anchors = std::nullopt);

// Pinned facet chosen by build_constraint_system when none is given.
Simplex default_pinned_facet(const PseudoManifold& k);

// Residual of every edge equation of K evaluated on a full placement.
Vec edge_residual(const Polyhedron& p, const Vec& lengths);

struct RigidityReport {
  int kernel_dim = 0;
  double min_singular_value = 0;
  double max_singular_value = 0;
  Mat flex_basis;  // variables x kernel_dim
};

// Throws NotOnVarietyError when the residual exceeds 1e-8.
RigidityReport rigidity_test(const ConstraintSystem& system, const Vec& x);

struct TrackOptions {
  double step = 0.01;
  double min_step = 1e-6;
  double max_step = 0.1;
  int max_steps = 200;
  double corrector_tol = 1e-12;
  int max_corrector_iterations = 12;
  int direction = 1;      // sign of the first predictor step
  bool adaptive = true;   // false keeps `step` fixed (failures still halve)
};

struct TrackedPath {
  std::vector<Vec> points;
  std::vector<double> arclength;
  std::vector<double> residuals;      // infinity norms at accepted points
  std::vector<bool> degenerate;       // geometric non-degeneracy monitor flags
  int rejected_steps = 0;
};

// Predictor-corrector continuation along a one-dimensional flex.
TrackedPath track_flex(const ConstraintSystem& system, const Vec& start,
                       const TrackOptions& options = {});

// Projects a point onto the variety, keeping it on the hyperplane through
// `anchor` orthogonal to `tangent` when one is given. Throws
// CorrectorDivergenceError.
Vec correct(const ConstraintSystem& system, Vec x, const Vec* tangent, const Vec* anchor,
            double tol, int max_iterations);

// Tracked path as a family parametrized by arclength.
FlexFamily tracked_family(std::shared_ptr<const ConstraintSystem> system,
                          std::shared_ptr<const TrackedPath> path);

struct DegeneracyReport {
  double min_facet_ratio = 0;    // smallest facet measure / (mean edge)^(n-1)
  int flat_facets = 0;           // facets below 1e-8 of that scale
  bool decomposition_witness = false;
  bool degenerate() const { return flat_facets > 0 || decomposition_witness; }
};

// Flags near-flat facets and splittings of K into pieces meeting inside an
// (n-2)-plane.
DegeneracyReport check_nondegenerate(const Polyhedron& p);

struct SymmetryReduction {
  ConstraintSystem system;
  Involution involution;
  Vec isometry;                  // diagonal of the ambient symmetry
  std::vector<int> representatives;

  // Brings a symmetric placement into the gauge used by the reduced system.
  Mat canonicalize(const Mat& coords) const;
};

// Line symmetry: rotation by pi about the z-axis (R^3) or about the geodesic
// in the x0-x3 plane (S^3, H^3). Plane symmetry: reflection in z = 0 (R^3)
// or in x3 = 0. Throws SymmetryMismatchError.
SymmetryReduction symmetry_reduce(const ConstraintSystem& system, const Involution& phi);

}  // namespace flexilab
