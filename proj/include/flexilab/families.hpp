#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "flexilab/confspace.hpp"
#include "flexilab/elliptica.hpp"
#include "flexilab/flexfamily.hpp"
#include "flexilab/geomkit.hpp"

namespace flexilab {

struct RationalFlexSpec {
  SimplexFrame frame;
  Vec lambda;
};

struct EllipticFlexSpec {
  double k = 0.5;
  Vec sigma;
  Vec lambda;
};

// Throws SpecError unless every lambda is nonzero and lambda_i != +-lambda_j.
void validate_lambda(const Vec& lambda);
void validate(const RationalFlexSpec& spec);
void validate(const EllipticFlexSpec& spec);

// Shared cross-polytope complex K^{n-1}; one instance per n.
std::shared_ptr<const PseudoManifold> shared_cross_polytope(int n);

// Cross-polytope placement with rows a_1..a_n (frame vertices) then b_1..b_n.
Polyhedron rational_family_eval(const RationalFlexSpec& spec, double u);

// Normal Gram matrix of the elliptic family. Throws PhaseCollisionError when
// two phases agree modulo K(k).
Mat elliptic_gram(const EllipticFlexSpec& spec);

// Frame realized from elliptic_gram. Throws GramRealizationError.
SimplexFrame elliptic_frame(const EllipticFlexSpec& spec);

Polyhedron elliptic_family_eval(const EllipticFlexSpec& spec, const SimplexFrame& frame, double u);
Polyhedron elliptic_family_eval(const EllipticFlexSpec& spec, double u);

FlexFamily make_rational_family(const RationalFlexSpec& spec, double lower = -3.0,
                                double upper = 3.0);
// Parameter interval [0, 4K(k)].
FlexFamily make_elliptic_family(const EllipticFlexSpec& spec);

// Random search for an admissible elliptic spec: phases and all but the last
// lambda are sampled, the last lambda is solved from det G = 0, and the
// realizable candidate with the best-separated spectrum is returned.
std::optional<EllipticFlexSpec> search_elliptic_spec(int n, std::uint64_t seed, int candidates = 8,
                                                     int max_tries = 20000);

// Bricard octahedra. Type I and III are the n = 3 elliptic and rational
// families; type II is tracked from a plane-symmetric seed.
FlexFamily bricard_type_I(const EllipticFlexSpec& spec);
FlexFamily bricard_type_III(const RationalFlexSpec& spec);

struct SymmetricFlex {
  std::shared_ptr<const SymmetryReduction> reduction;
  std::shared_ptr<const TrackedPath> path;
  FlexFamily family;
};

// Tracks the flex of `seed` inside the subspace fixed by `phi`.
// Throws TrackingFailedError when the reduced kernel at the seed is not
// one-dimensional.
SymmetricFlex track_symmetric_flex(const Polyhedron& seed, const Involution& phi,
                                   const TrackOptions& options = {});

// Octahedron symmetric under the reflection of the canonical mirror: a_3, b_3
// on the mirror, a_i and b_i exchanged for i = 1, 2.
Polyhedron plane_symmetric_octahedron(std::uint64_t seed);
Involution plane_symmetry_of_octahedron();

// Octahedron symmetric under the canonical half-turn (R^3, S^3 or H^3), with
// b_i the image of a_i.
Polyhedron line_symmetric_octahedron(const ModelSpace& space, std::uint64_t seed);

SymmetricFlex bricard_type_II(const Polyhedron& seed, const TrackOptions& options = {});

// The ridges F_i = [a_1 .. a_n without a_i] of a cross-polytope.
std::vector<Simplex> cross_polytope_a_ridges(int n);

struct TangentProfile {
  std::vector<double> sweep;
  std::vector<Simplex> ridges;
  Mat values;               // samples x ridges, tan(alpha / 2)
  std::vector<bool> valid;  // false where a facet degenerates or alpha = pi
};

TangentProfile tangent_profile(const FlexFamily& family, const std::vector<Simplex>& ridges,
                               const std::vector<double>& sweep);

struct ProportionalityFit {
  bool inverse = false;   // t * u constant instead of t / u
  double constant = 0;
  double spread = 0;      // max relative deviation from the constant
};

// Per ridge column, picks the direct or inverse proportionality to u that is
// closer to constant. Samples with |u| < 1e-9 or invalid are skipped.
std::vector<ProportionalityFit> fit_proportional(const TangentProfile& profile);

struct BiquadraticFit {
  BiquadraticRelation relation;  // unit coefficient vector, sign fixed
  double residual = 0;           // smallest singular value / largest
};

// Least-squares biquadratic through (t, t') samples.
BiquadraticFit fit_biquadratic(const std::vector<double>& t, const std::vector<double>& tp);

// Distance from having a common perpendicular bisector of the diagonals
// [a_i b_i] of an octahedron in R^3, relative to the mean edge length.
double diagonal_bisector_deviation(const Polyhedron& p);

}  // namespace flexilab
