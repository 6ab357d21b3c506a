#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flexilab/complexes.hpp"
#include "flexilab/confspace.hpp"
#include "flexilab/families.hpp"
#include "flexilab/volumetrics.hpp"

namespace flexilab {

// Mesh file: {"dim", "vertices", "facets"} with optional "space",
// "coordinates" (one row per vertex, or an object keyed by name),
// "lengths" ({"u-v": value}) and "involution" ({"kind", "pairs"}).
struct MeshInput {
  std::shared_ptr<const PseudoManifold> complex;
  std::optional<ModelSpace> space;
  std::optional<Mat> coordinates;
  std::optional<Vec> lengths;   // in complex edge order
  std::optional<Involution> involution;

  // Placement; throws ValidationError when there are no coordinates.
  Polyhedron polyhedron(const ModelSpace& fallback) const;
  // Prescribed lengths, or lengths measured from the coordinates.
  Vec edge_lengths_or_measured(const ModelSpace& fallback) const;
};

struct FamilySpec {
  std::string kind;  // rational | elliptic | bipyramid
  std::optional<RationalFlexSpec> rational;
  std::optional<EllipticFlexSpec> elliptic;
  Vec sides;         // bipyramid
  double lower = 0;
  double upper = 0;
};

ModelSpace space_from_string(const std::string& name, int dim);

// Parse helpers. Throw ParseError (syntax, with line and column) or
// ValidationError (content, with the field path).
std::string read_text(const std::string& path);
MeshInput parse_mesh(const std::string& text, const std::string& origin = "<input>");
FamilySpec parse_family_spec(const std::string& text, const std::string& origin = "<input>");
MeshInput load_mesh(const std::string& path);
FamilySpec load_family_spec(const std::string& path);

FlexFamily make_family(const FamilySpec& spec);

std::string family_spec_to_json(const FamilySpec& spec);
std::string polyhedron_to_json(const Polyhedron& p);

// Trajectory export: samples of one family at parameters `sweep`.
std::string trajectory_to_json(const std::string& kind, const std::vector<double>& sweep,
                               const std::vector<Polyhedron>& samples);
std::string trajectory_to_csv(const std::vector<double>& sweep, const std::vector<Polyhedron>& samples,
                              const char* parameter = "u");
// Samples of a trajectory JSON with the complex and space it names.
std::vector<Polyhedron> parse_trajectory(const std::string& text, std::vector<double>* sweep = nullptr);

std::string path_to_csv(const ConstraintSystem& system, const TrackedPath& path);
std::string path_to_json(const ConstraintSystem& system, const TrackedPath& path);

std::string report_to_json(const VolumeReport& report);
std::string report_to_csv(const VolumeReport& report);

// %.17g
std::string format_double(double v);

}  // namespace flexilab
