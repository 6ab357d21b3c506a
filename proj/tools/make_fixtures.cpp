// Writes the frozen fixture set into a directory.
#include <fstream>
#include <iostream>
#include <random>

#include "flexilab/families.hpp"
#include "flexilab/io.hpp"
#include "json.hpp"

using namespace flexilab;
using nlohmann::json;

namespace {

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  std::cout << path << "\n";
}

RationalFlexSpec rational_spec(int n, std::uint64_t seed) {
  RationalFlexSpec spec;
  Mat v(n, n);
  if (n == 3) {
    // Equilateral triangle of side sqrt(3) in the plane z = 0.
    v << 1, 0, 0, -0.5, std::sqrt(3.0) / 2, 0, -0.5, -std::sqrt(3.0) / 2, 0;
    spec.lambda = Vec(3);
    spec.lambda << 1, 2, 3;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) v(i, j) = box(rng) + (i == j ? 1.5 : 0.0);
    }
    spec.lambda = Vec(n);
    for (int i = 0; i < n; ++i) spec.lambda(i) = 0.6 + 0.45 * i + 0.1 * box(rng);
  }
  spec.frame = simplex_frame(v);
  return spec;
}

json involution_json(const Involution& phi, const PseudoManifold& k) {
  json j;
  j["kind"] = phi.kind == SymmetryKind::Line ? "line" : "plane";
  j["pairs"] = json::array();
  for (int v = 0; v < k.vertex_count(); ++v) {
    const int w = phi(v);
    if (v < w) j["pairs"].push_back({k.vertex_names()[static_cast<size_t>(v)], k.vertex_names()[static_cast<size_t>(w)]});
  }
  return j;
}

std::string with_involution(const Polyhedron& p, const Involution& phi) {
  json j = json::parse(polyhedron_to_json(p));
  j["involution"] = involution_json(phi, *p.complex);
  return j.dump(2);
}

Polyhedron cube() {
  Mat c(8, 3);
  for (int i = 0; i < 8; ++i) c.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
  const int quads[6][4] = {{0, 1, 3, 2}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 3, 7, 5}};
  std::vector<Simplex> facets;
  const Eigen::Vector3d center(0.5, 0.5, 0.5);
  for (const auto& q : quads) {
    for (const Simplex& t : {Simplex{q[0], q[1], q[2]}, Simplex{q[0], q[2], q[3]}}) {
      const Eigen::Vector3d a = c.row(t[0]).transpose();
      const Eigen::Vector3d b = c.row(t[1]).transpose();
      const Eigen::Vector3d d = c.row(t[2]).transpose();
      const bool outward = (b - a).cross(d - a).dot(a - center) > 0;
      facets.push_back(outward ? t : Simplex{t[0], t[2], t[1]});
    }
  }
  std::vector<std::string> names;
  for (int i = 0; i < 8; ++i) names.push_back("c" + std::to_string(i));
  auto k = std::make_shared<const PseudoManifold>(PseudoManifold::build(facets, names));
  return Polyhedron{k, ModelSpace::euclidean(3), c};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  for (int n = 3; n <= 6; ++n) {
    FamilySpec spec;
    spec.kind = "rational";
    spec.rational = rational_spec(n, 100 + static_cast<std::uint64_t>(n));
    spec.lower = -3.0;
    spec.upper = 3.0;
    write(dir + "/rational_n" + std::to_string(n) + ".json", family_spec_to_json(spec));
  }

  for (int n = 3; n <= 4; ++n) {
    const auto found = search_elliptic_spec(n, 2024 + static_cast<std::uint64_t>(n));
    if (!found) {
      std::cerr << "no elliptic spec found for n = " << n << "\n";
      return 1;
    }
    FamilySpec spec;
    spec.kind = "elliptic";
    spec.elliptic = *found;
    const FlexFamily f = make_elliptic_family(*found);
    spec.lower = f.lower();
    spec.upper = f.upper();
    write(dir + "/elliptic_n" + std::to_string(n) + ".json", family_spec_to_json(spec));
  }

  {
    FamilySpec spec;
    spec.kind = "bipyramid";
    spec.sides = Vec::Constant(4, 0.6);
    const auto [lo, hi] = quadrilateral_diagonal_range(spec.sides);
    spec.lower = lo + 0.1 * (hi - lo);
    spec.upper = hi - 0.1 * (hi - lo);
    write(dir + "/bipyramid.json", family_spec_to_json(spec));
  }

  Mat oc(6, 3);
  oc << 1, 0, 0, 0, 1, 0, 0, 0, 1, -1, 0, 0, 0, -1, 0, 0, 0, -1;
  write(dir + "/octahedron.json", polyhedron_to_json(Polyhedron{shared_cross_polytope(3), ModelSpace::euclidean(3), oc}));
  write(dir + "/cube.json", polyhedron_to_json(cube()));

  Involution line = cross_polytope_antipodal(3);
  line.kind = SymmetryKind::Line;
  write(dir + "/line_octahedron_h3.json", with_involution(line_symmetric_octahedron(ModelSpace::hyperbolic(3), 5), line));
  write(dir + "/line_octahedron_s3.json", with_involution(line_symmetric_octahedron(ModelSpace::sphere(3), 5), line));
  write(dir + "/plane_octahedron.json", with_involution(plane_symmetric_octahedron(3), plane_symmetry_of_octahedron()));
  return 0;
}
