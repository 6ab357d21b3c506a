#pragma once

#include <random>
#include <string>

#include "flexilab/families.hpp"
#include "flexilab/io.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(FLEXILAB_FIXTURES) + "/" + name; }

inline flexilab::FlexFamily fixture_family(const std::string& name) {
  return flexilab::make_family(flexilab::load_family_spec(fixture(name)));
}

inline flexilab::Polyhedron fixture_mesh(const std::string& name) {
  return flexilab::load_mesh(fixture(name)).polyhedron(flexilab::ModelSpace::euclidean(3));
}

inline flexilab::Polyhedron regular_octahedron() {
  flexilab::Mat c(6, 3);
  c << 1, 0, 0, 0, 1, 0, 0, 0, 1, -1, 0, 0, 0, -1, 0, 0, 0, -1;
  return {flexilab::shared_cross_polytope(3), flexilab::ModelSpace::euclidean(3), c};
}

inline std::vector<flexilab::Polyhedron> samples(const flexilab::FlexFamily& f, const std::vector<double>& sweep) {
  std::vector<flexilab::Polyhedron> out;
  for (double u : sweep) out.push_back(f(u));
  return out;
}

inline double max_abs(const flexilab::Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
