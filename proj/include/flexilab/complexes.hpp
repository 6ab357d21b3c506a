#pragma once

#include <string>
#include <utility>
#include <vector>

namespace flexilab {

// An oriented simplex: vertex indices in orientation order.
using Simplex = std::vector<int>;
using Edge = std::pair<int, int>;  // always first < second

struct Ridge {
  Simplex vertices;  // sorted ascending
  int facet_a = -1;
  int facet_b = -1;
};

// Oriented pseudo-manifold of dimension k with dense vertex ids 0..m-1.
// Immutable once built; every invariant is checked by build().
class PseudoManifold {
 public:
  // Validates and derives edges/ridges. Throws RidgeCountError,
  // DisconnectedError or NonOrientableError naming the first offending ridge.
  static PseudoManifold build(std::vector<Simplex> facets,
                              std::vector<std::string> vertex_names = {});

  int dim() const { return dim_; }
  int vertex_count() const { return static_cast<int>(names_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Simplex>& facets() const { return facets_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Ridge>& ridges() const { return ridges_; }
  const std::vector<std::string>& vertex_names() const { return names_; }

  bool has_edge(int u, int v) const;
  // Index into edges(), or -1.
  int edge_index(int u, int v) const;
  // Index into ridges() for the given vertex set (any order), or -1.
  int ridge_index(Simplex vertices) const;

  // Same complex with every facet orientation reversed.
  PseudoManifold reversed() const;

 private:
  int dim_ = 0;
  std::vector<std::string> names_;
  std::vector<Simplex> facets_;
  std::vector<Edge> edges_;
  std::vector<Ridge> ridges_;
};

// Re-orients facets by breadth-first propagation across ridges, keeping the
// first facet's orientation. Throws NonOrientableError when no compatible
// orientation exists. Ridge-count and connectivity are not checked here.
std::vector<Simplex> orient_facets(std::vector<Simplex> facets);

// Boundary of the n-dimensional cross-polytope. Vertex a_i has id i and b_i
// has id n + i (0-based i); facets pick one of a_i / b_i for every index and
// are oriented outward for the standard realization a_i = e_i, b_i = -e_i.
PseudoManifold cross_polytope_complex(int n);

// Unordered vertex pairs that do not span an edge.
std::vector<Edge> diagonals(const PseudoManifold& k);

enum class SymmetryKind { Line, Plane };

// A simplicial involution of a complex.
struct Involution {
  std::vector<int> perm;
  SymmetryKind kind = SymmetryKind::Line;

  int operator()(int v) const { return perm[static_cast<size_t>(v)]; }
};

// Throws InvolutionError unless `phi` is an involutive automorphism of `k`.
// Line symmetry additionally forbids fixed vertices and edges [v phi(v)].
void validate_involution(const PseudoManifold& k, const Involution& phi);

// The antipodal involution a_i <-> b_i of a cross-polytope complex.
Involution cross_polytope_antipodal(int n);

}  // namespace flexilab
