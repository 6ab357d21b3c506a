#include "flexilab/complexes.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "flexilab/errors.hpp"

namespace flexilab {

namespace {

// Parity (+1/-1) of the permutation that sorts `s`.
int sort_parity(Simplex s) {
  int parity = 1;
  for (size_t i = 0; i < s.size(); ++i) {
    for (size_t j = 0; j + 1 < s.size() - i; ++j) {
      if (s[j] > s[j + 1]) {
        std::swap(s[j], s[j + 1]);
        parity = -parity;
      }
    }
  }
  return parity;
}

std::string format_simplex(const Simplex& s, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << " ";
    const auto v = static_cast<size_t>(s[i]);
    os << (v < names.size() ? names[v] : std::to_string(s[i]));
  }
  os << "]";
  return os.str();
}

struct Incidence {
  int facet;
  int sign;  // induced orientation relative to the sorted ridge
};

// Ridge -> incident facets with induced orientation, in first-seen order.
struct RidgeTable {
  std::map<Simplex, size_t> index;
  std::vector<Simplex> keys;
  std::vector<std::vector<Incidence>> incidences;
};

RidgeTable collect_ridges(const std::vector<Simplex>& facets) {
  RidgeTable table;
  for (size_t f = 0; f < facets.size(); ++f) {
    const Simplex& facet = facets[f];
    for (size_t j = 0; j < facet.size(); ++j) {
      Simplex face;
      face.reserve(facet.size() - 1);
      for (size_t i = 0; i < facet.size(); ++i) {
        if (i != j) face.push_back(facet[i]);
      }
      const int sign = ((j % 2) ? -1 : 1) * sort_parity(face);
      std::sort(face.begin(), face.end());
      auto [it, inserted] = table.index.emplace(face, table.keys.size());
      if (inserted) {
        table.keys.push_back(face);
        table.incidences.emplace_back();
      }
      table.incidences[it->second].push_back({static_cast<int>(f), sign});
    }
  }
  return table;
}

// BFS orientation propagation; returns per-facet flips (+1 keep, -1 flip)
// or throws NonOrientableError.
std::vector<int> propagate_orientation(const std::vector<Simplex>& facets,
                                       const RidgeTable& table) {
  std::vector<std::vector<std::pair<size_t, size_t>>> adjacency(facets.size());
  for (size_t r = 0; r < table.keys.size(); ++r) {
    const auto& inc = table.incidences[r];
    for (size_t a = 0; a < inc.size(); ++a) {
      adjacency[static_cast<size_t>(inc[a].facet)].push_back({r, a});
    }
  }
  std::vector<int> flip(facets.size(), 0);
  for (size_t start = 0; start < facets.size(); ++start) {
    if (flip[start] != 0) continue;
    flip[start] = 1;
    std::queue<size_t> queue;
    queue.push(start);
    while (!queue.empty()) {
      const size_t f = queue.front();
      queue.pop();
      for (auto [r, a] : adjacency[f]) {
        const auto& inc = table.incidences[r];
        const int mine = inc[a].sign * flip[f];
        for (size_t b = 0; b < inc.size(); ++b) {
          if (b == a) continue;
          const auto g = static_cast<size_t>(inc[b].facet);
          const int wanted = -mine * inc[b].sign;
          if (flip[g] == 0) {
            flip[g] = wanted;
            queue.push(g);
          } else if (flip[g] != wanted) {
            throw NonOrientableError("no compatible orientation exists; conflict at ridge " +
                                     format_simplex(table.keys[r], {}));
          }
        }
      }
    }
  }
  return flip;
}

}  // namespace

std::vector<Simplex> orient_facets(std::vector<Simplex> facets) {
  const RidgeTable table = collect_ridges(facets);
  const std::vector<int> flip = propagate_orientation(facets, table);
  for (size_t f = 0; f < facets.size(); ++f) {
    if (flip[f] < 0 && facets[f].size() >= 2) std::swap(facets[f][0], facets[f][1]);
  }
  return facets;
}

PseudoManifold PseudoManifold::build(std::vector<Simplex> facets,
                                     std::vector<std::string> vertex_names) {
  if (facets.empty()) throw RidgeCountError("empty facet list");
  const size_t width = facets.front().size();
  if (width < 2) throw RidgeCountError("facets must have dimension at least 1");
  int max_vertex = -1;
  for (const Simplex& f : facets) {
    if (f.size() != width) throw RidgeCountError("facets of mixed dimension");
    std::set<int> distinct(f.begin(), f.end());
    if (distinct.size() != f.size()) {
      throw RidgeCountError("facet " + format_simplex(f, vertex_names) + " repeats a vertex");
    }
    for (int v : f) {
      if (v < 0) throw RidgeCountError("negative vertex id");
      max_vertex = std::max(max_vertex, v);
    }
  }
  const auto m = static_cast<size_t>(max_vertex + 1);
  std::vector<bool> used(m, false);
  for (const Simplex& f : facets) {
    for (int v : f) used[static_cast<size_t>(v)] = true;
  }
  for (size_t v = 0; v < m; ++v) {
    if (!used[v]) {
      throw RidgeCountError("vertex " + std::to_string(v) + " lies in no facet");
    }
  }
  if (vertex_names.empty()) {
    for (size_t v = 0; v < m; ++v) vertex_names.push_back(std::to_string(v));
  } else if (vertex_names.size() != m) {
    throw RidgeCountError("vertex name count does not match vertex ids");
  }

  const RidgeTable table = collect_ridges(facets);
  for (size_t r = 0; r < table.keys.size(); ++r) {
    const size_t count = table.incidences[r].size();
    if (count != 2) {
      throw RidgeCountError("ridge " + format_simplex(table.keys[r], vertex_names) +
                            " lies in " + std::to_string(count) + " facets");
    }
    if (table.incidences[r][0].facet == table.incidences[r][1].facet) {
      throw RidgeCountError("ridge " + format_simplex(table.keys[r], vertex_names) +
                            " counted twice in one facet");
    }
  }

  // Strong connectivity over the facet-ridge adjacency graph.
  std::vector<std::vector<int>> adjacency(facets.size());
  for (const auto& inc : table.incidences) {
    adjacency[static_cast<size_t>(inc[0].facet)].push_back(inc[1].facet);
    adjacency[static_cast<size_t>(inc[1].facet)].push_back(inc[0].facet);
  }
  std::vector<bool> seen(facets.size(), false);
  std::queue<int> queue;
  queue.push(0);
  seen[0] = true;
  size_t reached = 1;
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop();
    for (int g : adjacency[static_cast<size_t>(f)]) {
      if (!seen[static_cast<size_t>(g)]) {
        seen[static_cast<size_t>(g)] = true;
        ++reached;
        queue.push(g);
      }
    }
  }
  if (reached != facets.size()) {
    for (size_t f = 0; f < facets.size(); ++f) {
      if (!seen[f]) {
        throw DisconnectedError("facet " + format_simplex(facets[f], vertex_names) +
                                " is not reachable from facet " +
                                format_simplex(facets[0], vertex_names));
      }
    }
  }

  for (size_t r = 0; r < table.keys.size(); ++r) {
    const auto& inc = table.incidences[r];
    if (inc[0].sign == inc[1].sign) {
      std::string detail;
      try {
        propagate_orientation(facets, table);
        detail = "facet orientations disagree";
      } catch (const NonOrientableError&) {
        detail = "complex is not orientable";
      }
      throw NonOrientableError(detail + " at ridge " +
                               format_simplex(table.keys[r], vertex_names) + " (facets " +
                               format_simplex(facets[static_cast<size_t>(inc[0].facet)],
                                              vertex_names) +
                               " and " +
                               format_simplex(facets[static_cast<size_t>(inc[1].facet)],
                                              vertex_names) +
                               ")");
    }
  }

  PseudoManifold k;
  k.dim_ = static_cast<int>(width) - 1;
  k.names_ = std::move(vertex_names);
  std::set<Edge> edges;
  for (const Simplex& f : facets) {
    for (size_t i = 0; i < f.size(); ++i) {
      for (size_t j = i + 1; j < f.size(); ++j) {
        edges.insert({std::min(f[i], f[j]), std::max(f[i], f[j])});
      }
    }
  }
  k.edges_.assign(edges.begin(), edges.end());
  for (size_t r = 0; r < table.keys.size(); ++r) {
    k.ridges_.push_back({table.keys[r], table.incidences[r][0].facet,
                         table.incidences[r][1].facet});
  }
  k.facets_ = std::move(facets);
  return k;
}

bool PseudoManifold::has_edge(int u, int v) const { return edge_index(u, v) >= 0; }

int PseudoManifold::edge_index(int u, int v) const {
  const Edge e{std::min(u, v), std::max(u, v)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return -1;
  return static_cast<int>(it - edges_.begin());
}

int PseudoManifold::ridge_index(Simplex vertices) const {
  std::sort(vertices.begin(), vertices.end());
  for (size_t r = 0; r < ridges_.size(); ++r) {
    if (ridges_[r].vertices == vertices) return static_cast<int>(r);
  }
  return -1;
}

PseudoManifold PseudoManifold::reversed() const {
  PseudoManifold k = *this;
  for (Simplex& f : k.facets_) std::swap(f[0], f[1]);
  return k;
}

PseudoManifold cross_polytope_complex(int n) {
  if (n < 2) throw RidgeCountError("cross-polytope needs n >= 2");
  std::vector<Simplex> facets;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("a" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) names.push_back("b" + std::to_string(i + 1));
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Simplex facet;
    int flips = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        facet.push_back(n + i);
        ++flips;
      } else {
        facet.push_back(i);
      }
    }
    // det(+-e_i) = (-1)^flips; swap to keep the outward orientation.
    if (flips % 2) std::swap(facet[0], facet[1]);
    facets.push_back(std::move(facet));
  }
  return PseudoManifold::build(std::move(facets), std::move(names));
}

std::vector<Edge> diagonals(const PseudoManifold& k) {
  std::vector<Edge> out;
  for (int u = 0; u < k.vertex_count(); ++u) {
    for (int v = u + 1; v < k.vertex_count(); ++v) {
      if (!k.has_edge(u, v)) out.push_back({u, v});
    }
  }
  return out;
}

void validate_involution(const PseudoManifold& k, const Involution& phi) {
  const auto m = static_cast<size_t>(k.vertex_count());
  if (phi.perm.size() != m) throw InvolutionError("permutation size mismatch");
  for (size_t v = 0; v < m; ++v) {
    const int w = phi.perm[v];
    if (w < 0 || static_cast<size_t>(w) >= m) throw InvolutionError("image out of range");
    if (phi.perm[static_cast<size_t>(w)] != static_cast<int>(v)) {
      throw InvolutionError("phi(phi(" + k.vertex_names()[v] + ")) is not the identity");
    }
  }
  std::set<Simplex> facet_set;
  for (Simplex f : k.facets()) {
    std::sort(f.begin(), f.end());
    facet_set.insert(f);
  }
  for (const Simplex& f : k.facets()) {
    Simplex image;
    for (int v : f) image.push_back(phi(v));
    std::sort(image.begin(), image.end());
    if (!facet_set.count(image)) {
      throw InvolutionError("facet " + format_simplex(f, k.vertex_names()) +
                            " is not mapped to a facet");
    }
  }
  if (phi.kind == SymmetryKind::Line) {
    for (size_t v = 0; v < m; ++v) {
      const int w = phi.perm[v];
      if (w == static_cast<int>(v)) {
        throw InvolutionError("line symmetry fixes vertex " + k.vertex_names()[v]);
      }
      if (k.has_edge(static_cast<int>(v), w)) {
        throw InvolutionError("line symmetry pairs the edge-joined vertices " +
                              k.vertex_names()[v] + " and " +
                              k.vertex_names()[static_cast<size_t>(w)]);
      }
    }
  }
}

Involution cross_polytope_antipodal(int n) {
  Involution phi;
  phi.kind = SymmetryKind::Line;
  for (int i = 0; i < n; ++i) phi.perm.push_back(n + i);
  for (int i = 0; i < n; ++i) phi.perm.push_back(i);
  return phi;
}

}  // namespace flexilab
