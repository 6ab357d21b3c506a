#include "flexilab/confspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "flexilab/errors.hpp"

namespace flexilab {

namespace {

Vec metric_diagonal(const ModelSpace& space) {
  Vec d = Vec::Ones(space.ambient_dim());
  if (space.kind() == Geometry::Hyperbolic) d.tail(d.size() - 1).setConstant(-1.0);
  return d;
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Mat null_space(const Mat& j, double rel_tol, Vec* singular_values = nullptr) {
  Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  if (singular_values) *singular_values = s;
  const double top = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * top) ++rank;
  }
  const Eigen::Index n = j.cols();
  return svd.matrixV().rightCols(n - rank);
}

// Deterministic sign: largest-magnitude component positive.
Vec canonical_sign(Vec v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return v(idx) < 0 ? Vec(-v) : v;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSystem

ConstraintSystem::ConstraintSystem(ModelSpace space, std::shared_ptr<const PseudoManifold> complex,
                                   Vec lengths, std::vector<CoordinateLink> links,
                                   int variable_count, std::vector<Equation> equations)
    : space_(space), complex_(std::move(complex)), lengths_(std::move(lengths)),
      links_(std::move(links)), variable_count_(variable_count), equations_(std::move(equations)) {}

const CoordinateLink& ConstraintSystem::link(int vertex, int coord) const {
  return links_[static_cast<size_t>(vertex * space_.ambient_dim() + coord)];
}

Mat ConstraintSystem::lift(const Vec& x) const {
  if (x.size() != variable_count_) throw ShapeError("variable vector has the wrong length");
  const int d = space_.ambient_dim();
  Mat coords(complex_->vertex_count(), d);
  for (int v = 0; v < complex_->vertex_count(); ++v) {
    for (int s = 0; s < d; ++s) {
      const CoordinateLink& l = link(v, s);
      coords(v, s) = l.constant + (l.variable >= 0 ? l.sign * x(l.variable) : 0.0);
    }
  }
  return coords;
}

Polyhedron ConstraintSystem::polyhedron(const Vec& x) const {
  return Polyhedron{complex_, space_, lift(x)};
}

Vec ConstraintSystem::variables_from(const Mat& coords) const {
  const int d = space_.ambient_dim();
  if (coords.rows() != complex_->vertex_count() || coords.cols() != d) {
    throw ShapeError("coordinate matrix does not match the complex");
  }
  Vec x = Vec::Zero(variable_count_);
  std::vector<bool> seen(static_cast<size_t>(variable_count_), false);
  for (int v = 0; v < complex_->vertex_count(); ++v) {
    for (int s = 0; s < d; ++s) {
      const CoordinateLink& l = link(v, s);
      if (l.variable >= 0 && !seen[static_cast<size_t>(l.variable)]) {
        x(l.variable) = (coords(v, s) - l.constant) / l.sign;
        seen[static_cast<size_t>(l.variable)] = true;
      }
    }
  }
  return x;
}

Vec ConstraintSystem::residual(const Vec& x) const {
  const Mat c = lift(x);
  const Vec metric = metric_diagonal(space_);
  Vec r(equation_count());
  for (int i = 0; i < equation_count(); ++i) {
    const Equation& e = equations_[static_cast<size_t>(i)];
    const auto xu = c.row(e.u).transpose();
    const auto xv = c.row(e.v).transpose();
    if (e.kind == EquationKind::Length && space_.is_euclidean()) {
      r(i) = (xu - xv).squaredNorm() - e.target;
    } else {
      r(i) = (xu.array() * metric.array() * xv.array()).sum() - e.target;
    }
  }
  return r;
}

Evaluation ConstraintSystem::evaluate(const Vec& x) const {
  const Mat c = lift(x);
  const Vec metric = metric_diagonal(space_);
  const int d = space_.ambient_dim();
  Evaluation out{residual(x), Mat::Zero(equation_count(), variable_count_)};
  const auto accumulate = [&](int row, int vertex, const Vec& grad) {
    for (int s = 0; s < d; ++s) {
      const CoordinateLink& l = link(vertex, s);
      if (l.variable >= 0) out.jacobian(row, l.variable) += l.sign * grad(s);
    }
  };
  for (int i = 0; i < equation_count(); ++i) {
    const Equation& e = equations_[static_cast<size_t>(i)];
    const Vec xu = c.row(e.u).transpose();
    const Vec xv = c.row(e.v).transpose();
    if (e.kind == EquationKind::Length && space_.is_euclidean()) {
      const Vec g = 2.0 * (xu - xv);
      accumulate(i, e.u, g);
      accumulate(i, e.v, -g);
    } else {
      accumulate(i, e.u, metric.cwiseProduct(xv));
      accumulate(i, e.v, metric.cwiseProduct(xu));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction

Simplex default_pinned_facet(const PseudoManifold& k) {
  Simplex best;
  for (Simplex f : k.facets()) {
    std::sort(f.begin(), f.end());
    if (best.empty() || f < best) best = f;
  }
  return best;
}

ConstraintSystem build_constraint_system(std::shared_ptr<const PseudoManifold> complex,
                                         const Vec& lengths, const ModelSpace& space,
                                         std::optional<Simplex> pinned,
                                         std::optional<Mat> anchors) {
  const PseudoManifold& k = *complex;
  if (lengths.size() != k.edge_count()) {
    throw MissingLengthError("expected " + std::to_string(k.edge_count()) + " edge lengths, got " +
                             std::to_string(lengths.size()));
  }
  for (Eigen::Index e = 0; e < lengths.size(); ++e) {
    if (!std::isfinite(lengths(e)) || !(lengths(e) > 0.0)) {
      const Edge& edge = k.edges()[static_cast<size_t>(e)];
      throw MissingLengthError("edge " + k.vertex_names()[static_cast<size_t>(edge.first)] + "-" +
                               k.vertex_names()[static_cast<size_t>(edge.second)] +
                               " has no positive length");
    }
    if (space.kind() == Geometry::Sphere && lengths(e) >= std::numbers::pi) {
      throw NotRealizableError("spherical edge lengths must be below pi");
    }
  }
  if (k.dim() != space.dim() - 1) {
    throw ShapeError("complex dimension " + std::to_string(k.dim()) + " does not match " +
                     space.name() + std::to_string(space.dim()));
  }
  const Simplex pin = pinned ? *pinned : default_pinned_facet(k);
  if (static_cast<int>(pin.size()) != space.dim()) throw ShapeError("pinned facet has the wrong size");

  Mat anchor;
  if (anchors) {
    anchor = *anchors;
    if (anchor.rows() != static_cast<Eigen::Index>(pin.size()) || anchor.cols() != space.ambient_dim()) {
      throw ShapeError("anchor matrix shape mismatch");
    }
  } else {
    Mat pin_lengths = Mat::Zero(static_cast<Eigen::Index>(pin.size()), static_cast<Eigen::Index>(pin.size()));
    for (size_t i = 0; i < pin.size(); ++i) {
      for (size_t j = 0; j < pin.size(); ++j) {
        if (i == j) continue;
        const int e = k.edge_index(pin[i], pin[j]);
        if (e < 0) throw ShapeError("pinned vertices do not span a simplex of K");
        pin_lengths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lengths(e);
      }
    }
    anchor = realize_simplex_from_lengths(pin_lengths, space);
  }

  const int d = space.ambient_dim();
  std::vector<CoordinateLink> links(static_cast<size_t>(k.vertex_count() * d));
  std::vector<int> pin_slot(static_cast<size_t>(k.vertex_count()), -1);
  for (size_t i = 0; i < pin.size(); ++i) pin_slot[static_cast<size_t>(pin[i])] = static_cast<int>(i);
  int next = 0;
  for (int v = 0; v < k.vertex_count(); ++v) {
    for (int s = 0; s < d; ++s) {
      CoordinateLink& l = links[static_cast<size_t>(v * d + s)];
      const int slot = pin_slot[static_cast<size_t>(v)];
      if (slot >= 0) {
        l.constant = anchor(slot, s);
      } else {
        l.variable = next++;
      }
    }
  }

  std::vector<Equation> equations;
  if (!space.is_euclidean()) {
    for (int v = 0; v < k.vertex_count(); ++v) {
      if (pin_slot[static_cast<size_t>(v)] < 0) equations.push_back({EquationKind::Norm, v, v, -1, 1.0});
    }
  }
  for (int e = 0; e < k.edge_count(); ++e) {
    const Edge& edge = k.edges()[static_cast<size_t>(e)];
    if (pin_slot[static_cast<size_t>(edge.first)] >= 0 && pin_slot[static_cast<size_t>(edge.second)] >= 0) {
      continue;
    }
    const double l = lengths(e);
    const double target = space.is_euclidean() ? l * l : space.c(l);
    equations.push_back({EquationKind::Length, edge.first, edge.second, e, target});
  }
  return ConstraintSystem(space, std::move(complex), lengths, std::move(links), next,
                          std::move(equations));
}

Vec edge_residual(const Polyhedron& p, const Vec& lengths) {
  const auto& edges = p.complex->edges();
  const Vec metric = metric_diagonal(p.space);
  Vec r(static_cast<Eigen::Index>(edges.size()));
  for (size_t e = 0; e < edges.size(); ++e) {
    const Vec xu = p.point(edges[e].first);
    const Vec xv = p.point(edges[e].second);
    const double l = lengths(static_cast<Eigen::Index>(e));
    if (p.space.is_euclidean()) {
      r(static_cast<Eigen::Index>(e)) = (xu - xv).squaredNorm() - l * l;
    } else {
      r(static_cast<Eigen::Index>(e)) = (xu.array() * metric.array() * xv.array()).sum() - p.space.c(l);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rigidity and tracking

RigidityReport rigidity_test(const ConstraintSystem& system, const Vec& x) {
  const Evaluation ev = system.evaluate(x);
  const double res = inf_norm(ev.residual);
  if (res > 1e-8) {
    std::ostringstream os;
    os << "residual " << res << " exceeds 1e-8";
    throw NotOnVarietyError(os.str());
  }
  Vec s;
  RigidityReport report;
  report.flex_basis = null_space(ev.jacobian, 1e-8, &s);
  report.kernel_dim = static_cast<int>(report.flex_basis.cols());
  report.max_singular_value = s.size() ? s(0) : 0.0;
  report.min_singular_value =
      s.size() == system.variable_count() && s.size() ? s(s.size() - 1) : 0.0;
  return report;
}

Vec correct(const ConstraintSystem& system, Vec x, const Vec* tangent, const Vec* anchor,
            double tol, int max_iterations) {
  const auto augmented = [&](const Vec& y, Mat* jac) {
    Evaluation ev = system.evaluate(y);
    const Eigen::Index m = ev.residual.size();
    const Eigen::Index extra = tangent ? 1 : 0;
    Vec f(m + extra);
    f.head(m) = ev.residual;
    if (tangent) f(m) = tangent->dot(y - *anchor);
    if (jac) {
      jac->resize(m + extra, y.size());
      jac->topRows(m) = ev.jacobian;
      if (tangent) jac->row(m) = tangent->transpose();
    }
    return f;
  };
  Mat j;
  Vec f = augmented(x, &j);
  double norm = inf_norm(f);
  for (int it = 0; it < max_iterations; ++it) {
    if (norm < tol) {
      // One polishing step; kept only if it helps.
      const Vec delta = j.completeOrthogonalDecomposition().solve(-f);
      const Vec polished = x + delta;
      if (inf_norm(augmented(polished, nullptr)) < norm) x = polished;
      return x;
    }
    const Vec delta = j.completeOrthogonalDecomposition().solve(-f);
    double damping = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 6; ++halving) {
      const Vec trial = x + damping * delta;
      const Vec ft = augmented(trial, nullptr);
      const double nt = inf_norm(ft);
      if (std::isfinite(nt) && nt < norm) {
        x = trial;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) break;
    f = augmented(x, &j);
    norm = inf_norm(f);
  }
  if (norm < tol) return x;
  std::ostringstream os;
  os << "corrector stalled at residual " << norm;
  throw CorrectorDivergenceError(os.str());
}

TrackedPath track_flex(const ConstraintSystem& system, const Vec& start,
                       const TrackOptions& options) {
  const auto tangent_at = [&](const Vec& x) {
    const Mat kernel = null_space(system.evaluate(x).jacobian, 1e-8);
    return kernel;
  };
  const RigidityReport initial = rigidity_test(system, start);
  if (initial.kernel_dim == 0) throw RigidError("Jacobian has a trivial kernel at the seed");
  if (initial.kernel_dim > 1) {
    throw BifurcationError("kernel dimension " + std::to_string(initial.kernel_dim) +
                           " at the seed; expected 1");
  }

  TrackedPath path;
  Vec x = correct(system, start, nullptr, nullptr, options.corrector_tol,
                  options.max_corrector_iterations);
  Vec t = canonical_sign(initial.flex_basis.col(0)) * (options.direction < 0 ? -1.0 : 1.0);
  const auto record = [&](const Vec& point, double s) {
    path.points.push_back(point);
    path.arclength.push_back(s);
    path.residuals.push_back(inf_norm(system.residual(point)));
    path.degenerate.push_back(check_nondegenerate(system.polyhedron(point)).degenerate());
  };
  record(x, 0.0);

  double h = std::clamp(options.step, options.min_step, options.max_step);
  int easy = 0;
  double s = 0.0;
  while (static_cast<int>(path.points.size()) <= options.max_steps) {
    const Vec predicted = x + h * t;
    Vec next;
    Vec next_t;
    bool ok = false;
    try {
      next = correct(system, predicted, &t, &predicted, options.corrector_tol,
                     options.max_corrector_iterations);
      const Mat kernel = tangent_at(next);
      if (kernel.cols() == 0) throw RigidError("flex ends: Jacobian became injective");
      if (kernel.cols() > 1) {
        throw BifurcationError("kernel dimension jumped to " + std::to_string(kernel.cols()) +
                               " at arclength " + std::to_string(s + h));
      }
      next_t = kernel.col(0);
      if (next_t.dot(t) < 0) next_t = -next_t;
      ok = next_t.dot(t) > 0.8;
    } catch (const CorrectorDivergenceError&) {
      ok = false;
    } catch (const RigidError&) {
      ok = false;
      if (h <= options.min_step) throw;
    } catch (const BifurcationError&) {
      ok = false;
      if (h <= options.min_step) throw;
    }
    if (!ok) {
      ++path.rejected_steps;
      easy = 0;
      if (h <= options.min_step) {
        throw CorrectorDivergenceError("step size fell below the minimum at arclength " +
                                       std::to_string(s));
      }
      h = std::max(options.min_step, 0.5 * h);
      continue;
    }
    s += (next - x).norm();
    x = next;
    t = next_t;
    record(x, s);
    if (options.adaptive && ++easy >= 3) {
      h = std::min(options.max_step, 1.3 * h);
      easy = 0;
    }
  }
  return path;
}

FlexFamily tracked_family(std::shared_ptr<const ConstraintSystem> system,
                          std::shared_ptr<const TrackedPath> path) {
  if (path->points.empty()) throw ShapeError("empty path");
  const double length = path->arclength.back();
  auto eval = [system, path](double s) {
    const auto& arc = path->arclength;
    if (arc.size() == 1) return system->polyhedron(path->points.front());
    s = std::clamp(s, arc.front(), arc.back());
    auto it = std::upper_bound(arc.begin(), arc.end(), s);
    size_t hi = static_cast<size_t>(it - arc.begin());
    hi = std::clamp<size_t>(hi, 1, arc.size() - 1);
    const size_t lo = hi - 1;
    const double span = arc[hi] - arc[lo];
    const double w = span > 0 ? (s - arc[lo]) / span : 0.0;
    if (w == 0.0) return system->polyhedron(path->points[lo]);
    if (w == 1.0) return system->polyhedron(path->points[hi]);
    const Vec x = (1.0 - w) * path->points[lo] + w * path->points[hi];
    const Vec dir = (path->points[hi] - path->points[lo]).normalized();
    return system->polyhedron(correct(*system, x, &dir, &x, 1e-12, 20));
  };
  return FlexFamily(FamilyKind::Tracked, system->complex(), 0.0, length, std::move(eval));
}

// ---------------------------------------------------------------------------
// Non-degeneracy monitor

namespace {

// Orthonormal basis (columns) of the flat spanned by a ridge, or empty when
// the ridge itself is degenerate.
struct Flat {
  Vec origin;
  Mat basis;
  bool linear = false;
};

std::optional<Flat> ridge_flat(const Polyhedron& p, const Simplex& ridge, double scale) {
  Flat flat;
  flat.linear = !p.space.is_euclidean();
  const Mat pts = p.points(ridge);
  Mat dirs;
  if (flat.linear) {
    flat.origin = Vec::Zero(pts.cols());
    dirs = pts.transpose();
    for (Eigen::Index c = 0; c < dirs.cols(); ++c) dirs.col(c).normalize();
  } else {
    flat.origin = pts.row(0).transpose();
    dirs.resize(pts.cols(), pts.rows() - 1);
    for (Eigen::Index i = 1; i < pts.rows(); ++i) dirs.col(i - 1) = (pts.row(i) - pts.row(0)).transpose();
  }
  if (dirs.cols() == 0) {
    flat.basis = Mat(pts.cols(), 0);
    return flat;
  }
  Eigen::JacobiSVD<Mat> svd(dirs, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double tol = flat.linear ? 1e-9 : 1e-9 * scale;
  if (s(s.size() - 1) <= tol) return std::nullopt;
  flat.basis = svd.matrixU();
  return flat;
}

double flat_distance(const Flat& flat, Vec q) {
  if (flat.linear) q.normalize();
  const Vec rel = q - flat.origin;
  return (rel - flat.basis * (flat.basis.transpose() * rel)).norm();
}

}  // namespace

DegeneracyReport check_nondegenerate(const Polyhedron& p) {
  const PseudoManifold& k = *p.complex;
  DegeneracyReport report;
  const int n = p.space.dim();
  double mean_edge = 0.0;
  for (const Edge& e : k.edges()) mean_edge += (p.point(e.first) - p.point(e.second)).norm();
  mean_edge /= std::max(1, k.edge_count());
  const double unit = std::pow(mean_edge, n - 1);
  report.min_facet_ratio = std::numeric_limits<double>::infinity();
  for (const Simplex& f : k.facets()) {
    const double measure = simplex_measure(ModelSpace::euclidean(static_cast<int>(p.coords.cols())), p.points(f));
    const double ratio = unit > 0 ? measure / unit : 0.0;
    report.min_facet_ratio = std::min(report.min_facet_ratio, ratio);
    if (ratio < 1e-8) ++report.flat_facets;
  }

  const double tol = 1e-9 * std::max(mean_edge, 1e-300);
  const auto& ridges = k.ridges();
  for (size_t r = 0; r < ridges.size() && !report.decomposition_witness; ++r) {
    const auto flat = ridge_flat(p, ridges[r].vertices, mean_edge);
    if (!flat) continue;
    std::vector<bool> in_flat(static_cast<size_t>(k.vertex_count()), false);
    for (int v = 0; v < k.vertex_count(); ++v) {
      in_flat[static_cast<size_t>(v)] = flat_distance(*flat, p.point(v)) <= (flat->linear ? 1e-9 : tol);
    }
    // Facets stay connected only through ridges that leave the flat.
    std::vector<std::vector<int>> adjacency(k.facets().size());
    for (const Ridge& ridge : ridges) {
      const bool inside = std::all_of(ridge.vertices.begin(), ridge.vertices.end(),
                                      [&](int v) { return in_flat[static_cast<size_t>(v)]; });
      if (inside) continue;
      adjacency[static_cast<size_t>(ridge.facet_a)].push_back(ridge.facet_b);
      adjacency[static_cast<size_t>(ridge.facet_b)].push_back(ridge.facet_a);
    }
    std::vector<int> component(k.facets().size(), -1);
    int components = 0;
    for (size_t start = 0; start < component.size(); ++start) {
      if (component[start] >= 0) continue;
      std::queue<size_t> queue;
      queue.push(start);
      component[start] = components;
      while (!queue.empty()) {
        const size_t f = queue.front();
        queue.pop();
        for (int g : adjacency[f]) {
          if (component[static_cast<size_t>(g)] < 0) {
            component[static_cast<size_t>(g)] = components;
            queue.push(static_cast<size_t>(g));
          }
        }
      }
      ++components;
    }
    if (components < 2) continue;
    std::vector<std::set<int>> owners(static_cast<size_t>(k.vertex_count()));
    for (size_t f = 0; f < k.facets().size(); ++f) {
      for (int v : k.facets()[f]) owners[static_cast<size_t>(v)].insert(component[f]);
    }
    bool witness = true;
    for (int v = 0; v < k.vertex_count(); ++v) {
      if (owners[static_cast<size_t>(v)].size() > 1 && !in_flat[static_cast<size_t>(v)]) {
        witness = false;
        break;
      }
    }
    report.decomposition_witness = witness;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Symmetry reduction

namespace {

struct GaugeZero {
  int rep;
  int coord;
};

Vec symmetry_diagonal(const ModelSpace& space, SymmetryKind kind) {
  if (space.is_euclidean()) {
    return kind == SymmetryKind::Line ? Vec((Vec(3) << -1, -1, 1).finished())
                                      : Vec((Vec(3) << 1, 1, -1).finished());
  }
  return kind == SymmetryKind::Line ? Vec((Vec(4) << 1, -1, -1, 1).finished())
                                    : Vec((Vec(4) << 1, 1, 1, -1).finished());
}

std::vector<GaugeZero> gauge_zeros(const ModelSpace& space, SymmetryKind kind) {
  if (space.is_euclidean()) {
    if (kind == SymmetryKind::Line) return {{0, 1}, {0, 2}};
    return {{0, 0}, {0, 1}, {1, 1}};
  }
  if (kind == SymmetryKind::Line) return {{0, 2}, {0, 3}};
  return {{0, 1}, {0, 2}, {1, 2}};
}

// Applies a rotation (sphere/Euclidean) or boost (hyperbolic, when a == 0)
// in the coordinate plane (a, b) that zeroes coordinate b of `target`.
void zero_by_plane_motion(Mat& coords, const Vec& target, int a, int b, bool boost) {
  const double xa = target(a);
  const double xb = target(b);
  if (xb == 0.0) return;
  if (boost) {
    const double th = xb / xa;
    if (std::abs(th) >= 1.0) throw SymmetryMismatchError("cannot boost a non-timelike point");
    const double ch = 1.0 / std::sqrt(1.0 - th * th);
    const double sh = th * ch;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
      const double pa = coords(i, a);
      const double pb = coords(i, b);
      coords(i, a) = ch * pa - sh * pb;
      coords(i, b) = -sh * pa + ch * pb;
    }
    return;
  }
  const double r = std::hypot(xa, xb);
  const double c = xa / r;
  const double s = xb / r;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double pa = coords(i, a);
    const double pb = coords(i, b);
    coords(i, a) = c * pa + s * pb;
    coords(i, b) = -s * pa + c * pb;
  }
}

}  // namespace

Mat SymmetryReduction::canonicalize(const Mat& coords) const {
  const ModelSpace& space = system.space();
  Mat c = coords;
  const int r0 = representatives.at(0);
  const bool hyperbolic = space.kind() == Geometry::Hyperbolic;
  if (space.is_euclidean()) {
    if (involution.kind == SymmetryKind::Line) {
      zero_by_plane_motion(c, c.row(r0).transpose(), 0, 1, false);
      c.col(2).array() -= c(r0, 2);
    } else {
      c.col(0).array() -= c(r0, 0);
      c.col(1).array() -= c(r0, 1);
      const int r1 = representatives.at(1);
      zero_by_plane_motion(c, c.row(r1).transpose(), 0, 1, false);
    }
    return c;
  }
  if (involution.kind == SymmetryKind::Line) {
    zero_by_plane_motion(c, c.row(r0).transpose(), 0, 3, hyperbolic);
    zero_by_plane_motion(c, c.row(r0).transpose(), 1, 2, false);
  } else {
    zero_by_plane_motion(c, c.row(r0).transpose(), 1, 2, false);
    zero_by_plane_motion(c, c.row(r0).transpose(), 0, 1, hyperbolic);
    const int r1 = representatives.at(1);
    zero_by_plane_motion(c, c.row(r1).transpose(), 1, 2, false);
  }
  return c;
}

SymmetryReduction symmetry_reduce(const ConstraintSystem& full, const Involution& phi) {
  const ModelSpace& space = full.space();
  const auto& complex = full.complex();
  const PseudoManifold& k = *complex;
  if (space.dim() != 3) throw SymmetryMismatchError("symmetry reduction is implemented for dimension 3");
  try {
    validate_involution(k, phi);
  } catch (const InvolutionError& e) {
    throw SymmetryMismatchError(e.what());
  }
  const Vec& lengths = full.lengths();
  const double scale = lengths.cwiseAbs().maxCoeff();
  std::vector<int> edge_rep(static_cast<size_t>(k.edge_count()), -1);
  for (int e = 0; e < k.edge_count(); ++e) {
    const Edge& edge = k.edges()[static_cast<size_t>(e)];
    const int image = k.edge_index(phi(edge.first), phi(edge.second));
    if (image < 0) throw SymmetryMismatchError("involution does not map edges to edges");
    if (std::abs(lengths(e) - lengths(image)) > 1e-12 * scale) {
      throw SymmetryMismatchError("edge lengths are not invariant under the involution");
    }
    edge_rep[static_cast<size_t>(e)] = std::min(e, image);
  }

  std::vector<int> reps;
  for (int v = 0; v < k.vertex_count(); ++v) {
    if (v <= phi(v)) reps.push_back(v);
  }
  const Vec diag = symmetry_diagonal(space, phi.kind);
  const auto zeros = gauge_zeros(space, phi.kind);
  if (reps.size() < 2) throw SymmetryMismatchError("too few vertex orbits");

  const int d = space.ambient_dim();
  std::vector<CoordinateLink> links(static_cast<size_t>(k.vertex_count() * d));
  int next = 0;
  for (size_t ri = 0; ri < reps.size(); ++ri) {
    const int v = reps[ri];
    const bool fixed = phi(v) == v;
    for (int s = 0; s < d; ++s) {
      CoordinateLink& l = links[static_cast<size_t>(v * d + s)];
      const bool gauge = std::any_of(zeros.begin(), zeros.end(), [&](const GaugeZero& z) {
        return z.rep == static_cast<int>(ri) && z.coord == s;
      });
      if (gauge || (fixed && diag(s) < 0)) continue;
      l.variable = next++;
    }
    if (!fixed) {
      for (int s = 0; s < d; ++s) {
        CoordinateLink image = links[static_cast<size_t>(v * d + s)];
        image.sign *= diag(s);
        image.constant *= diag(s);
        links[static_cast<size_t>(phi(v) * d + s)] = image;
      }
    }
  }

  std::vector<Equation> equations;
  if (!space.is_euclidean()) {
    for (int v : reps) equations.push_back({EquationKind::Norm, v, v, -1, 1.0});
  }
  for (int e = 0; e < k.edge_count(); ++e) {
    if (edge_rep[static_cast<size_t>(e)] != e) continue;
    const Edge& edge = k.edges()[static_cast<size_t>(e)];
    const double l = lengths(e);
    equations.push_back({EquationKind::Length, edge.first, edge.second, e,
                         space.is_euclidean() ? l * l : space.c(l)});
  }
  ConstraintSystem reduced(space, complex, lengths, std::move(links), next, std::move(equations));
  return SymmetryReduction{std::move(reduced), phi, diag, std::move(reps)};
}

}  // namespace flexilab
