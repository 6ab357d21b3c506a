#include "flexilab/geomkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flexilab/errors.hpp"

namespace flexilab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_square_symmetric(const Mat& a, const char* what, double tol = 1e-12) {
  if (a.rows() != a.cols()) throw ShapeError(std::string(what) + " must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw ShapeError(std::string(what) + " must be symmetric");
  }
}

// Gram-Schmidt of `v` against an orthonormal (under `g`) list.
template <class Metric>
Vec orthogonalize(Vec v, const std::vector<Vec>& basis, Metric g) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec& b : basis) v -= g(v, b) * b;
  }
  return v;
}

}  // namespace

double ModelSpace::inner(const Vec& x, const Vec& y) const {
  if (kind_ != Geometry::Hyperbolic) return x.dot(y);
  return x(0) * y(0) - x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

double ModelSpace::tangent_inner(const Vec& x, const Vec& y) const {
  return kind_ == Geometry::Hyperbolic ? -inner(x, y) : x.dot(y);
}

double ModelSpace::c(double t) const {
  switch (kind_) {
    case Geometry::Sphere:
      return std::cos(t);
    case Geometry::Hyperbolic:
      return std::cosh(t);
    default:
      throw ShapeError("c(t) is defined only for non-Euclidean spaces");
  }
}

double ModelSpace::c_inverse(double value) const {
  switch (kind_) {
    case Geometry::Sphere:
      return std::acos(std::clamp(value, -1.0, 1.0));
    case Geometry::Hyperbolic:
      return std::acosh(std::max(1.0, value));
    default:
      throw ShapeError("c is defined only for non-Euclidean spaces");
  }
}

bool ModelSpace::on_model(const Vec& x, double tol) const {
  if (x.size() != ambient_dim()) return false;
  if (kind_ == Geometry::Euclidean) return x.allFinite();
  if (std::abs(inner(x, x) - 1.0) > tol) return false;
  return kind_ != Geometry::Hyperbolic || x(0) > 0.0;
}

double ModelSpace::sphere_volume(int n) {
  // 2 pi^{(n+1)/2} / Gamma((n+1)/2)
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

std::string ModelSpace::name() const {
  switch (kind_) {
    case Geometry::Euclidean:
      return "euclid";
    case Geometry::Sphere:
      return "sphere";
    default:
      return "hyperbolic";
  }
}

Mat Polyhedron::points(const Simplex& s) const {
  Mat out(static_cast<Eigen::Index>(s.size()), coords.cols());
  for (size_t i = 0; i < s.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = coords.row(s[i]);
  return out;
}

double distance(const ModelSpace& space, const Vec& x, const Vec& y) {
  if (x.size() != space.ambient_dim() || y.size() != space.ambient_dim()) {
    throw OffModelError("point dimension does not match " + space.name());
  }
  if (space.is_euclidean()) return (x - y).norm();
  if (!space.on_model(x) || !space.on_model(y)) {
    throw OffModelError("point is not on the " + space.name() + " model surface");
  }
  if (space.kind() == Geometry::Sphere) {
    return 2.0 * std::atan2((x - y).norm(), (x + y).norm());
  }
  // <x-y, x-y> = 2 - 2 cosh d = -4 sinh^2(d/2)
  const Vec diff = x - y;
  const double q = std::max(0.0, -space.inner(diff, diff));
  return 2.0 * std::asinh(0.5 * std::sqrt(q));
}

Vec edge_lengths(const Polyhedron& p) {
  const auto& edges = p.complex->edges();
  Vec out(static_cast<Eigen::Index>(edges.size()));
  for (size_t e = 0; e < edges.size(); ++e) {
    out(static_cast<Eigen::Index>(e)) =
        distance(p.space, p.point(edges[e].first), p.point(edges[e].second));
  }
  return out;
}

double cayley_menger_det(const Mat& sq) {
  require_square_symmetric(sq, "squared-distance matrix");
  const Eigen::Index p = sq.rows();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(sq(i, i)) > 1e-12 * std::max(1.0, sq.cwiseAbs().maxCoeff())) {
      throw ShapeError("squared-distance matrix must have a zero diagonal");
    }
  }
  Mat b = Mat::Zero(p + 1, p + 1);
  b.block(0, 1, 1, p).setOnes();
  b.block(1, 0, p, 1).setOnes();
  b.block(1, 1, p, p) = sq;
  return b.fullPivLu().determinant();
}

Mat realize_simplex_from_lengths(const Mat& lengths, const ModelSpace& space) {
  require_square_symmetric(lengths, "edge-length matrix");
  const Eigen::Index p = lengths.rows();
  if (p == 0) throw ShapeError("empty simplex");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (lengths(i, i) != 0.0) throw ShapeError("edge-length matrix must have a zero diagonal");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && !(lengths(i, j) > 0.0)) {
        throw NotRealizableError("edge length between vertices " + std::to_string(i) + " and " +
                                 std::to_string(j) + " is not positive");
      }
      if (space.kind() == Geometry::Sphere && lengths(i, j) > kPi) {
        throw NotRealizableError("spherical edge length exceeds pi");
      }
    }
  }
  const int room = space.dim();
  if (p - 1 > room) {
    throw NotRealizableError(std::to_string(p) + " vertices do not fit a non-degenerate simplex in " +
                             space.name() + std::to_string(space.dim()));
  }

  // Gram matrix of the vectors describing vertices 1..p-1 relative to vertex 0.
  Mat h(p - 1, p - 1);
  Vec lead(p);  // non-Euclidean: <x_0, x_i>
  if (space.is_euclidean()) {
    for (Eigen::Index i = 1; i < p; ++i) {
      for (Eigen::Index j = 1; j < p; ++j) {
        const double dij = lengths(i, j);
        h(i - 1, j - 1) =
            0.5 * (lengths(0, i) * lengths(0, i) + lengths(0, j) * lengths(0, j) - dij * dij);
      }
    }
  } else {
    const double eps = space.kind() == Geometry::Sphere ? 1.0 : -1.0;
    for (Eigen::Index i = 0; i < p; ++i) lead(i) = i == 0 ? 1.0 : space.c(lengths(0, i));
    for (Eigen::Index i = 1; i < p; ++i) {
      for (Eigen::Index j = 1; j < p; ++j) {
        const double mij = i == j ? 1.0 : space.c(lengths(i, j));
        h(i - 1, j - 1) = eps * (mij - lead(i) * lead(j));
      }
    }
  }

  // Sequential orthogonalization = Cholesky with explicit pivot checks.
  const Eigen::Index q = p - 1;
  Mat l = Mat::Zero(q, q);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) scale = std::max(scale, std::abs(h(i, i)));
  for (Eigen::Index j = 0; j < q; ++j) {
    double d = h(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 1e-12 * std::max(scale, 1e-300))) {
      std::ostringstream os;
      os << "leading minor " << j + 2 << " (vertices 0.." << j + 1 << ") has pivot " << d
         << "; no non-degenerate simplex in " << space.name();
      throw NotRealizableError(os.str());
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < q; ++i) {
      l(i, j) = (h(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }

  Mat out = Mat::Zero(p, space.ambient_dim());
  if (space.is_euclidean()) {
    for (Eigen::Index i = 1; i < p; ++i) out.row(i).head(q) = l.row(i - 1);
  } else {
    out(0, 0) = 1.0;
    for (Eigen::Index i = 1; i < p; ++i) {
      out(i, 0) = lead(i);
      out.row(i).segment(1, q) = l.row(i - 1);
    }
  }
  return out;
}

SimplexFrame simplex_frame(const Mat& vertices) {
  const Eigen::Index n = vertices.rows();
  if (n < 2 || vertices.cols() != n) {
    throw DegenerateSimplexError("need n points in R^n with n >= 2");
  }
  Mat edges(n - 1, n);
  for (Eigen::Index j = 1; j < n; ++j) edges.row(j - 1) = vertices.row(j) - vertices.row(0);
  Eigen::JacobiSVD<Mat> svd(edges, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= kRankTolerance * sv(0)) {
    throw DegenerateSimplexError("vertices are affinely dependent");
  }
  SimplexFrame f;
  f.vertices = vertices;
  f.m = svd.matrixV().col(n - 1);
  Mat oriented(n, n);
  oriented.topRows(n - 1) = edges;
  oriented.row(n - 1) = f.m.transpose();
  if (oriented.determinant() < 0) f.m = -f.m;

  f.altitudes.resize(n);
  f.normals.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    const Vec origin = vertices.row(others[0]).transpose();
    Vec foot = origin;
    if (others.size() > 1) {
      Mat d(n, static_cast<Eigen::Index>(others.size()) - 1);
      for (size_t k = 1; k < others.size(); ++k) {
        d.col(static_cast<Eigen::Index>(k) - 1) = vertices.row(others[k]).transpose() - origin;
      }
      const Vec rhs = vertices.row(i).transpose() - origin;
      foot += d * d.colPivHouseholderQr().solve(rhs);
    }
    const Vec v = vertices.row(i).transpose() - foot;
    f.altitudes(i) = v.norm();
    f.normals.row(i) = (v / f.altitudes(i)).transpose();
  }
  f.gram = f.normals * f.normals.transpose();
  return f;
}

SimplexFrame realize_from_normal_gram(const Mat& gram) {
  require_square_symmetric(gram, "normal Gram matrix", 1e-10);
  const Eigen::Index n = gram.rows();
  if (n < 2) throw ShapeError("normal Gram matrix must be at least 2x2");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(gram(i, i) - 1.0) > 1e-9) throw ShapeError("normal Gram matrix needs a unit diagonal");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (gram + gram.transpose()));
  const Vec& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) < -kRankTolerance * top) {
      std::ostringstream os;
      os << "not positive semidefinite (eigenvalue " << lambda(i) << ")";
      throw RankError(os.str());
    }
    if (std::abs(lambda(i)) < kRankTolerance * top) ++zeros;
  }
  if (n - zeros != n - 1) {
    throw RankError("rank " + std::to_string(n - zeros) + ", expected " + std::to_string(n - 1));
  }
  const Vec kernel = eig.eigenvectors().col(0);
  const double kmax = kernel.cwiseAbs().maxCoeff();
  const bool positive = (kernel.array() > kRankTolerance * kmax).all();
  const bool negative = (kernel.array() < -kRankTolerance * kmax).all();
  if (!positive && !negative) throw SignError("kernel vector changes sign; not a simplex normal fan");
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    Mat sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (size_t a = 0; a < idx.size(); ++a) {
      for (size_t b = 0; b < idx.size(); ++b) {
        sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = gram(idx[a], idx[b]);
      }
    }
    if (std::abs(sub.determinant()) < 1e-12) {
      throw MinorError("proper principal minor over mask " + std::to_string(mask) + " vanishes");
    }
  }

  // Normals in R^{n-1}: G = N N^T.
  Mat normals(n, n - 1);
  for (Eigen::Index c = 1; c < n; ++c) {
    normals.col(c - 1) = eig.eigenvectors().col(c) * std::sqrt(lambda(c));
  }
  // Facet i lies on <n_i, x> = -1; vertex j is where all facets i != j meet.
  Mat verts = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Mat a(n - 1, n - 1);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) a.row(row++) = normals.row(i);
    }
    verts.row(j).head(n - 1) = a.fullPivLu().solve(-Vec::Ones(n - 1)).transpose();
  }
  SimplexFrame f = simplex_frame(verts);
  verts /= f.altitudes.minCoeff();
  return simplex_frame(verts);
}

double facet_side(const ModelSpace& space, const Mat& facet, const Vec& w) {
  const Eigen::Index n = space.dim();
  if (space.is_euclidean()) {
    Mat a(n, n);
    a.row(0) = w.transpose();
    for (Eigen::Index k = 1; k < n; ++k) a.row(k) = facet.row(k) - facet.row(0);
    return a.determinant();
  }
  Mat a(n + 1, n + 1);
  for (Eigen::Index k = 0; k < n; ++k) a.row(k) = facet.row(k);
  a.row(n) = w.transpose();
  return ((n - 1) % 2 ? -1.0 : 1.0) * a.determinant();
}

double dihedral_angle(const Polyhedron& p, const Simplex& ridge) {
  const int r = p.complex->ridge_index(ridge);
  if (r < 0) throw DegenerateFacetError("ridge is not a ridge of the complex");
  return dihedral_angle(p, r);
}

double dihedral_angle(const Polyhedron& p, int ridge_index) {
  const auto& k = *p.complex;
  const Ridge& ridge = k.ridges()[static_cast<size_t>(ridge_index)];
  const ModelSpace& space = p.space;
  const auto g = [&](const Vec& a, const Vec& b) { return space.tangent_inner(a, b); };
  const Simplex& fa = k.facets()[static_cast<size_t>(ridge.facet_a)];
  const Simplex& fb = k.facets()[static_cast<size_t>(ridge.facet_b)];
  const auto opposite = [&](const Simplex& f) {
    for (int v : f) {
      if (!std::binary_search(ridge.vertices.begin(), ridge.vertices.end(), v)) return v;
    }
    return -1;
  };
  const Mat rv = p.points(ridge.vertices);
  const Eigen::Index nr = rv.rows();

  Vec base;
  if (space.is_euclidean()) {
    base = rv.colwise().mean().transpose();
  } else {
    base = pseudo_linear_point(space, rv, Vec::Constant(nr, 1.0 / static_cast<double>(nr)));
  }
  const auto to_tangent = [&](const Vec& v) -> Vec {
    if (space.is_euclidean()) return v - base;
    return v - space.inner(v, base) * base;
  };
  double scale = 0.0;
  for (Eigen::Index i = 0; i < nr; ++i) scale = std::max(scale, (rv.row(i).transpose() - base).norm());
  scale = std::max(scale, 1e-300);

  std::vector<Vec> tangents;
  for (Eigen::Index i = 0; i < nr; ++i) {
    Vec t = orthogonalize(to_tangent(rv.row(i).transpose()), tangents, g);
    const double len = std::sqrt(std::max(0.0, g(t, t)));
    if (len > 1e-9 * scale) tangents.push_back(t / len);
  }
  if (static_cast<Eigen::Index>(tangents.size()) != nr - 1) {
    throw DegenerateFacetError("ridge is degenerate");
  }
  const auto conormal = [&](int v) -> Vec {
    Vec c = orthogonalize(to_tangent(p.point(v)), tangents, g);
    const double len = std::sqrt(std::max(0.0, g(c, c)));
    if (!(len > 1e-9 * std::max(scale, (p.point(v) - base).norm()))) {
      throw DegenerateFacetError("facet is degenerate at its ridge");
    }
    return c / len;
  };
  const Vec ca = conormal(opposite(fa));
  const Vec cb = conormal(opposite(fb));

  std::vector<Vec> span = tangents;
  span.push_back(ca);
  Vec e2;
  double best = -1.0;
  for (Eigen::Index axis = 0; axis < space.ambient_dim(); ++axis) {
    Vec v = Vec::Unit(space.ambient_dim(), axis);
    if (!space.is_euclidean()) v = v - space.inner(v, base) * base;
    v = orthogonalize(v, span, g);
    const double len = g(v, v);
    if (len > best) {
      best = len;
      e2 = v;
    }
  }
  e2 /= std::sqrt(best);
  if (facet_side(space, p.points(fa), e2) > 0) e2 = -e2;

  double theta = std::atan2(g(cb, e2), g(cb, ca));
  if (theta <= 0.0) theta += 2.0 * kPi;
  return theta;
}

Vec pseudo_linear_point(const ModelSpace& space, const Mat& vertices, const Vec& beta) {
  if (space.is_euclidean()) throw ShapeError("pseudo-linear maps need a non-Euclidean space");
  if (beta.size() != vertices.rows()) throw ShapeError("barycentric size mismatch");
  if ((beta.array() < -1e-15).any() || std::abs(beta.sum() - 1.0) > 1e-12) {
    throw ShapeError("barycentric coordinates must be nonnegative and sum to 1");
  }
  const Vec s = vertices.transpose() * beta;
  const double q = space.inner(s, s);
  if (!(q > 1e-12)) throw NullCombinationError("combination has non-positive norm");
  return s / std::sqrt(q);
}

double simplex_measure(const ModelSpace& space, const Mat& v) {
  const Eigen::Index k = v.rows() - 1;
  if (k < 0) throw ShapeError("empty simplex");
  if (k == 0) return 1.0;
  if (space.is_euclidean()) {
    Mat e(k, v.cols());
    for (Eigen::Index i = 1; i <= k; ++i) e.row(i - 1) = v.row(i) - v.row(0);
    const double det = (e * e.transpose()).determinant();
    return std::sqrt(std::max(0.0, det)) / std::tgamma(static_cast<double>(k) + 1.0);
  }
  if (k == 1) return distance(space, v.row(0).transpose(), v.row(1).transpose());
  if (k == 2) {
    const auto angle = [&](Eigen::Index at, Eigen::Index b, Eigen::Index c) {
      const Vec x = v.row(at).transpose();
      const Vec tb = v.row(b).transpose() - space.inner(v.row(b).transpose(), x) * x;
      const Vec tc = v.row(c).transpose() - space.inner(v.row(c).transpose(), x) * x;
      const double gbc = space.tangent_inner(tb, tc);
      const double cross2 =
          space.tangent_inner(tb, tb) * space.tangent_inner(tc, tc) - gbc * gbc;
      return std::atan2(std::sqrt(std::max(0.0, cross2)), gbc);
    };
    const double sum = angle(0, 1, 2) + angle(1, 2, 0) + angle(2, 0, 1);
    return space.kind() == Geometry::Sphere ? sum - kPi : kPi - sum;
  }
  throw ShapeError("non-Euclidean simplex measure supports dimension <= 2");
}

}  // namespace flexilab
