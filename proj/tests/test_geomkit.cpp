#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "flexilab/errors.hpp"
#include "flexilab/families.hpp"
#include "flexilab/geomkit.hpp"
#include "support.hpp"

using namespace flexilab;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Mat pairwise(const ModelSpace& space, const Mat& pts) {
  Mat l = Mat::Zero(pts.rows(), pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.rows(); ++j) {
      if (i != j) l(i, j) = distance(space, pts.row(i).transpose(), pts.row(j).transpose());
    }
  }
  return l;
}

Vec random_point(const ModelSpace& space, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> g(0.0, spread);
  const int d = space.dim();
  Vec x(space.ambient_dim());
  if (space.is_euclidean()) {
    for (int i = 0; i < d; ++i) x(i) = g(rng);
    return x;
  }
  Vec t(d);
  for (int i = 0; i < d; ++i) t(i) = g(rng);
  if (space.kind() == Geometry::Sphere) {
    // Points near e0 so triangles stay small and proper.
    x(0) = 1.0;
    x.tail(d) = t;
    return x.normalized();
  }
  x(0) = std::sqrt(1.0 + t.squaredNorm());
  x.tail(d) = t;
  return x;
}

Polyhedron regular_tetrahedron() {
  Mat c(4, 3);
  c << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  const std::vector<Simplex> facets{{1, 3, 2}, {0, 2, 3}, {0, 3, 1}, {0, 1, 2}};
  auto k = std::make_shared<const PseudoManifold>(PseudoManifold::build(facets));
  return Polyhedron{k, ModelSpace::euclidean(3), c};
}

}  // namespace

TEST_SUITE("geomkit") {

TEST_CASE("distance oracles") {
  CHECK(distance(ModelSpace::euclidean(3), v3(0, 0, 0), v3(3, 4, 0)) == Approx(5.0).epsilon(1e-15));
  CHECK(distance(ModelSpace::sphere(2), v3(0, 0, 1), v3(1, 0, 0)) == Approx(kPi / 2).epsilon(1e-15));
  CHECK(distance(ModelSpace::hyperbolic(2), v3(std::cosh(1.0), std::sinh(1.0), 0), v3(1, 0, 0)) ==
        Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(distance(ModelSpace::sphere(2), v3(0, 0, 2), v3(1, 0, 0)), OffModelError);
  CHECK_THROWS_AS(distance(ModelSpace::hyperbolic(2), v3(-1, 0, 0), v3(1, 0, 0)), OffModelError);
}

TEST_CASE("model space basics") {
  const ModelSpace h = ModelSpace::hyperbolic(3);
  Vec x = Vec::Zero(4);
  x(0) = 1;
  CHECK(h.inner(x, x) == 1.0);
  CHECK(h.c(0.0) == 1.0);
  CHECK(ModelSpace::sphere(3).c(kPi) == Approx(-1.0));
  CHECK(ModelSpace::sphere_volume(3) == Approx(2 * kPi * kPi));
  CHECK(ModelSpace::sphere_volume(2) == Approx(4 * kPi));
}

TEST_CASE("Cayley-Menger oracles") {
  CHECK(cayley_menger_det(Mat::Ones(4, 4) - Mat::Identity(4, 4)) == Approx(4.0).epsilon(1e-14));
  Mat pyramid(5, 3);
  pyramid << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1;
  Mat sq(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) sq(i, j) = (pyramid.row(i) - pyramid.row(j)).squaredNorm();
  }
  CHECK(std::abs(cayley_menger_det(sq)) < 1e-12);
  Mat line(3, 3);
  line << 0, 1, 4, 1, 0, 1, 4, 1, 0;
  CHECK(std::abs(cayley_menger_det(line)) < 1e-14);
}

TEST_CASE("Cayley-Menger of n+2 random points in R^n vanishes") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      Mat p(n + 2, n);
      for (int i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < n; ++j) p(i, j) = g(rng);
      }
      Mat sq(n + 2, n + 2);
      for (int i = 0; i < n + 2; ++i) {
        for (int j = 0; j < n + 2; ++j) sq(i, j) = (p.row(i) - p.row(j)).squaredNorm();
      }
      const double scale = std::pow(sq.cwiseAbs().maxCoeff(), n + 1);
      CHECK(std::abs(cayley_menger_det(sq)) < 1e-8 * scale);
    }
  }
}

TEST_CASE("realize simplex examples") {
  const Mat tri = Mat::Ones(3, 3) - Mat::Identity(3, 3);
  const Mat p = realize_simplex_from_lengths(tri, ModelSpace::euclidean(3));
  CHECK((pairwise(ModelSpace::euclidean(3), p) - tri).cwiseAbs().maxCoeff() < 1e-14);

  const Mat octant = realize_simplex_from_lengths((Mat::Ones(3, 3) - Mat::Identity(3, 3)) * (kPi / 2),
                                                  ModelSpace::sphere(2));
  CHECK((octant * octant.transpose() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);

  Mat bad(3, 3);
  bad << 0, 1, 1, 1, 0, 3, 1, 3, 0;
  CHECK_THROWS_AS(realize_simplex_from_lengths(bad, ModelSpace::euclidean(2)), NotRealizableError);
}

TEST_CASE("realize simplex round trip in all geometries") {
  std::mt19937_64 rng(11);
  for (const ModelSpace& space : {ModelSpace::euclidean(3), ModelSpace::sphere(3), ModelSpace::hyperbolic(3)}) {
    for (int trial = 0; trial < 25; ++trial) {
      Mat pts(4, space.ambient_dim());
      for (int i = 0; i < 4; ++i) pts.row(i) = random_point(space, rng, 0.5).transpose();
      const Mat l = pairwise(space, pts);
      const Mat q = realize_simplex_from_lengths(l, space);
      CAPTURE(space.name());
      CHECK((pairwise(space, q) - l).cwiseAbs().maxCoeff() < 1e-10);
      for (int i = 0; i < 4; ++i) CHECK(space.on_model(q.row(i).transpose(), 1e-12));
    }
  }
}

TEST_CASE("simplex frame oracles") {
  const double s = 1.7;
  Mat tri(3, 3);
  tri << 0, 0, 0, s, 0, 0, s / 2, s * std::sqrt(3.0) / 2, 0;
  const SimplexFrame f = simplex_frame(tri);
  for (int i = 0; i < 3; ++i) {
    CHECK(f.altitudes(i) == Approx(std::sqrt(3.0) / 2 * s).epsilon(1e-14));
    for (int j = 0; j < 3; ++j) CHECK(f.gram(i, j) == Approx(i == j ? 1.0 : -0.5).epsilon(1e-14));
  }
  Mat right(3, 3);
  right << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  const SimplexFrame r = simplex_frame(right);
  CHECK(r.altitudes(0) == Approx(1 / std::sqrt(2.0)));
  CHECK(r.altitudes(1) == Approx(1.0));
  CHECK(r.altitudes(2) == Approx(1.0));
  CHECK_THROWS_AS(simplex_frame(Mat::Zero(3, 3)), DegenerateSimplexError);
}

TEST_CASE("regular simplex Gram and its realization") {
  for (int n = 2; n <= 6; ++n) {
    Mat g = Mat::Constant(n, n, -1.0 / (n - 1));
    g.diagonal().setOnes();
    const SimplexFrame f = realize_from_normal_gram(g);
    CHECK((f.gram - g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.altitudes.minCoeff() == Approx(1.0));
    CHECK(f.altitudes.maxCoeff() == Approx(1.0));
  }
  CHECK_THROWS_AS(realize_from_normal_gram(Mat::Identity(3, 3)), RankError);
  Mat seg(2, 2);
  seg << 1, -1, -1, 1;
  const SimplexFrame f = realize_from_normal_gram(seg);
  CHECK((f.normals.row(0) + f.normals.row(1)).norm() < 1e-14);
}

TEST_CASE("frame to Gram to frame recovers the normal Gram") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int n = 3; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      Mat v(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) v(i, j) = g(rng) + (i == j ? 2.0 : 0.0);
      }
      const SimplexFrame f = simplex_frame(v);
      const SimplexFrame r = realize_from_normal_gram(f.gram);
      CHECK((r.gram - f.gram).cwiseAbs().maxCoeff() < 1e-9);
      // Similar: altitude ratios agree.
      const Vec a = f.altitudes / f.altitudes.minCoeff();
      CHECK((a - r.altitudes).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("dihedral angle oracles") {
  const Polyhedron tet = regular_tetrahedron();
  for (size_t r = 0; r < tet.complex->ridges().size(); ++r) {
    CHECK(dihedral_angle(tet, static_cast<int>(r)) == Approx(std::acos(1.0 / 3)).epsilon(1e-13));
  }
  const Polyhedron oct = testing::regular_octahedron();
  for (size_t r = 0; r < oct.complex->ridges().size(); ++r) {
    CHECK(dihedral_angle(oct, static_cast<int>(r)) == Approx(std::acos(-1.0 / 3)).epsilon(1e-13));
  }
  const Polyhedron cube = testing::fixture_mesh("cube.json");
  const Simplex diagonal_edge{0, 3};  // inside the bottom face
  const Simplex cube_edge{0, 1};
  CHECK(dihedral_angle(cube, cube_edge) == Approx(kPi / 2).epsilon(1e-13));
  CHECK(dihedral_angle(cube, diagonal_edge) == Approx(kPi).epsilon(1e-13));
}

TEST_CASE("orientation flip complements dihedral angles") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 0.2);
  Polyhedron p = testing::regular_octahedron();
  for (int i = 0; i < p.coords.rows(); ++i) {
    for (int j = 0; j < 3; ++j) p.coords(i, j) += g(rng);
  }
  Polyhedron q = p;
  q.complex = std::make_shared<const PseudoManifold>(p.complex->reversed());
  for (size_t r = 0; r < p.complex->ridges().size(); ++r) {
    const Simplex& v = p.complex->ridges()[r].vertices;
    CHECK(dihedral_angle(p, v) + dihedral_angle(q, v) == Approx(2 * kPi).epsilon(1e-12));
  }
}

TEST_CASE("non-Euclidean octahedron angles") {
  // Small regular octahedra approach the Euclidean angle from above (S^3)
  // and below (H^3).
  for (const ModelSpace& space : {ModelSpace::sphere(3), ModelSpace::hyperbolic(3)}) {
    const double eps = 0.01;
    Mat c = Mat::Zero(6, 4);
    for (int i = 0; i < 3; ++i) {
      c(i, i + 1) = eps;
      c(i + 3, i + 1) = -eps;
    }
    for (int v = 0; v < 6; ++v) {
      c(v, 0) = space.kind() == Geometry::Sphere ? std::sqrt(1 - eps * eps) : std::sqrt(1 + eps * eps);
    }
    const Polyhedron p{shared_cross_polytope(3), space, c};
    const double a = dihedral_angle(p, 0);
    CAPTURE(space.name());
    CHECK(std::abs(a - std::acos(-1.0 / 3)) < 1e-3);
    if (space.kind() == Geometry::Sphere) {
      CHECK(a > std::acos(-1.0 / 3));
    } else {
      CHECK(a < std::acos(-1.0 / 3));
    }
  }
}

TEST_CASE("pseudo-linear points") {
  const ModelSpace s = ModelSpace::sphere(2);
  Mat v(2, 3);
  v << 1, 0, 0, 0, 1, 0;
  Vec e0(2);
  e0 << 1, 0;
  CHECK((pseudo_linear_point(s, v, e0) - v.row(0).transpose()).norm() == 0.0);
  Vec half(2);
  half << 0.5, 0.5;
  const Vec m = pseudo_linear_point(s, v, half);
  CHECK(distance(s, m, v.row(0).transpose()) == Approx(kPi / 4).epsilon(1e-14));
  CHECK(distance(s, m, v.row(1).transpose()) == Approx(kPi / 4).epsilon(1e-14));
  Mat anti(2, 3);
  anti << 1, 0, 0, -1, 0, 0;
  CHECK_THROWS_AS(pseudo_linear_point(s, anti, half), NullCombinationError);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  for (const ModelSpace& space : {ModelSpace::sphere(3), ModelSpace::hyperbolic(3)}) {
    for (int trial = 0; trial < 100; ++trial) {
      Mat pts(4, 4);
      for (int i = 0; i < 4; ++i) pts.row(i) = random_point(space, rng, 0.7).transpose();
      Vec beta(4);
      for (int i = 0; i < 4; ++i) beta(i) = uni(rng);
      beta /= beta.sum();
      const Vec x = pseudo_linear_point(space, pts, beta);
      CHECK(std::abs(space.inner(x, x) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("simplex measures") {
  const ModelSpace s = ModelSpace::sphere(2);
  Mat octant = Mat::Identity(3, 3);
  CHECK(simplex_measure(s, octant) == Approx(kPi / 2).epsilon(1e-14));
  Mat tri(3, 2);
  tri << 0, 0, 1, 0, 0, 1;
  CHECK(simplex_measure(ModelSpace::euclidean(2), tri) == Approx(0.5));
  Mat seg(2, 3);
  seg << 1, 0, 0, 0, 1, 0;
  CHECK(simplex_measure(s, seg) == Approx(kPi / 2));
}

TEST_CASE("facet side is positive outward") {
  // Euclidean facets act on directions.
  const Polyhedron oct = testing::regular_octahedron();
  for (const Simplex& f : oct.complex->facets()) {
    const Mat v = oct.points(f);
    const Vec centroid = v.colwise().mean().transpose();
    CHECK(facet_side(oct.space, v, centroid) > 0.0);
    CHECK(facet_side(oct.space, v, -centroid) < 0.0);
    CHECK(std::abs(facet_side(oct.space, v, v.row(1).transpose() - v.row(0).transpose())) < 1e-15);
  }
}

}
