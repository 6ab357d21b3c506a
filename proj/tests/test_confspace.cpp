#include <cmath>
#include <random>

#include "doctest.h"
#include "flexilab/confspace.hpp"
#include "flexilab/errors.hpp"
#include "flexilab/families.hpp"
#include "flexilab/volumetrics.hpp"
#include "support.hpp"

using namespace flexilab;

namespace {

ConstraintSystem pinned_at(const Polyhedron& p, Simplex facet) {
  return build_constraint_system(p.complex, edge_lengths(p), p.space, facet, p.points(facet));
}

ConstraintSystem pinned_default(const Polyhedron& p) { return pinned_at(p, default_pinned_facet(*p.complex)); }

Polyhedron random_near(const Polyhedron& base, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Polyhedron p = base;
  for (Eigen::Index i = 0; i < p.coords.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.coords.cols(); ++j) p.coords(i, j) += g(rng);
  }
  if (!p.space.is_euclidean()) {
    for (Eigen::Index i = 0; i < p.coords.rows(); ++i) {
      Vec x = p.coords.row(i).transpose();
      if (p.space.kind() == Geometry::Sphere) {
        x.normalize();
      } else {
        x(0) = std::sqrt(1.0 + x.tail(x.size() - 1).squaredNorm());
      }
      p.coords.row(i) = x.transpose();
    }
  }
  return p;
}

Polyhedron small_octahedron(const ModelSpace& space, double eps) {
  Mat c = Mat::Zero(6, 4);
  for (int i = 0; i < 3; ++i) {
    c(i, i + 1) = eps;
    c(i + 3, i + 1) = -eps;
  }
  for (int v = 0; v < 6; ++v) {
    c(v, 0) = space.kind() == Geometry::Sphere ? std::sqrt(1 - eps * eps) : std::sqrt(1 + eps * eps);
  }
  return Polyhedron{shared_cross_polytope(3), space, c};
}

Polyhedron elliptic_sample(double fraction) {
  const FlexFamily f = testing::fixture_family("elliptic_n3.json");
  return f(f.lower() + fraction * (f.upper() - f.lower()));
}

}  // namespace

TEST_SUITE("confspace") {

TEST_CASE("system sizes") {
  const Polyhedron oct = testing::regular_octahedron();
  const ConstraintSystem e = build_constraint_system(oct.complex, edge_lengths(oct), oct.space);
  CHECK(e.variable_count() == 9);
  CHECK(e.equation_count() == 9);

  const auto k4 = shared_cross_polytope(4);
  const ConstraintSystem four = build_constraint_system(k4, Vec::Constant(24, std::sqrt(2.0)), ModelSpace::euclidean(4));
  CHECK(four.variable_count() == 16);
  CHECK(four.equation_count() == 18);

  const Polyhedron s = small_octahedron(ModelSpace::sphere(3), 0.3);
  const ConstraintSystem sph = build_constraint_system(s.complex, edge_lengths(s), s.space);
  CHECK(sph.variable_count() == 12);
  int norms = 0;
  int products = 0;
  for (const Equation& q : sph.equations()) (q.kind == EquationKind::Norm ? norms : products)++;
  CHECK(norms == 3);
  CHECK(products == 9);
}

TEST_CASE("missing lengths are rejected") {
  const Polyhedron oct = testing::regular_octahedron();
  Vec l = edge_lengths(oct);
  l(4) = std::nan("");
  CHECK_THROWS_AS(build_constraint_system(oct.complex, l, oct.space), MissingLengthError);
  CHECK_THROWS_AS(build_constraint_system(oct.complex, l.head(5), oct.space), MissingLengthError);
}

TEST_CASE("default pin realizes the pinned lengths") {
  const Polyhedron p = random_near(testing::regular_octahedron(), 0.1, 4);
  const ConstraintSystem sys = build_constraint_system(p.complex, edge_lengths(p), p.space);
  const Simplex pin = default_pinned_facet(*p.complex);
  const Mat lifted = sys.lift(Vec::Zero(sys.variable_count()));
  for (size_t i = 0; i < pin.size(); ++i) {
    for (size_t j = i + 1; j < pin.size(); ++j) {
      const double want = (p.point(pin[i]) - p.point(pin[j])).norm();
      const double got = (lifted.row(pin[i]) - lifted.row(pin[j])).norm();
      CHECK(std::abs(want - got) < 1e-12);
    }
  }
  const Evaluation ev = sys.evaluate(Vec::Zero(sys.variable_count()));
  CHECK(ev.residual.allFinite());
}

TEST_CASE("family samples lie on the variety") {
  for (const char* name : {"rational_n3.json", "rational_n4.json", "elliptic_n3.json", "elliptic_n4.json"}) {
    const FlexFamily f = testing::fixture_family(name);
    const Polyhedron p = f(f.lower() + 0.37 * (f.upper() - f.lower()));
    const ConstraintSystem sys = pinned_default(p);
    CAPTURE(name);
    CHECK(testing::max_abs(sys.residual(sys.variables_from(p.coords))) < 1e-10);
  }
}

TEST_CASE("analytic Jacobian matches central differences") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.3);
  const std::vector<Polyhedron> bases{testing::regular_octahedron(), small_octahedron(ModelSpace::sphere(3), 0.4),
                                      small_octahedron(ModelSpace::hyperbolic(3), 0.4)};
  for (const Polyhedron& base : bases) {
    const ConstraintSystem sys = build_constraint_system(base.complex, edge_lengths(base), base.space);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Vec x(sys.variable_count());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
      const Evaluation ev = sys.evaluate(x);
      const double h = 1e-6;
      for (Eigen::Index c = 0; c < x.size(); ++c) {
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        const Vec fd = (sys.residual(xp) - sys.residual(xm)) / (2 * h);
        worst = std::max(worst, (fd - ev.jacobian.col(c)).cwiseAbs().maxCoeff());
      }
    }
    CAPTURE(base.space.name());
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("Jacobian column predicts a small perturbation") {
  const Polyhedron p = random_near(testing::regular_octahedron(), 0.1, 12);
  const ConstraintSystem sys = pinned_default(p);
  const Vec x = sys.variables_from(p.coords);
  const Evaluation ev = sys.evaluate(x);
  const double eps = 1e-6;
  Vec y = x;
  y(2) += eps;
  const Vec change = sys.residual(y) - ev.residual;
  CHECK((change - eps * ev.jacobian.col(2)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("rigidity dichotomy") {
  const Polyhedron oct = testing::regular_octahedron();
  const ConstraintSystem sys = pinned_default(oct);
  const RigidityReport r = rigidity_test(sys, sys.variables_from(oct.coords));
  CHECK(r.kernel_dim == 0);
  CHECK(r.min_singular_value > 1e-6);

  for (double t : {0.13, 0.41, 0.77}) {
    const Polyhedron b = elliptic_sample(t);
    const ConstraintSystem bs = pinned_default(b);
    CHECK(rigidity_test(bs, bs.variables_from(b.coords)).kernel_dim == 1);
  }

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Polyhedron g = random_near(oct, 0.15, seed);
    const ConstraintSystem gs = pinned_default(g);
    CHECK(rigidity_test(gs, gs.variables_from(g.coords)).kernel_dim == 0);
  }

  Vec off = sys.variables_from(oct.coords);
  off(0) += 0.1;
  CHECK_THROWS_AS(rigidity_test(sys, off), NotOnVarietyError);
}

TEST_CASE("tracking a rigid seed fails") {
  const Polyhedron oct = testing::regular_octahedron();
  const ConstraintSystem sys = pinned_default(oct);
  CHECK_THROWS_AS(track_flex(sys, sys.variables_from(oct.coords)), RigidError);
}

TEST_CASE("tracking reproduces the elliptic family") {
  const FlexFamily f = testing::fixture_family("elliptic_n3.json");
  const double u0 = 0.3 * f.upper();
  const Polyhedron p0 = f(u0);
  const ConstraintSystem sys = pinned_at(p0, {0, 1, 2});
  TrackOptions o;
  o.max_steps = 120;
  const TrackedPath path = track_flex(sys, sys.variables_from(p0.coords), o);
  REQUIRE(path.points.size() >= 100);
  double worst = 0.0;
  double u = u0;
  for (size_t j = 0; j < path.points.size(); ++j) {
    CHECK(path.residuals[j] < 1e-10);
    const Mat c = sys.lift(path.points[j]);
    const auto err = [&](double v) { return (f(v).coords - c).squaredNorm(); };
    double best = err(u);
    for (double h = 0.05; h > 1e-14; h *= 0.5) {
      for (bool moved = true; moved;) {
        moved = false;
        for (double d : {-h, h}) {
          const double e = err(u + d);
          if (e < best) {
            best = e;
            u += d;
            moved = true;
          }
        }
      }
    }
    worst = std::max(worst, (f(u).coords - c).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-7);
  // Arclength grows monotonically.
  for (size_t j = 1; j < path.arclength.size(); ++j) CHECK(path.arclength[j] > path.arclength[j - 1]);
}

TEST_CASE("tracked family interpolates onto the variety") {
  const Polyhedron p0 = elliptic_sample(0.2);
  auto sys = std::make_shared<const ConstraintSystem>(pinned_default(p0));
  TrackOptions o;
  o.max_steps = 30;
  auto path = std::make_shared<const TrackedPath>(track_flex(*sys, sys->variables_from(p0.coords), o));
  const FlexFamily f = tracked_family(sys, path);
  CHECK(f.kind() == FamilyKind::Tracked);
  const Vec l0 = edge_lengths(p0);
  for (double s : FlexFamily::linspace(f.lower(), f.upper(), 17)) {
    CHECK(testing::max_abs(edge_residual(f(s), l0)) < 1e-10);
  }
}

TEST_CASE("correction projects onto the variety") {
  const Polyhedron p0 = elliptic_sample(0.6);
  const ConstraintSystem sys = pinned_default(p0);
  Vec x = sys.variables_from(p0.coords);
  x.array() += 1e-3;
  const Vec y = correct(sys, x, nullptr, nullptr, 1e-13, 20);
  CHECK(testing::max_abs(sys.residual(y)) < 1e-12);
}

TEST_CASE("non-degeneracy monitor") {
  const DegeneracyReport ok = check_nondegenerate(testing::regular_octahedron());
  CHECK_FALSE(ok.degenerate());
  CHECK(ok.min_facet_ratio > 0.1);
  Polyhedron flat = testing::regular_octahedron();
  flat.coords.col(2).setZero();
  CHECK(check_nondegenerate(flat).degenerate());
}

TEST_CASE("antipodal reduction of the octahedron") {
  for (const ModelSpace& space : {ModelSpace::euclidean(3), ModelSpace::sphere(3), ModelSpace::hyperbolic(3)}) {
    const Polyhedron seed = line_symmetric_octahedron(space, 5);
    const ConstraintSystem full = build_constraint_system(seed.complex, edge_lengths(seed), seed.space);
    Involution phi = cross_polytope_antipodal(3);
    phi.kind = SymmetryKind::Line;
    const SymmetryReduction red = symmetry_reduce(full, phi);
    CAPTURE(space.name());
    if (space.is_euclidean()) {
      CHECK(red.system.variable_count() == 7);
      CHECK(red.system.equation_count() == 6);
    }
    const Mat canon = red.canonicalize(seed.coords);
    const Vec x = red.system.variables_from(canon);
    CHECK(testing::max_abs(red.system.residual(x)) < 1e-12);
    const RigidityReport r = rigidity_test(red.system, x);
    CHECK(r.kernel_dim == 1);
    const Polyhedron lifted = red.system.polyhedron(x);
    CHECK(testing::max_abs(edge_residual(lifted, edge_lengths(seed))) < 1e-12);
  }
}

TEST_CASE("lifted symmetric paths keep the symmetry") {
  const Polyhedron seed = line_symmetric_octahedron(ModelSpace::hyperbolic(3), 5);
  Involution phi = cross_polytope_antipodal(3);
  phi.kind = SymmetryKind::Line;
  TrackOptions o;
  o.step = 0.004;
  o.adaptive = false;
  o.max_steps = 200;
  const SymmetricFlex s = track_symmetric_flex(seed, phi, o);
  REQUIRE(s.path->points.size() == 201);
  const Vec iso = s.reduction->isometry;
  const Vec l0 = edge_lengths(seed);
  for (const Vec& x : s.path->points) {
    const Polyhedron p = s.reduction->system.polyhedron(x);
    CHECK(testing::max_abs(edge_residual(p, l0)) < 1e-10);
    for (int v = 0; v < 6; ++v) {
      const Vec img = iso.cwiseProduct(p.point(v));
      CHECK((img - p.point(phi(v))).norm() < 1e-12);
    }
  }
}

TEST_CASE("bad involutions are refused") {
  const Polyhedron oct = testing::regular_octahedron();
  const ConstraintSystem sys = build_constraint_system(oct.complex, edge_lengths(oct), oct.space);
  Involution edge_pair;
  edge_pair.perm = {1, 0, 2, 4, 3, 5};
  CHECK_THROWS_AS(symmetry_reduce(sys, edge_pair), SymmetryMismatchError);

  Polyhedron skew = random_near(oct, 0.2, 3);
  const ConstraintSystem ss = build_constraint_system(skew.complex, edge_lengths(skew), skew.space);
  Involution anti = cross_polytope_antipodal(3);
  CHECK_THROWS_AS(symmetry_reduce(ss, anti), SymmetryMismatchError);
}

}
