#include <cmath>
#include <random>

#include "doctest.h"
#include "flexilab/errors.hpp"
#include "flexilab/families.hpp"
#include "flexilab/volumetrics.hpp"
#include "support.hpp"

using namespace flexilab;
using doctest::Approx;

namespace {

RationalFlexSpec bricard_III_spec() { return *load_family_spec(testing::fixture("rational_n3.json")).rational; }

EllipticFlexSpec fixture_elliptic(int n) {
  return *load_family_spec(testing::fixture("elliptic_n" + std::to_string(n) + ".json")).elliptic;
}

// Distance of the b-rows from the hyperplane of the a-simplex.
double off_plane(const Polyhedron& p, const SimplexFrame& frame) {
  const int n = frame.n();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs((p.point(n + i) - frame.vertices.row(0).transpose()).dot(frame.m)));
  }
  return worst;
}

// Tangent columns brought to lambda * dn(u - sigma) form: reciprocal where
// the inverse fit is better, then the proportionality constant.
struct Normalized {
  Mat tau;
  Vec scale;
};

Normalized normalize_elliptic(const TangentProfile& tp, const EllipticFlexSpec& e) {
  const int n = static_cast<int>(tp.ridges.size());
  Normalized out{Mat::Zero(tp.values.rows(), n), Vec::Zero(n)};
  for (int i = 0; i < n; ++i) {
    std::vector<double> direct, inverse;
    for (Eigen::Index s = 0; s < tp.values.rows(); ++s) {
      if (!tp.valid[static_cast<size_t>(s)]) continue;
      const double d = jacobi(tp.sweep[static_cast<size_t>(s)] - e.sigma(i), e.k).dn;
      direct.push_back(tp.values(s, i) / d);
      inverse.push_back(1.0 / (tp.values(s, i) * d));
    }
    const auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return std::abs(*hi - *lo) / std::abs(*lo);
    };
    const bool inv = spread(inverse) < spread(direct);
    out.scale(i) = inv ? inverse.front() : direct.front();
    for (Eigen::Index s = 0; s < tp.values.rows(); ++s) {
      out.tau(s, i) = inv ? 1.0 / tp.values(s, i) : tp.values(s, i);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("families") {

TEST_CASE("lambda validation") {
  Vec l(3);
  l << 1, 1, 2;
  try {
    validate_lambda(l);
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("λ_i ≠ ±λ_j") != std::string::npos);
  }
  l << 1, -2, 2;
  CHECK_THROWS_AS(validate_lambda(l), SpecError);
  l << 0, 1, 2;
  CHECK_THROWS_AS(validate_lambda(l), SpecError);
  l << 1, 2, 3;
  CHECK_NOTHROW(validate_lambda(l));
}

TEST_CASE("rational family is flat at u = 0 and in the limit") {
  const RationalFlexSpec spec = bricard_III_spec();
  CHECK(off_plane(rational_family_eval(spec, 0.0), spec.frame) < 1e-14);
  const double far = off_plane(rational_family_eval(spec, 1e7), spec.frame);
  CHECK(far < 1e-6);
  CHECK(off_plane(rational_family_eval(spec, 1.0), spec.frame) > 1e-2);
}

TEST_CASE("Bricard type III triple keeps its edges") {
  const FlexFamily f = bricard_type_III(bricard_III_spec());
  const auto s = testing::samples(f, {-1.0, 0.5, 2.0});
  CHECK(max_relative_edge_deviation(s) < 1e-10);
  CHECK(f.kind() == FamilyKind::Rational);
}

TEST_CASE("rational families flex for n = 3..6") {
  for (int n = 3; n <= 6; ++n) {
    const FlexFamily f = testing::fixture_family("rational_n" + std::to_string(n) + ".json");
    const auto s = testing::samples(f, f.sweep(81));
    CAPTURE(n);
    CHECK(max_relative_edge_deviation(s) < 1e-9);
    CHECK(s.front().complex->vertex_count() == 2 * n);
  }
}

TEST_CASE("random rational specs flex") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 3;
    Mat v(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) v(i, j) = g(rng) + (i == j ? 2.0 : 0.0);
    }
    RationalFlexSpec spec{simplex_frame(v), Vec(n)};
    for (int i = 0; i < n; ++i) spec.lambda(i) = 0.5 + i + 0.2 * std::abs(g(rng));
    const auto s = testing::samples(make_rational_family(spec), FlexFamily::linspace(-2.7, 3.1, 30));
    CHECK(max_relative_edge_deviation(s) < 1e-9);
  }
}

TEST_CASE("elliptic Gram is symmetric and has the circular limit") {
  const EllipticFlexSpec e = fixture_elliptic(3);
  const Mat g = elliptic_gram(e);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);

  EllipticFlexSpec c = e;
  c.k = 1e-9;
  const Mat gc = elliptic_gram(c);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double li = c.lambda(i), lj = c.lambda(j), d = c.sigma(i) - c.sigma(j);
      const double expected = ((li * li + lj * lj) * std::cos(d) * std::cos(d) -
                               (1 + li * li * lj * lj) * std::sin(d) * std::sin(d)) /
                              (2 * li * lj);
      CHECK(std::abs(gc(i, j) - expected) < 1e-8);
    }
  }
}

TEST_CASE("documented elliptic spec is decided by the realization gate") {
  EllipticFlexSpec e;
  e.k = 0.5;
  e.sigma = Vec(3);
  e.sigma << 0, 0.55, 1.25;
  e.lambda = Vec(3);
  e.lambda << 0.8, 1.1, 1.7;
  const Mat g = elliptic_gram(e);
  CHECK(g.allFinite());
  // Generic lambdas give a full-rank Gram: the gate rejects it.
  const Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  const bool degenerate = std::abs(eig.eigenvalues()(0)) < 1e-9 * eig.eigenvalues().cwiseAbs().maxCoeff();
  if (degenerate) {
    CHECK_NOTHROW(elliptic_frame(e));
  } else {
    CHECK_THROWS_AS(elliptic_frame(e), GramRealizationError);
  }
}

TEST_CASE("phase collision") {
  EllipticFlexSpec e = fixture_elliptic(3);
  e.sigma(1) = e.sigma(0) + quarter_period(e.k);
  CHECK_THROWS_AS(elliptic_gram(e), PhaseCollisionError);
}

TEST_CASE("shipped elliptic specs flex and are periodic") {
  for (int n = 3; n <= 4; ++n) {
    const EllipticFlexSpec e = fixture_elliptic(n);
    const FlexFamily f = make_elliptic_family(e);
    CHECK(f.upper() == Approx(4 * quarter_period(e.k)));
    CHECK(max_relative_edge_deviation(testing::samples(f, f.sweep(81))) < 1e-9);
    for (double u : {0.3, 1.7, 2.9}) {
      CHECK((f(u).coords - f(u + f.upper()).coords).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("elliptic spec search reproduces admissible specs") {
  const auto s = search_elliptic_spec(3, 99, 2);
  REQUIRE(s.has_value());
  CHECK_NOTHROW(elliptic_frame(*s));
  const FlexFamily f = make_elliptic_family(*s);
  CHECK(max_relative_edge_deviation(testing::samples(f, f.sweep(21))) < 1e-9);
  const auto again = search_elliptic_spec(3, 99, 2);
  REQUIRE(again.has_value());
  CHECK(again->lambda == s->lambda);
}

TEST_CASE("Bricard type I has a common perpendicular bisector") {
  const FlexFamily f = bricard_type_I(fixture_elliptic(3));
  for (const Polyhedron& p : testing::samples(f, f.sweep(41))) CHECK(diagonal_bisector_deviation(p) < 1e-8);
  // A generic octahedron does not.
  Polyhedron q = testing::regular_octahedron();
  q.coords(0, 1) += 0.3;
  q.coords(4, 2) -= 0.2;
  CHECK(diagonal_bisector_deviation(q) > 1e-3);
}

TEST_CASE("rational tangents are proportional to u") {
  for (int n = 3; n <= 4; ++n) {
    const FlexFamily f = testing::fixture_family("rational_n" + std::to_string(n) + ".json");
    const TangentProfile tp = tangent_profile(f, cross_polytope_a_ridges(n), f.sweep(41));
    const auto fits = fit_proportional(tp);
    REQUIRE(static_cast<int>(fits.size()) == n);
    for (const auto& fit : fits) CHECK(fit.spread < 1e-8);
    // Ratios t_i / t_j are constant.
    CHECK(tp.valid.size() == 41);
  }
}

TEST_CASE("rigid octahedron gives constant tangent columns") {
  const Polyhedron p = testing::regular_octahedron();
  const FlexFamily still(FamilyKind::Rational, p.complex, 0.0, 1.0, [p](double) { return p; });
  const TangentProfile tp = tangent_profile(still, cross_polytope_a_ridges(3), still.sweep(5));
  for (Eigen::Index c = 0; c < tp.values.cols(); ++c) {
    CHECK(tp.values.col(c).maxCoeff() - tp.values.col(c).minCoeff() == 0.0);
  }
}

TEST_CASE("elliptic tangents follow dn and pairs satisfy the biquadratic") {
  for (int n = 3; n <= 4; ++n) {
    const EllipticFlexSpec e = fixture_elliptic(n);
    const FlexFamily f = make_elliptic_family(e);
    const auto sweep = FlexFamily::linspace(f.lower() + 0.01, f.upper() - 0.01, 61);
    const TangentProfile tp = tangent_profile(f, cross_polytope_a_ridges(n), sweep);
    const Normalized z = normalize_elliptic(tp, e);
    for (int i = 0; i < n; ++i) CHECK(std::abs(std::abs(z.scale(i)) - std::abs(e.lambda(i))) < 1e-9);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        std::vector<double> t, tp2;
        for (Eigen::Index s = 0; s < z.tau.rows(); ++s) {
          if (!tp.valid[static_cast<size_t>(s)]) continue;
          t.push_back(z.tau(s, i));
          tp2.push_back(z.tau(s, j));
        }
        const BiquadraticFit fit = fit_biquadratic(t, tp2);
        CHECK(fit.residual < 1e-10);
        const BiquadraticRelation r = biquad_coefficients(e.sigma(i) - e.sigma(j), e.k);
        const double ci = z.scale(i), cj = z.scale(j);
        Vec expected(5);
        expected << r.a / (ci * ci * cj * cj), r.b / (ci * ci), r.c / (ci * cj), r.d / (cj * cj), r.e;
        expected.normalize();
        Vec got(5);
        got << fit.relation.a, fit.relation.b, fit.relation.c, fit.relation.d, fit.relation.e;
        CAPTURE(n);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(std::min((got - expected).norm(), (got + expected).norm()) < 1e-8);
      }
    }
  }
}

TEST_CASE("plane-symmetric octahedron tracks a type II flex") {
  const SymmetricFlex s = bricard_type_II(plane_symmetric_octahedron(3));
  CHECK(s.path->points.size() >= 50);
  const auto& sys = s.reduction->system;
  CHECK(sys.variable_count() == 7);
  CHECK(sys.equation_count() == 6);
  std::vector<Polyhedron> lifted;
  for (const Vec& x : s.path->points) lifted.push_back(sys.polyhedron(x));
  const Vec l0 = edge_lengths(lifted.front());
  double worst = 0.0;
  for (const Polyhedron& p : lifted) worst = std::max(worst, testing::max_abs(edge_residual(p, l0)));
  CHECK(worst < 1e-8);
  CHECK(max_relative_edge_deviation(lifted) < 1e-9);
  // Mirror images agree under diag(1, 1, -1).
  const Involution phi = plane_symmetry_of_octahedron();
  for (const Polyhedron& p : lifted) {
    for (int v = 0; v < 6; ++v) {
      Vec img = p.point(v);
      img(2) = -img(2);
      CHECK((img - p.point(phi(v))).norm() < 1e-12);
    }
  }
  const double v0 = generalized_volume_euclidean(lifted.front());
  for (const Polyhedron& p : lifted) CHECK(std::abs(generalized_volume_euclidean(p) - v0) < 1e-8 * (1 + std::abs(v0)));
}

TEST_CASE("sweep helpers") {
  const auto s = FlexFamily::linspace(-1.0, 1.0, 5);
  REQUIRE(s.size() == 5);
  CHECK(s.front() == -1.0);
  CHECK(s.back() == 1.0);
  CHECK(s[2] == 0.0);
  CHECK_THROWS_AS(FlexFamily::linspace(0, 1, 1), ValidationError);
}

}
