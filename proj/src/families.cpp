#include "flexilab/families.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "flexilab/elliptica.hpp"
#include "flexilab/errors.hpp"

namespace flexilab {

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Rational: return "rational";
    case FamilyKind::Elliptic: return "elliptic";
    case FamilyKind::Tracked: return "tracked";
    case FamilyKind::Suspension: return "suspension";
  }
  return "unknown";
}

std::vector<double> FlexFamily::linspace(double from, double to, int steps) {
  if (steps < 2) throw ValidationError("a sweep needs at least 2 steps");
  std::vector<double> out(static_cast<size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out[static_cast<size_t>(i)] = i + 1 == steps ? to : from + (to - from) * i / (steps - 1);
  }
  return out;
}

double max_relative_edge_deviation(const std::vector<Polyhedron>& samples) {
  if (samples.empty()) return 0.0;
  const Vec ref = edge_lengths(samples.front());
  double worst = 0.0;
  for (const Polyhedron& p : samples) {
    const Vec l = edge_lengths(p);
    worst = std::max(worst, ((l - ref).array().abs() / ref.array()).maxCoeff());
  }
  return worst;
}

void validate_lambda(const Vec& lambda) {
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!std::isfinite(lambda(i)) || lambda(i) == 0.0) {
      throw SpecError("lambda_" + std::to_string(i + 1) + " must be a nonzero real");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      const double scale = std::max(std::abs(lambda(i)), std::abs(lambda(j)));
      if (std::abs(std::abs(lambda(i)) - std::abs(lambda(j))) <= 1e-12 * scale) {
        throw SpecError("λ_i ≠ ±λ_j violated for i=" + std::to_string(j + 1) +
                        ", j=" + std::to_string(i + 1));
      }
    }
  }
}

void validate(const RationalFlexSpec& spec) {
  if (spec.frame.n() < 2) throw SpecError("rational spec needs n >= 2");
  if (spec.lambda.size() != spec.frame.n()) throw SpecError("lambda count does not match the frame");
  validate_lambda(spec.lambda);
}

void validate(const EllipticFlexSpec& spec) {
  if (!(spec.k > 0.0 && spec.k < 1.0)) throw SpecError("elliptic modulus must lie in (0, 1)");
  if (spec.sigma.size() < 2 || spec.sigma.size() != spec.lambda.size()) {
    throw SpecError("sigma and lambda need equal length n >= 2");
  }
  validate_lambda(spec.lambda);
}

std::shared_ptr<const PseudoManifold> shared_cross_polytope(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const PseudoManifold>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const PseudoManifold>(cross_polytope_complex(n));
  return slot;
}

namespace {

// b_i = (a_i / alt_i + sum_j c_ij a_j + w_i) / (1 / alt_i + sum_j c_ij).
Polyhedron assemble(const SimplexFrame& frame, const Mat& coeff, const Mat& offsets) {
  const int n = frame.n();
  Mat coords(2 * n, n);
  coords.topRows(n) = frame.vertices;
  for (int i = 0; i < n; ++i) {
    double scale = 1.0 / frame.altitudes(i);
    Vec b = frame.vertices.row(i).transpose() / frame.altitudes(i);
    double magnitude = std::abs(scale);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      scale += coeff(i, j);
      magnitude = std::max(magnitude, std::abs(coeff(i, j)));
      b += coeff(i, j) * frame.vertices.row(j).transpose();
    }
    if (std::abs(scale) <= 1e-12 * magnitude) {
      throw DegenerateParameterError("prefactor of b_" + std::to_string(i + 1) + " vanishes");
    }
    b += offsets.row(i).transpose();
    coords.row(n + i) = (b / scale).transpose();
  }
  return Polyhedron{shared_cross_polytope(n), ModelSpace::euclidean(n), coords};
}

}  // namespace

Polyhedron rational_family_eval(const RationalFlexSpec& spec, double u) {
  validate(spec);
  const SimplexFrame& f = spec.frame;
  const int n = f.n();
  const Vec& lam = spec.lambda;
  Mat coeff = Mat::Zero(n, n);
  Mat offsets(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      coeff(i, j) = 2.0 * lam(i) * (lam(i) * f.gram(i, j) - lam(j)) /
                    (f.altitudes(j) * (lam(i) * lam(i) - lam(j) * lam(j)));
    }
    const double lu = lam(i) * u;
    offsets.row(i) = (2.0 * lu * (f.m - lu * f.normals.row(i).transpose()) / (lu * lu + 1.0)).transpose();
  }
  return assemble(f, coeff, offsets);
}

Mat elliptic_gram(const EllipticFlexSpec& spec) {
  validate(spec);
  const Eigen::Index n = spec.sigma.size();
  const double k2 = spec.k * spec.k;
  const double quarter = quarter_period(spec.k);
  Mat g = Mat::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double delta = spec.sigma(i) - spec.sigma(j);
      const double turns = delta / quarter;
      if (std::abs(turns - std::round(turns)) < 1e-9) {
        throw PhaseCollisionError("sigma_" + std::to_string(i + 1) + " and sigma_" +
                                  std::to_string(j + 1) + " agree modulo K");
      }
      const auto [sn, cn, dn] = jacobi(delta, spec.k);
      const double li = spec.lambda(i);
      const double lj = spec.lambda(j);
      g(i, j) = ((li * li + lj * lj) * cn * cn - (1.0 + (1.0 - k2) * li * li * lj * lj) * sn * sn) /
                (2.0 * li * lj * dn);
    }
  }
  return 0.5 * (g + g.transpose());
}

SimplexFrame elliptic_frame(const EllipticFlexSpec& spec) {
  const Mat g = elliptic_gram(spec);
  try {
    return realize_from_normal_gram(g);
  } catch (const RankError& e) {
    throw GramRealizationError(std::string("Gram matrix rejected: ") + e.what());
  } catch (const SignError& e) {
    throw GramRealizationError(std::string("Gram matrix rejected: ") + e.what());
  } catch (const MinorError& e) {
    throw GramRealizationError(std::string("Gram matrix rejected: ") + e.what());
  }
}

Polyhedron elliptic_family_eval(const EllipticFlexSpec& spec, const SimplexFrame& f, double u) {
  const int n = f.n();
  if (spec.sigma.size() != n) throw SpecError("spec and frame sizes differ");
  const double k2 = spec.k * spec.k;
  const Vec& lam = spec.lambda;
  Mat coeff = Mat::Zero(n, n);
  Mat offsets(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto [sn, cn, dn] = jacobi(spec.sigma(i) - spec.sigma(j), spec.k);
      coeff(i, j) = lam(i) * (cn * cn - (1.0 - k2) * lam(j) * lam(j) * sn * sn) /
                    (f.altitudes(j) * lam(j) * dn);
    }
    const double d = jacobi(u - spec.sigma(i), spec.k).dn;
    const double ld = lam(i) * d;
    offsets.row(i) =
        ((2.0 * ld * f.m - 2.0 * ld * ld * f.normals.row(i).transpose()) / (ld * ld + 1.0)).transpose();
  }
  return assemble(f, coeff, offsets);
}

Polyhedron elliptic_family_eval(const EllipticFlexSpec& spec, double u) {
  return elliptic_family_eval(spec, elliptic_frame(spec), u);
}

FlexFamily make_rational_family(const RationalFlexSpec& spec, double lower, double upper) {
  validate(spec);
  return FlexFamily(FamilyKind::Rational, shared_cross_polytope(spec.frame.n()), lower, upper,
                    [spec](double u) { return rational_family_eval(spec, u); });
}

FlexFamily make_elliptic_family(const EllipticFlexSpec& spec) {
  const SimplexFrame frame = elliptic_frame(spec);
  const int n = frame.n();
  return FlexFamily(FamilyKind::Elliptic, shared_cross_polytope(n), 0.0,
                    4.0 * quarter_period(spec.k),
                    [spec, frame](double u) { return elliptic_family_eval(spec, frame, u); });
}

std::optional<EllipticFlexSpec> search_elliptic_spec(int n, std::uint64_t seed, int candidates,
                                                     int max_tries) {
  if (n < 3) throw SpecError("elliptic search needs n >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::optional<EllipticFlexSpec> best;
  double best_gap = 0.0;
  int accepted = 0;
  for (int attempt = 0; attempt < max_tries && accepted < candidates; ++attempt) {
    EllipticFlexSpec spec;
    spec.k = 0.2 + 0.7 * unit(rng);
    const double period = 2.0 * quarter_period(spec.k);
    spec.sigma.resize(n);
    spec.lambda.resize(n);
    for (int i = 0; i < n; ++i) {
      spec.sigma(i) = period * unit(rng);
      spec.lambda(i) = (0.2 + 2.8 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    }
    std::sort(spec.sigma.data(), spec.sigma.data() + n);
    const double sign = spec.lambda(n - 1) < 0 ? -1.0 : 1.0;
    const auto det_at = [&](double x) {
      EllipticFlexSpec s = spec;
      s.lambda(n - 1) = x;
      return elliptic_gram(s).determinant();
    };
    try {
      constexpr int kScan = 60;
      double prev_x = sign * 0.1;
      double prev_f = det_at(prev_x);
      for (int s = 1; s < kScan; ++s) {
        const double x = sign * (0.1 + 3.9 * s / (kScan - 1));
        const double fx = det_at(x);
        if (prev_f * fx < 0.0) {
          double lo = prev_x, hi = x, flo = prev_f;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = det_at(mid);
            if ((fm < 0) == (flo < 0)) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          EllipticFlexSpec cand = spec;
          cand.lambda(n - 1) = std::abs(det_at(lo)) < std::abs(det_at(hi)) ? lo : hi;
          try {
            validate(cand);
            const SimplexFrame frame = elliptic_frame(cand);
            const Eigen::SelfAdjointEigenSolver<Mat> eig(elliptic_gram(cand));
            const double gap = eig.eigenvalues()(1) / eig.eigenvalues()(n - 1);
            const double period4 = 4.0 * quarter_period(cand.k);
            std::vector<Polyhedron> samples;
            for (double u : FlexFamily::linspace(0.0, period4, 9)) {
              samples.push_back(elliptic_family_eval(cand, frame, u));
            }
            if (max_relative_edge_deviation(samples) < 1e-11) {
              ++accepted;
              if (!best || gap > best_gap) {
                best = cand;
                best_gap = gap;
              }
            }
          } catch (const Error&) {
          }
        }
        prev_x = x;
        prev_f = fx;
      }
    } catch (const PhaseCollisionError&) {
    }
  }
  return best;
}

FlexFamily bricard_type_I(const EllipticFlexSpec& spec) {
  if (spec.sigma.size() != 3) throw SpecError("Bricard type I needs an n = 3 elliptic spec");
  return make_elliptic_family(spec);
}

FlexFamily bricard_type_III(const RationalFlexSpec& spec) {
  if (spec.frame.n() != 3) throw SpecError("Bricard type III needs an n = 3 rational spec");
  return make_rational_family(spec);
}

SymmetricFlex track_symmetric_flex(const Polyhedron& seed, const Involution& phi,
                                   const TrackOptions& options) {
  const Vec lengths = edge_lengths(seed);
  const ConstraintSystem full = build_constraint_system(seed.complex, lengths, seed.space);
  auto reduction = std::make_shared<const SymmetryReduction>(symmetry_reduce(full, phi));
  const Mat coords = reduction->canonicalize(seed.coords);
  const Vec x0 = reduction->system.variables_from(coords);
  const double mismatch = (reduction->system.lift(x0) - coords).cwiseAbs().maxCoeff();
  if (mismatch > 1e-9 * std::max(1.0, coords.cwiseAbs().maxCoeff())) {
    throw SymmetryMismatchError("seed is not symmetric under the canonical isometry");
  }
  const RigidityReport report = rigidity_test(reduction->system, x0);
  if (report.kernel_dim != 1) {
    throw TrackingFailedError("reduced kernel dimension " + std::to_string(report.kernel_dim) +
                              " at the seed; expected 1");
  }
  auto path = std::make_shared<const TrackedPath>(track_flex(reduction->system, x0, options));
  std::shared_ptr<const ConstraintSystem> system(reduction, &reduction->system);
  FlexFamily family = tracked_family(system, path);
  return SymmetricFlex{std::move(reduction), std::move(path), std::move(family)};
}

Involution plane_symmetry_of_octahedron() {
  return Involution{{3, 4, 2, 0, 1, 5}, SymmetryKind::Plane};
}

Polyhedron plane_symmetric_octahedron(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> height(0.4, 1.2);
  Mat c(6, 3);
  for (int i : {0, 1}) {
    c.row(i) << box(rng), box(rng), height(rng) * (i == 0 ? 1.0 : -1.0);
    c.row(i + 3) << c(i, 0), c(i, 1), -c(i, 2);
  }
  c.row(2) << 1.0 + 0.5 * box(rng), 0.5 * box(rng), 0.0;
  c.row(5) << -1.0 + 0.5 * box(rng), 0.5 * box(rng), 0.0;
  return Polyhedron{shared_cross_polytope(3), ModelSpace::euclidean(3), c};
}

Polyhedron line_symmetric_octahedron(const ModelSpace& space, std::uint64_t seed) {
  if (space.dim() != 3) throw ShapeError("line-symmetric octahedra live in dimension 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  const int d = space.ambient_dim();
  Mat c(6, d);
  for (int i = 0; i < 3; ++i) {
    if (space.is_euclidean()) {
      Vec p(3);
      p << box(rng), box(rng), box(rng);
      p.head(2) += 0.4 * p.head(2).normalized();
      c.row(i) = p.transpose();
      c.row(i + 3) << -p(0), -p(1), p(2);
      continue;
    }
    Vec w(3);
    w << box(rng), box(rng), box(rng);
    w.head(2) += 0.4 * w.head(2).normalized();
    const double r = 0.4 + 0.5 * (box(rng) + 1.0) / 2.0;
    const Vec dir = w.normalized();
    Vec p(4);
    if (space.kind() == Geometry::Sphere) {
      p << std::cos(r), std::sin(r) * dir(0), std::sin(r) * dir(1), std::sin(r) * dir(2);
    } else {
      p << std::cosh(r), std::sinh(r) * dir(0), std::sinh(r) * dir(1), std::sinh(r) * dir(2);
    }
    c.row(i) = p.transpose();
    c.row(i + 3) << p(0), -p(1), -p(2), p(3);
  }
  return Polyhedron{shared_cross_polytope(3), space, c};
}

SymmetricFlex bricard_type_II(const Polyhedron& seed, const TrackOptions& options) {
  if (seed.complex->vertex_count() != 6 || !seed.space.is_euclidean()) {
    throw SpecError("Bricard type II needs an octahedron in R^3");
  }
  return track_symmetric_flex(seed, plane_symmetry_of_octahedron(), options);
}

std::vector<Simplex> cross_polytope_a_ridges(int n) {
  std::vector<Simplex> out;
  for (int i = 0; i < n; ++i) {
    Simplex r;
    for (int j = 0; j < n; ++j) {
      if (j != i) r.push_back(j);
    }
    out.push_back(r);
  }
  return out;
}

TangentProfile tangent_profile(const FlexFamily& family, const std::vector<Simplex>& ridges,
                               const std::vector<double>& sweep) {
  TangentProfile out;
  out.sweep = sweep;
  out.ridges = ridges;
  out.values = Mat::Constant(static_cast<Eigen::Index>(sweep.size()),
                             static_cast<Eigen::Index>(ridges.size()),
                             std::numeric_limits<double>::quiet_NaN());
  out.valid.assign(sweep.size(), true);
  std::vector<int> index;
  for (const Simplex& r : ridges) {
    const int idx = family.complex()->ridge_index(r);
    if (idx < 0) throw ShapeError("ridge is not in the complex");
    index.push_back(idx);
  }
  for (size_t s = 0; s < sweep.size(); ++s) {
    const Polyhedron p = family(sweep[s]);
    for (size_t r = 0; r < index.size(); ++r) {
      try {
        const double half = 0.5 * dihedral_angle(p, index[r]);
        if (std::abs(std::cos(half)) < 1e-12) {
          out.valid[s] = false;
          continue;
        }
        out.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r)) = std::tan(half);
      } catch (const DegenerateFacetError&) {
        out.valid[s] = false;
      }
    }
  }
  return out;
}

std::vector<ProportionalityFit> fit_proportional(const TangentProfile& profile) {
  std::vector<ProportionalityFit> fits;
  const auto spread_of = [](const std::vector<double>& r, double* mean) {
    double m = 0.0;
    for (double v : r) m += v;
    m /= static_cast<double>(r.size());
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v - m));
    *mean = m;
    return m != 0.0 ? worst / std::abs(m) : std::numeric_limits<double>::infinity();
  };
  for (Eigen::Index c = 0; c < profile.values.cols(); ++c) {
    std::vector<double> direct;
    std::vector<double> inverse;
    for (size_t s = 0; s < profile.sweep.size(); ++s) {
      const double u = profile.sweep[s];
      const double t = profile.values(static_cast<Eigen::Index>(s), c);
      if (!profile.valid[s] || std::abs(u) < 1e-9 || !std::isfinite(t)) continue;
      direct.push_back(t / u);
      inverse.push_back(t * u);
    }
    ProportionalityFit fit;
    if (direct.empty()) {
      fit.spread = std::numeric_limits<double>::infinity();
      fits.push_back(fit);
      continue;
    }
    double md = 0.0;
    double mi = 0.0;
    const double sd = spread_of(direct, &md);
    const double si = spread_of(inverse, &mi);
    fit.inverse = si < sd;
    fit.constant = fit.inverse ? mi : md;
    fit.spread = std::min(sd, si);
    fits.push_back(fit);
  }
  return fits;
}

BiquadraticFit fit_biquadratic(const std::vector<double>& t, const std::vector<double>& tp) {
  if (t.size() != tp.size() || t.size() < 5) throw ShapeError("biquadratic fit needs >= 5 pairs");
  Mat rows(static_cast<Eigen::Index>(t.size()), 5);
  for (size_t i = 0; i < t.size(); ++i) {
    const double a = t[i];
    const double b = tp[i];
    rows.row(static_cast<Eigen::Index>(i)) << a * a * b * b, a * a, 2.0 * a * b, b * b, 1.0;
  }
  Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
  Vec v = svd.matrixV().col(4);
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
  BiquadraticFit fit;
  fit.relation = {v(0), v(1), v(2), v(3), v(4)};
  const Vec& s = svd.singularValues();
  fit.residual = s(4) / s(0);
  return fit;
}

double diagonal_bisector_deviation(const Polyhedron& p) {
  if (p.complex->vertex_count() != 6 || p.coords.cols() != 3) {
    throw ShapeError("bisector test needs an octahedron in R^3");
  }
  double mean_edge = 0.0;
  for (const Edge& e : p.complex->edges()) mean_edge += (p.point(e.first) - p.point(e.second)).norm();
  mean_edge /= static_cast<double>(p.complex->edge_count());
  Mat dirs(3, 3);
  Mat mids(3, 3);
  for (int i = 0; i < 3; ++i) {
    dirs.row(i) = (p.point(i + 3) - p.point(i)).normalized().transpose();
    mids.row(i) = (0.5 * (p.point(i + 3) + p.point(i))).transpose();
  }
  Eigen::JacobiSVD<Mat> svd(dirs, Eigen::ComputeFullV);
  const Vec axis = svd.matrixV().col(2);
  double deviation = (dirs * axis).cwiseAbs().maxCoeff();
  const Vec centre = mids.colwise().mean().transpose();
  for (int i = 0; i < 3; ++i) {
    const Vec rel = mids.row(i).transpose() - centre;
    deviation = std::max(deviation, (rel - rel.dot(axis) * axis).norm() / mean_edge);
  }
  return deviation;
}

}  // namespace flexilab
