#include "flexilab/volumetrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <mutex>
#include <random>
#include <thread>

#include "flexilab/errors.hpp"
#include "flexilab/kernels/crossing.hpp"

namespace flexilab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxRetries = 10;
constexpr long long kShardSize = 1 << 15;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss;
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

void require_triangles(const Polyhedron& p) {
  if (!p.space.is_euclidean() || p.space.dim() != 3) {
    throw ShapeError("ray casting is implemented for surfaces in R^3");
  }
}

kernels::TriangleSoup soup_of(const Polyhedron& p) {
  kernels::TriangleSoup soup;
  for (const Simplex& f : p.complex->facets()) {
    const Vec a = p.point(f[0]);
    const Vec b = p.point(f[1]);
    const Vec c = p.point(f[2]);
    soup.add(a.data(), b.data(), c.data());
  }
  return soup;
}

double point_triangle_distance(const Vec& x, const Vec& a, const Vec& b, const Vec& c) {
  const auto segment = [&](const Vec& p, const Vec& q) {
    const Vec d = q - p;
    const double t = std::clamp((x - p).dot(d) / std::max(d.squaredNorm(), 1e-300), 0.0, 1.0);
    return (x - (p + t * d)).norm();
  };
  const Vec e1 = b - a;
  const Vec e2 = c - a;
  Eigen::Matrix2d m;
  m << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
  const Eigen::Vector2d rhs(e1.dot(x - a), e2.dot(x - a));
  const Eigen::Vector2d uv = m.fullPivLu().solve(rhs);
  if (uv.allFinite() && uv(0) >= 0 && uv(1) >= 0 && uv.sum() <= 1) {
    return (x - (a + uv(0) * e1 + uv(1) * e2)).norm();
  }
  return std::min({segment(a, b), segment(b, c), segment(c, a)});
}

// Signed ray count for one origin, redrawing the direction on degeneracy.
int cast_one(const kernels::TriangleSoup& soup, const double* o, std::mt19937_64& rng, int* retries) {
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    const Vec dir = random_unit(rng, 3);
    kernels::RayBatch ray{&o[0], &o[1], &o[2], 1, {dir(0), dir(1), dir(2)}};
    int w = 0;
    unsigned char deg = 0;
    if (kernels::crossings(soup, ray, &w, &deg) && !deg) return w;
    if (retries) ++*retries;
  }
  throw RetryExhaustedError("every redrawn ray direction hit a degeneracy");
}

// Spherical facets as linear data: functional n (positive outward) and the
// dual rows that give the cone coordinates of a point in the facet's span.
struct SphereFacet {
  Vec normal;
  Mat dual;  // 3 x 4
};

std::vector<SphereFacet> sphere_facets(const Polyhedron& p) {
  if (p.space.kind() != Geometry::Sphere || p.space.dim() != 3) {
    throw ShapeError("spherical winding is implemented for S^3");
  }
  std::vector<SphereFacet> out;
  for (const Simplex& f : p.complex->facets()) {
    const Mat v = p.points(f);
    SphereFacet sf;
    sf.normal.resize(4);
    for (int i = 0; i < 4; ++i) sf.normal(i) = facet_side(p.space, v, Vec::Unit(4, i));
    Mat m(4, 4);
    m.leftCols(3) = v.transpose();
    m.col(3) = sf.normal;
    const Eigen::FullPivLU<Mat> lu(m);
    if (!lu.isInvertible()) throw DegenerateFacetError("spherical facet spans less than a 3-space");
    sf.dual = lu.inverse().topRows(3);
    out.push_back(std::move(sf));
  }
  return out;
}

// Signed crossings of the short geodesic a -> b; false on degeneracy.
bool geodesic_crossings(const std::vector<SphereFacet>& facets, const Vec& a, const Vec& b, int* count) {
  constexpr double eps = 1e-9;
  if (a.dot(b) < -1.0 + 1e-6) return false;
  int total = 0;
  for (const SphereFacet& f : facets) {
    const double scale = f.normal.norm();
    const double fa = f.normal.dot(a) / scale;
    const double fb = f.normal.dot(b) / scale;
    if ((fa > eps && fb > eps) || (fa < -eps && fb < -eps)) continue;
    const auto cone = [&](const Vec& w) {
      const Vec beta = f.dual * w;
      const double sum = beta.cwiseAbs().sum();
      return std::pair<bool, bool>{(beta.array() > eps * sum).all(), (beta.array() > -eps * sum).all()};
    };
    if (std::abs(fa) <= eps || std::abs(fb) <= eps) {
      const Vec& end = std::abs(fa) <= eps ? a : b;
      if (cone(end).second) return false;
      continue;
    }
    const double s = fa / (fa - fb);
    const Vec w = (1.0 - s) * a + s * b;
    const auto [inside, near] = cone(w);
    if (inside) {
      total += fb > 0 ? 1 : -1;
    } else if (near) {
      return false;
    }
  }
  *count = total;
  return true;
}

int sphere_winding(const std::vector<SphereFacet>& facets, const Vec& x, const Vec& y,
                   std::mt19937_64& rng, int* retries) {
  int count = 0;
  if (geodesic_crossings(facets, x, y, &count)) return count;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    if (retries) ++*retries;
    const Vec z = random_unit(rng, 4);
    int first = 0;
    int second = 0;
    if (geodesic_crossings(facets, x, z, &first) && geodesic_crossings(facets, z, y, &second)) {
      return first + second;
    }
  }
  throw RetryExhaustedError("every detour through a random point hit a degeneracy");
}

double distance_to_image_sphere(const Polyhedron& p, const Vec& y) {
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < p.complex->vertex_count(); ++v) best = std::min(best, (p.point(v) - y).norm());
  for (const SphereFacet& f : sphere_facets(p)) {
    const double scale = f.normal.norm();
    const double off = f.normal.dot(y) / scale;
    const Vec proj = y - off * f.normal / scale;
    const Vec beta = f.dual * proj;
    if ((beta.array() >= -1e-12).all()) best = std::min(best, std::abs(off));
  }
  return best;
}

template <typename Shard>
void run_shards(long long shards, Shard&& shard) {
  const int threads = std::max(1, std::min<int>(worker_threads(), static_cast<int>(shards)));
  std::atomic<long long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (long long s = next++; s < shards; s = next++) {
      try {
        shard(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("FLEXILAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

double generalized_volume_euclidean(const Polyhedron& p) {
  if (!p.space.is_euclidean()) throw ShapeError("cone-sum volume needs a Euclidean polyhedron");
  const int n = p.space.dim();
  double total = 0.0;
  for (const Simplex& f : p.complex->facets()) total += p.points(f).determinant();
  return total / std::tgamma(n + 1.0);
}

int winding_number(const Polyhedron& p, const Vec& x, std::uint64_t seed) {
  require_triangles(p);
  const auto soup = soup_of(p);
  double scale = 0.0;
  for (size_t k = 0; k < soup.size(); ++k) scale = std::max(scale, soup.scale[k]);
  for (const Simplex& f : p.complex->facets()) {
    if (point_triangle_distance(x, p.point(f[0]), p.point(f[1]), p.point(f[2])) <= 1e-9 * std::max(scale, 1.0)) {
      throw OnSurfaceError("query point lies on the polyhedron");
    }
  }
  std::mt19937_64 rng(splitmix(seed));
  return cast_one(soup, x.data(), rng, nullptr);
}

int winding_number_sphere(const Polyhedron& p, const Vec& x, const Vec& y, std::uint64_t seed) {
  if (!p.space.on_model(x) || !p.space.on_model(y)) throw OffModelError("points must lie on S^3");
  if (distance_to_image_sphere(p, x) <= 1e-9) throw OnSurfaceError("query point lies on the polyhedron");
  if (distance_to_image_sphere(p, y) <= 1e-9) throw OnSurfaceError("base point lies on the polyhedron");
  std::mt19937_64 rng(splitmix(seed));
  return sphere_winding(sphere_facets(p), x, y, rng, nullptr);
}

Vec default_base_point(const Polyhedron& p, std::uint64_t seed) {
  Vec y = Vec::Zero(4);
  y(0) = -1.0;
  if (distance_to_image_sphere(p, y) > 1e-6) return y;
  std::mt19937_64 rng(splitmix(seed ^ 0x5bd1e995ULL));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    y = random_unit(rng, 4);
    if (distance_to_image_sphere(p, y) > 1e-3) return y;
  }
  throw RetryExhaustedError("no base point away from the polyhedron");
}

double spherical_representative(double volume, int n) {
  const double sigma = ModelSpace::sphere_volume(n);
  double r = std::fmod(volume, sigma);
  if (r > 0.5 * sigma) r -= sigma;
  if (r <= -0.5 * sigma) r += sigma;
  return r;
}

MonteCarloEstimate monte_carlo_volume(const Polyhedron& p, long long samples, std::uint64_t seed,
                                      std::optional<Vec> base_point) {
  if (samples < 1000) throw ValidationError("Monte Carlo needs at least 1000 samples");
  const long long shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<double> sum(static_cast<size_t>(shards), 0.0);
  std::vector<double> sum_sq(static_cast<size_t>(shards), 0.0);
  std::vector<int> retries(static_cast<size_t>(shards), 0);
  MonteCarloEstimate out;
  out.samples = samples;
  const auto shard_count = [&](long long s) {
    return std::min(kShardSize, samples - s * kShardSize);
  };

  double measure = 0.0;
  if (p.space.is_euclidean()) {
    require_triangles(p);
    const Vec lo = p.coords.colwise().minCoeff().transpose();
    const Vec hi = p.coords.colwise().maxCoeff().transpose();
    const Vec pad = 0.1 * (hi - lo).cwiseMax(1e-12);
    const Vec box_lo = lo - pad;
    const Vec box_hi = hi + pad;
    measure = (box_hi - box_lo).prod();
    const auto soup = soup_of(p);
    run_shards(shards, [&](long long s) {
      std::mt19937_64 rng(splitmix(seed ^ splitmix(static_cast<std::uint64_t>(s) + 1)));
      const long long m = shard_count(s);
      std::vector<double> ox(static_cast<size_t>(m)), oy(static_cast<size_t>(m)), oz(static_cast<size_t>(m));
      std::uniform_real_distribution<double> ux(box_lo(0), box_hi(0));
      std::uniform_real_distribution<double> uy(box_lo(1), box_hi(1));
      std::uniform_real_distribution<double> uz(box_lo(2), box_hi(2));
      for (long long i = 0; i < m; ++i) {
        ox[static_cast<size_t>(i)] = ux(rng);
        oy[static_cast<size_t>(i)] = uy(rng);
        oz[static_cast<size_t>(i)] = uz(rng);
      }
      std::vector<int> w(static_cast<size_t>(m));
      std::vector<unsigned char> deg(static_cast<size_t>(m));
      bool ok = false;
      for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
        const Vec dir = random_unit(rng, 3);
        kernels::RayBatch batch{ox.data(), oy.data(), oz.data(), static_cast<size_t>(m),
                                {dir(0), dir(1), dir(2)}};
        ok = kernels::crossings(soup, batch, w.data(), deg.data());
        if (!ok) ++retries[static_cast<size_t>(s)];
      }
      if (!ok) throw RetryExhaustedError("every batch direction was parallel to a facet");
      double acc = 0.0;
      double acc_sq = 0.0;
      for (long long i = 0; i < m; ++i) {
        int value = w[static_cast<size_t>(i)];
        if (deg[static_cast<size_t>(i)]) {
          const double o[3] = {ox[static_cast<size_t>(i)], oy[static_cast<size_t>(i)], oz[static_cast<size_t>(i)]};
          value = cast_one(soup, o, rng, &retries[static_cast<size_t>(s)]);
        }
        acc += value;
        acc_sq += static_cast<double>(value) * value;
      }
      sum[static_cast<size_t>(s)] = acc;
      sum_sq[static_cast<size_t>(s)] = acc_sq;
    });
  } else if (p.space.kind() == Geometry::Sphere) {
    const auto facets = sphere_facets(p);
    const Vec y = base_point ? *base_point : default_base_point(p, seed);
    out.base_point = y;
    measure = ModelSpace::sphere_volume(p.space.dim());
    run_shards(shards, [&](long long s) {
      std::mt19937_64 rng(splitmix(seed ^ splitmix(static_cast<std::uint64_t>(s) + 1)));
      const long long m = shard_count(s);
      double acc = 0.0;
      double acc_sq = 0.0;
      for (long long i = 0; i < m; ++i) {
        const Vec x = random_unit(rng, 4);
        const int value = sphere_winding(facets, x, y, rng, &retries[static_cast<size_t>(s)]);
        acc += value;
        acc_sq += static_cast<double>(value) * value;
      }
      sum[static_cast<size_t>(s)] = acc;
      sum_sq[static_cast<size_t>(s)] = acc_sq;
    });
  } else {
    throw ShapeError("Monte Carlo volume is defined for R^3 and S^3");
  }

  double total = 0.0;
  double total_sq = 0.0;
  for (long long s = 0; s < shards; ++s) {
    total += sum[static_cast<size_t>(s)];
    total_sq += sum_sq[static_cast<size_t>(s)];
    out.retries += retries[static_cast<size_t>(s)];
  }
  const double n = static_cast<double>(samples);
  const double mean = total / n;
  const double var = std::max(0.0, total_sq / n - mean * mean) * n / (n - 1.0);
  out.estimate = measure * mean;
  out.std_error = measure * std::sqrt(var / n);
  if (!p.space.is_euclidean()) out.estimate = spherical_representative(out.estimate, p.space.dim());
  return out;
}

SchlafliResult schlafli_variation(const std::vector<Polyhedron>& samples) {
  SchlafliResult out;
  if (samples.empty()) return out;
  const ModelSpace& space = samples.front().space;
  if (space.is_euclidean()) throw ShapeError("Schlafli variation needs S^n or H^n");
  const int n = space.dim();
  const double coefficient = (space.kind() == Geometry::Sphere ? 1.0 : -1.0) / (n - 1);
  const auto& ridges = samples.front().complex->ridges();
  const size_t r = ridges.size();
  Mat angles(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(r));
  Mat measures(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(r));
  for (size_t s = 0; s < samples.size(); ++s) {
    for (size_t f = 0; f < r; ++f) {
      angles(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f)) =
          dihedral_angle(samples[s], static_cast<int>(f));
      measures(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f)) =
          simplex_measure(space, samples[s].points(ridges[f].vertices));
    }
  }
  const auto wrap = [](double a) {
    a = std::remainder(a, 2.0 * kPi);
    return a;
  };
  const auto integrate = [&](size_t stride, std::vector<double>* terms) {
    double total = 0.0;
    for (size_t s = 0; s + stride < samples.size(); s += stride) {
      double term = 0.0;
      double largest = 0.0;
      for (size_t f = 0; f < r; ++f) {
        const auto a = static_cast<Eigen::Index>(s);
        const auto b = static_cast<Eigen::Index>(s + stride);
        const auto c = static_cast<Eigen::Index>(f);
        const double da = wrap(angles(b, c) - angles(a, c));
        if (stride == 1) out.max_angle_step = std::max(out.max_angle_step, std::abs(da));
        const double piece = 0.5 * (measures(a, c) + measures(b, c)) * da;
        largest = std::max(largest, std::abs(piece));
        term += piece;
      }
      if (terms) {
        terms->push_back(term);
        out.max_abs_piece.push_back(largest);
      }
      total += term;
    }
    return total;
  };
  const double fine = integrate(1, &out.step_terms);
  if (out.max_angle_step >= 0.05) {
    throw CoarsePathError("a dihedral angle moves by " + std::to_string(out.max_angle_step) +
                          " rad in one step; refine the path");
  }
  out.trapezoid = coefficient * fine;
  out.delta = out.trapezoid;
  if (samples.size() >= 3 && samples.size() % 2 == 1) {
    const double coarse = coefficient * integrate(2, nullptr);
    out.delta = out.trapezoid + (out.trapezoid - coarse) / 3.0;
  }
  out.cumulative.push_back(0.0);
  for (double t : out.step_terms) out.cumulative.push_back(out.cumulative.back() + coefficient * t);
  return out;
}

std::pair<double, double> quadrilateral_diagonal_range(const Vec& sides) {
  if (sides.size() != 4) throw ShapeError("a quadrilateral has four sides");
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (!(sides(i) > 0.0 && sides(i) < kPi)) throw NotRealizableError("side lengths must lie in (0, pi)");
  }
  const double lo = std::max(std::abs(sides(0) - sides(1)), std::abs(sides(2) - sides(3)));
  const double hi = std::min({sides(0) + sides(1), sides(2) + sides(3), 2.0 * kPi - sides(0) - sides(1),
                              2.0 * kPi - sides(2) - sides(3), kPi});
  return {lo, hi};
}

SphericalPolygon spherical_flexible_quadrilateral(const Vec& sides, double d) {
  const auto [lo, hi] = quadrilateral_diagonal_range(sides);
  if (!(d > lo && d < hi)) {
    throw NotRealizableError("diagonal " + std::to_string(d) + " outside the feasible interval (" +
                             std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
  Vec v0 = Vec::Zero(4);
  v0(1) = 1.0;
  Vec v2 = Vec::Zero(4);
  v2(1) = std::cos(d);
  v2(2) = std::sin(d);
  Vec up = Vec::Zero(4);
  up(3) = 1.0;
  const auto apex = [&](double to0, double to2, double side) {
    // <x, v0> = cos(to0), <x, v2> = cos(to2), x = alpha v0 + beta v2 + gamma up.
    Eigen::Matrix2d m;
    m << 1.0, std::cos(d), std::cos(d), 1.0;
    const Eigen::Vector2d ab = m.inverse() * Eigen::Vector2d(std::cos(to0), std::cos(to2));
    const Vec planar = ab(0) * v0 + ab(1) * v2;
    const double g2 = 1.0 - planar.squaredNorm();
    if (!(g2 > 0.0)) throw NotRealizableError("triangle with the diagonal is degenerate");
    return Vec(planar + side * std::sqrt(g2) * up);
  };
  SphericalPolygon out;
  out.points.resize(4, 4);
  out.points.row(0) = v0.transpose();
  out.points.row(1) = apex(sides(0), sides(1), -1.0).transpose();
  out.points.row(2) = v2.transpose();
  out.points.row(3) = apex(sides(3), sides(2), 1.0).transpose();
  const ModelSpace s3 = ModelSpace::sphere(3);
  Mat t1(3, 4);
  t1 << out.points.row(0), out.points.row(1), out.points.row(2);
  Mat t2(3, 4);
  t2 << out.points.row(0), out.points.row(2), out.points.row(3);
  out.area = simplex_measure(s3, t1) + simplex_measure(s3, t2);
  return out;
}

Polyhedron suspension_s3(const Mat& base) {
  const int m = static_cast<int>(base.rows());
  if (m < 3 || base.cols() != 4) throw ShapeError("suspension needs a polygon of >= 3 points in R^4");
  for (int i = 0; i < m; ++i) {
    if (std::abs(base(i, 0)) > 1e-12 || std::abs(base.row(i).norm() - 1.0) > 1e-10) {
      throw OffModelError("base vertices must lie on the equatorial sphere");
    }
  }
  std::vector<Simplex> facets;
  std::vector<std::string> names;
  for (int i = 0; i < m; ++i) names.push_back("v" + std::to_string(i));
  names.push_back("north");
  names.push_back("south");
  for (int i = 0; i < m; ++i) {
    const int j = (i + 1) % m;
    facets.push_back({j, i, m});
    facets.push_back({i, j, m + 1});
  }
  Mat coords = Mat::Zero(m + 2, 4);
  coords.topRows(m) = base;
  coords(m, 0) = 1.0;
  coords(m + 1, 0) = -1.0;
  auto complex = std::make_shared<const PseudoManifold>(PseudoManifold::build(facets, names));
  return Polyhedron{complex, ModelSpace::sphere(3), coords};
}

FlexFamily bipyramid_family(const Vec& sides, double lower, double upper) {
  const Polyhedron first = suspension_s3(spherical_flexible_quadrilateral(sides, lower).points);
  auto complex = first.complex;
  return FlexFamily(FamilyKind::Suspension, complex, lower, upper, [sides, complex](double d) {
    Polyhedron p = suspension_s3(spherical_flexible_quadrilateral(sides, d).points);
    p.complex = complex;
    return p;
  });
}

std::string to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::ConeSum: return "cone-sum";
    case VolumeMethod::SchlafliDelta: return "schlafli-delta";
    case VolumeMethod::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

VolumeMethod volume_method_from_string(const std::string& s) {
  if (s == "cone-sum") return VolumeMethod::ConeSum;
  if (s == "schlafli-delta" || s == "schlafli") return VolumeMethod::SchlafliDelta;
  if (s == "monte-carlo" || s == "mc") return VolumeMethod::MonteCarlo;
  throw ValidationError("unknown volume method '" + s + "'");
}

VolumeReport bellows_report(const FlexFamily& family, const std::vector<double>& sweep,
                            VolumeMethod method, const ReportOptions& options) {
  if (sweep.size() < 2) throw ValidationError("a sweep needs at least 2 samples");
  VolumeReport report;
  report.method = method;
  report.sweep = sweep;
  std::vector<Polyhedron> samples;
  for (double u : sweep) samples.push_back(family(u));
  const Vec ref = edge_lengths(samples.front());
  for (const Polyhedron& p : samples) {
    report.edge_dev.push_back(((edge_lengths(p) - ref).array().abs() / ref.array()).maxCoeff());
  }
  const ModelSpace& space = samples.front().space;
  switch (method) {
    case VolumeMethod::ConeSum: {
      for (const Polyhedron& p : samples) report.volumes.push_back(generalized_volume_euclidean(p));
      const double tol = options.tolerance > 0 ? options.tolerance : 1e-8;
      report.tolerance = tol * (1.0 + std::abs(report.volumes.front()));
      break;
    }
    case VolumeMethod::SchlafliDelta: {
      report.volumes = schlafli_variation(samples).cumulative;
      report.tolerance = options.tolerance > 0 ? options.tolerance : 1e-6;
      break;
    }
    case VolumeMethod::MonteCarlo: {
      std::optional<Vec> y;
      if (space.kind() == Geometry::Sphere) y = default_base_point(samples.front(), options.seed);
      for (const Polyhedron& p : samples) {
        const MonteCarloEstimate e = monte_carlo_volume(p, options.samples, options.seed, y);
        report.volumes.push_back(e.estimate);
        report.std_errors.push_back(e.std_error);
      }
      break;
    }
  }
  const double v0 = report.volumes.front();
  report.max_deviation = 0.0;
  report.constant = true;
  for (size_t i = 0; i < report.volumes.size(); ++i) {
    double diff = report.volumes[i] - v0;
    if (method == VolumeMethod::MonteCarlo && !space.is_euclidean()) {
      diff = spherical_representative(diff, space.dim());
    }
    report.max_deviation = std::max(report.max_deviation, std::abs(diff));
    if (method == VolumeMethod::MonteCarlo) {
      const double pooled = std::hypot(report.std_errors[i], report.std_errors.front());
      const double limit = (options.tolerance > 0 ? options.tolerance : 5.0) * pooled;
      report.tolerance = std::max(report.tolerance, limit);
      if (std::abs(diff) >= limit && i > 0) report.constant = false;
    }
  }
  if (method != VolumeMethod::MonteCarlo) report.constant = report.max_deviation < report.tolerance;
  return report;
}

}  // namespace flexilab
