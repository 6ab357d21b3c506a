#include "flexilab/elliptica.hpp"

#include <cmath>
#include <numbers>

#include "flexilab/errors.hpp"

namespace flexilab {

namespace {
constexpr double kPi = std::numbers::pi;
}

double quarter_period(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("quarter period needs 0 <= k < 1");
  double a = 1.0;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = next;
  }
  return kPi / (a + b);
}

double quarter_period_landen(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("quarter period needs 0 <= k < 1");
  double product = 1.0;
  double kc = std::sqrt((1.0 - k) * (1.0 + k));
  double kn = k;
  for (int i = 0; i < 64 && kn > 1e-17; ++i) {
    kn = (1.0 - kc) / (1.0 + kc);
    kc = 2.0 * std::sqrt(kc) / (1.0 + kc);
    product *= 1.0 + kn;
  }
  return 0.5 * kPi * product;
}

JacobiValues jacobi(double u, double k) {
  if (!std::isfinite(u)) throw DomainError("jacobi needs a finite argument");
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("jacobi needs 0 <= k <= 1");
  const double complement = (1.0 - k) * (1.0 + k);
  if (complement == 0.0) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }
  if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};

  // Descending Landen transformation.
  constexpr int kMaxLevels = 16;
  double em[kMaxLevels];
  double en[kMaxLevels];
  double a = 1.0;
  double emc = complement;
  double c = 1.0;
  int levels = 0;
  for (int i = 0; i < kMaxLevels; ++i) {
    levels = i;
    em[i] = a;
    emc = std::sqrt(emc);
    en[i] = emc;
    c = 0.5 * (a + emc);
    if (std::abs(a - emc) <= 1e-8 * a) break;
    emc *= a;
    a = c;
  }
  const double v = u * c;
  double sn = std::sin(v);
  double cn = std::cos(v);
  double dn = 1.0;
  if (sn != 0.0) {
    double ratio = cn / sn;
    c *= ratio;
    for (int i = levels; i >= 0; --i) {
      const double b = em[i];
      ratio *= c;
      c *= dn;
      dn = (en[i] + ratio) / (b + ratio);
      ratio = c / b;
    }
    const double s = 1.0 / std::sqrt(c * c + 1.0);
    sn = sn >= 0.0 ? s : -s;
    cn = c * sn;
  }
  return {sn, cn, dn};
}

BiquadraticRelation biquad_coefficients(double sigma, double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("biquadratic coefficients need 0 <= k < 1");
  const double period = 2.0 * quarter_period(k);
  const double turns = sigma / period;
  if (std::abs(turns - std::round(turns)) < 1e-12) {
    throw DegenerateShiftError("shift is a multiple of 2K; the relation collapses to t = t'");
  }
  const auto [sn, cn, dn] = jacobi(sigma, k);
  BiquadraticRelation r;
  r.a = sn * sn;
  r.b = cn * cn;
  r.c = -dn;
  r.d = cn * cn;
  r.e = (1.0 - k * k) * sn * sn;
  return r;
}

}  // namespace flexilab
