#pragma once

namespace flexilab {

// Real quarter period K(k) by the arithmetic-geometric mean,
// K = pi / (2 AGM(1, sqrt(1 - k^2))). Throws DomainError unless 0 <= k < 1.
double quarter_period(double k);

// Same quantity by the descending Landen transformation; used as a cross-check.
double quarter_period_landen(double k);

struct JacobiValues {
  double sn;
  double cn;
  double dn;
};

// Jacobi elliptic functions sn, cn, dn of real argument u and modulus k in [0, 1].
JacobiValues jacobi(double u, double k);

// A t^2 t'^2 + B t^2 + 2 C t t' + D t'^2 + E = 0.
struct BiquadraticRelation {
  double a = 0, b = 0, c = 0, d = 0, e = 0;

  double evaluate(double t, double tp) const {
    return a * t * t * tp * tp + b * t * t + 2.0 * c * t * tp + d * tp * tp + e;
  }
};

// Relation satisfied identically in u by t = dn(u), t' = dn(u - sigma):
// A = sn^2 s, B = D = cn^2 s, C = -dn s, E = (1 - k^2) sn^2 s.
// k = 0 gives the circular limit. Throws DegenerateShiftError when sigma is a
// multiple of 2K(k).
BiquadraticRelation biquad_coefficients(double sigma, double k);

}  // namespace flexilab
