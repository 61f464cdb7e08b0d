#pragma once

#include <cmath>
#include <stdexcept>

namespace pdet {

// ============================================================================
// Upper-tail probability of the standard normal distribution,
//   q_function(x) = P(Z > x) = erfc(x / sqrt(2)) / 2.
//
// erfc is computed from scratch: a non-alternating Taylor series of erf near
// zero and the classical Lentz continued fraction in the tail. The exp(-z^2)
// factor uses a split-argument correction so the tail keeps full relative
// accuracy; the target is <= 1e-12 relative error on x in [-8, 8], verified
// against an adaptive-quadrature oracle in the test suite.
// ============================================================================

namespace detail {

inline constexpr double inv_sqrt_pi = 0.564189583547756286948079451561;

// erf(z) = (2 z e^{-z^2} / sqrt(pi)) * sum_k (2 z^2)^k / (1*3*...*(2k+1)),
// all terms positive, used for 0 <= z < 1.5.
inline double erf_series(double z) {
  const double zz = z * z;
  double term = 1.0;
  double sum = 1.0;
  double denom = 1.0;
  for (int k = 1; k < 200; ++k) {
    denom += 2.0;
    term *= 2.0 * zz / denom;
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return 2.0 * z * std::exp(-zz) * inv_sqrt_pi * sum;
}

// exp(-z^2) with the rounding of z*z compensated: z is split into a high part
// exact in 26 bits and a low remainder, and the residual exponent is applied
// as a second exp factor.
inline double exp_neg_square(double z) {
  const double sq = z * z;
  int expon = 0;
  double hi = std::floor(std::ldexp(std::frexp(z, &expon), 26));
  hi = std::ldexp(hi, expon - 26);
  const double lo = z - hi;
  const double err = ((hi * hi - sq) + 2.0 * hi * lo) + lo * lo;
  return std::exp(-sq) * std::exp(-err);
}

// Continued fraction (Lentz):
//   sqrt(pi) e^{z^2} erfc(z) = 1 / (z + (1/2)/(z + (2/2)/(z + (3/2)/(z + ...))))
// used for z >= 1.5 where it converges quickly.
inline double erfc_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  double f = z;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 400; ++n) {
    const double a = 0.5 * n;
    d = z + a * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = z + a / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-17) break;
  }
  return exp_neg_square(z) * inv_sqrt_pi / f;
}

inline double erfc_positive(double z) {
  if (z < 1.5) return 1.0 - erf_series(z);
  if (z > 27.5) return 0.0;  // underflows past the smallest double
  return erfc_continued_fraction(z);
}

inline double erfc_impl(double z) {
  if (z >= 0.0) return erfc_positive(z);
  return 2.0 - erfc_positive(-z);
}

}  // namespace detail

/// P(Z > x) for standard normal Z. NaN input is rejected.
inline double q_function(double x) {
  if (std::isnan(x)) throw std::invalid_argument("q_function: NaN input");
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return 0.5 * detail::erfc_impl(x * 0.70710678118654752440);
}

}  // namespace pdet
