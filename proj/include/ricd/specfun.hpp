#pragma once

#include <cmath>
#include <complex>

#include "ricd/units.hpp"

namespace ricd {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

namespace detail {

inline void require_finite(cplx z, const char* where) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError(std::string(where) + ": non-finite argument");
}

// Radius below which erf is summed from its Maclaurin series. The series cancels badly on
// the real axis (largest term ~ e^{|z|^2}), so it is accumulated in binary128.
inline constexpr double kSeriesRadius = 6.0;

using quad = __float128;

struct QuadComplex {
  quad re, im;
};

// 2/sqrt(pi) * sum_n (-1)^n z^{2n+1} / (n! (2n+1)), accumulated in binary128.
inline QuadComplex erf_series_quad(cplx z) {
  const quad zr = z.real(), zi = z.imag();
  const quad z2r = zr * zr - zi * zi, z2i = 2 * zr * zi;
  quad tr = zr, ti = zi;
  quad sr = zr, si = zi;
  for (int n = 1; n < 400; ++n) {
    const quad nr = -(tr * z2r - ti * z2i) / n;
    const quad ni = -(tr * z2i + ti * z2r) / n;
    tr = nr;
    ti = ni;
    const quad ar = tr / (2 * n + 1), ai = ti / (2 * n + 1);
    sr += ar;
    si += ai;
    const quad mag = (ar < 0 ? -ar : ar) + (ai < 0 ? -ai : ai);
    const quad ref = (sr < 0 ? -sr : sr) + (si < 0 ? -si : si);
    if (n > 2 && mag < ref * quad(1e-30)) break;
  }
  // 2/sqrt(pi) as a double-double, so no GNU literal suffix is needed
  const quad scale = quad(1.1283791670955126) + quad(1.533545961316588e-17);
  return {scale * sr, scale * si};
}

inline cplx erf_series(cplx z) {
  const QuadComplex v = erf_series_quad(z);
  return {static_cast<double>(v.re), static_cast<double>(v.im)};
}

inline cplx erfc_series(cplx z) {
  const QuadComplex v = erf_series_quad(z);
  return {static_cast<double>(quad(1) - v.re), static_cast<double>(-v.im)};
}

// Laplace continued fraction for the Faddeeva function, valid for Im u >= 0 and |u| large:
// w(u) = (i/sqrt(pi)) / (u - (1/2)/(u - 1/(u - (3/2)/(u - ...)))).
inline cplx faddeeva_cf(cplx u) {
  constexpr int kTerms = 240;
  cplx tail = u;
  for (int k = kTerms; k >= 1; --k) tail = u - (0.5 * k) / tail;
  return kI / std::sqrt(kPi) / tail;
}

}  // namespace detail

/// Faddeeva function w(u) = exp(-u^2) erfc(-iu).
inline cplx faddeeva_w(cplx u) {
  detail::require_finite(u, "faddeeva_w");
  if (u.imag() < 0.0) {
    // w(-u) = 2 exp(-u^2) - w(u)
    return 2.0 * std::exp(-u * u) - faddeeva_w(-u);
  }
  // The continued fraction converges to full precision for |u| >= 6 or Im u >= 3; inside,
  // erfc(-iu) >= erfc(3) so the binary128 subtraction keeps ~25 digits.
  if (std::abs(u) >= detail::kSeriesRadius || u.imag() >= 3.0) return detail::faddeeva_cf(u);
  return std::exp(-u * u) * detail::erfc_series(-kI * u);
}

/// Error function of complex argument, relative accuracy ~1e-13 for |z| <= 12.
inline cplx erf_complex(cplx z) {
  detail::require_finite(z, "erf_complex");
  if (std::abs(z) < detail::kSeriesRadius) return detail::erf_series(z);
  const bool flip = z.real() < 0.0;
  const cplx zp = flip ? -z : z;
  const cplx v = 1.0 - std::exp(-zp * zp) * detail::faddeeva_cf(kI * zp);
  return flip ? -v : v;
}

/// exp(s) * erf(z) without intermediate overflow. Gaussian prefactors multiply erf values
/// whose arguments carry large imaginary parts; the product stays moderate.
inline cplx exp_times_erf(cplx s, cplx z) {
  detail::require_finite(z, "exp_times_erf");
  if (std::abs(z) < detail::kSeriesRadius) return std::exp(s) * detail::erf_series(z);
  const bool flip = z.real() < 0.0;
  const cplx zp = flip ? -z : z;
  const cplx v = std::exp(s) - std::exp(s - zp * zp) * detail::faddeeva_cf(kI * zp);
  return flip ? -v : v;
}

/// Unnormalized Gaussian envelope, 1 at the center.
inline double gaussian_envelope(double t, double sigma, double center = 0.0) {
  if (!(sigma > 0.0)) throw DomainError("gaussian_envelope: sigma must be positive");
  const double x = (t - center) / sigma;
  return std::exp(-0.5 * x * x);
}

/// (exp(w) - 1) / w, accurate for small |w|.
inline cplx expm1_over(cplx w) {
  if (std::abs(w) < 0.5) {
    cplx term = 1.0, sum = 1.0;
    for (int n = 2; n < 30; ++n) {
      term *= w / static_cast<double>(n);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::exp(w) - 1.0) / w;
}

}  // namespace ricd
