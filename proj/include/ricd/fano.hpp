#pragma once

#include <algorithm>
#include <cmath>

#include "ricd/quadrature.hpp"
#include "ricd/specfun.hpp"
#include "ricd/units.hpp"

namespace ricd {

/// Resonance coupled to one (w = 0) or two flat continua. Energies in a.u.
struct FanoResonance {
  double e_r = 0.0;
  double v = 0.0;
  double w = 0.0;

  double half_width() const { return kPi * (v * v + w * w); }
  double gamma() const { return 2.0 * half_width(); }
  cplx pole() const { return {e_r, -half_width()}; }
};

inline FanoResonance fano_resonance(const ModelSystem& sys) { return {sys.e_r(), sys.v_r(), sys.w_r()}; }

/// <r|U_F(t'',t')|r> for t'' - t' = dt.
inline cplx uf_rr(const FanoResonance& res, double dt) {
  if (!(dt >= 0.0)) throw DomainError("uf_rr: backward propagation is not supported");
  return std::exp(-kI * res.pole() * dt);
}

inline cplx uf_rr_single(double e_r, double v, double dt) { return uf_rr({e_r, v, 0.0}, dt); }

/// Integral over the continuum energy of <r|U_F(t'',t')|E'> for channel 1 (coupling v) or
/// channel 2 (coupling w).
inline cplx uf_r_cont_integral(const FanoResonance& res, double dt, int channel) {
  if (channel != 1 && channel != 2) throw DomainError("uf_r_cont_integral: channel must be 1 or 2");
  const double g = channel == 1 ? res.v : res.w;
  return -kI * kPi * g * uf_rr(res, dt);
}

enum class FanoElement { rr, rE1, rE2 };

struct FanoOracleOptions {
  double window_gammas = 400.0;  // half-window in units of the total width
  double window_time = 50.0;     // half-window at least window_time / dt
  double tol = 1e-8;             // panel-doubling convergence
  bool tail_correction = true;   // add the asymptotic contribution from beyond the window
};

namespace detail {

// Integral over [L, inf) of exp(-i a x) / (x - p), a != 0, by repeated integration by parts.
// The series is asymptotic; it is truncated at its smallest term, which is returned as error.
inline cplx lorentz_tail(double a, double L, cplx p, double& err) {
  const cplx ia = kI * a;
  const cplx r = 1.0 / (ia * (L - p));
  cplx term = r, sum = 0.0;
  double prev = std::abs(term);
  for (int k = 0; k < 200; ++k) {
    sum += term;
    const cplx next = -term * static_cast<double>(k + 1) * r;
    const double mag = std::abs(next);
    if (mag > prev || mag < 1e-18 * std::abs(sum)) {
      err = mag;
      break;
    }
    term = next;
    prev = mag;
  }
  return std::exp(-ia * L) * sum;
}

}  // namespace detail

/// Brute-force evaluation of the Fano matrix elements as integrals over the real energy axis
/// of the Fano eigenbasis coefficients (energy shift neglected). Independent of the contour
/// closed forms uf_rr / uf_r_cont_integral.
inline quad::Estimate<cplx> fano_quadrature_oracle(const FanoResonance& res, double dt,
                                                   FanoElement element,
                                                   const FanoOracleOptions& opt = {}) {
  if (!(dt >= 0.0)) throw DomainError("fano_quadrature_oracle: dt must be non-negative");
  const double g2 = res.v * res.v + res.w * res.w;
  const double hw = kPi * g2;
  if (!(hw > 0.0)) throw DomainError("fano_quadrature_oracle: resonance is not coupled");
  if (element != FanoElement::rr && dt == 0.0)
    throw DomainError("fano_quadrature_oracle: rE element is only conditionally convergent at dt = 0");

  const double gc = element == FanoElement::rE1 ? res.v : res.w;
  // x = E - e_r; |a(E)|^2 = g2 / (x^2 + hw^2); a(E) * sum_E' b*_E'(E) = gc x / (x^2 + hw^2)
  auto integrand = [&](double x) -> cplx {
    const double den = x * x + hw * hw;
    const double f = element == FanoElement::rr ? g2 / den : gc * x / den;
    return f * std::exp(cplx(0.0, -x * dt));
  };

  double L = opt.window_gammas * 2.0 * hw;
  if (dt > 0.0) L = std::max(L, opt.window_time / dt);
  const auto start = static_cast<std::size_t>(std::ceil(2.0 * L / hw));
  auto est = quad::doubling<16>(integrand, -L, L, start, opt.tol);

  if (opt.tail_correction) {
    if (dt == 0.0) {
      // rr only: the Lorentzian mass beyond +-L.
      est.value += 2.0 * g2 / hw * (0.5 * kPi - std::atan(L / hw));
    } else {
      const cplx ph{0.0, hw};
      double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
      // right tail: exp(-i dt x) f(x); left tail mirrored: exp(+i dt x) f(-x)
      cplx right, left;
      if (element == FanoElement::rr) {
        const cplx c = g2 / (2.0 * kI * hw);
        right = c * (detail::lorentz_tail(dt, L, ph, e1) - detail::lorentz_tail(dt, L, -ph, e2));
        left = c * (detail::lorentz_tail(-dt, L, ph, e3) - detail::lorentz_tail(-dt, L, -ph, e4));
      } else {
        const double c = 0.5 * gc;
        right = c * (detail::lorentz_tail(dt, L, ph, e1) + detail::lorentz_tail(dt, L, -ph, e2));
        left = -c * (detail::lorentz_tail(-dt, L, ph, e3) + detail::lorentz_tail(-dt, L, -ph, e4));
      }
      est.value += right + left;
      est.error += std::abs(g2 + gc) * (e1 + e2 + e3 + e4);
    }
  }
  est.value *= std::exp(cplx(0.0, -res.e_r * dt));
  return est;
}

}  // namespace ricd
