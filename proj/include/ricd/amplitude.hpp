#pragma once

#include <algorithm>
#include <cmath>

#include "ricd/fano.hpp"
#include "ricd/quadrature.hpp"
#include "ricd/specfun.hpp"
#include "ricd/units.hpp"

namespace ricd {

// Conventions. The XUV pulse acts through its absorption (e^{-i Omega t}) component only,
//   E_abs(t) = (i A0 Omega / 4) e^{-i Omega t} g(t),  g = normalized Gaussian of width sigma,
// switched on over the support [-T_X/2, T_X/2]. The continuum amplitude is
//   <E|Psi(t)> = i mu_C int dt' E_abs(t') e^{-i eps (t-t')}
//              + P int dt' E_abs(t') int_{t'}^{t} dt'' e^{-i eps (t-t'')} <r|U_F(t'',t')|r>
// with eps = E_kin + E_fin and P = V mu_RG - i pi V^2 mu_C - i pi V W mu_Co.

struct AmplitudeBreakdown {
  cplx direct;
  cplx resonant;
  cplx indirect_srical;
  cplx indirect_other;
  cplx total;
};

/// exp[-i (e_kin + e_fin)(t - t_prime)].
inline cplx free_phase(double e_kin, double e_fin, double t, double t_prime) {
  if (!(t >= t_prime)) throw DomainError("free_phase: t must not precede t_prime");
  return std::exp(cplx(0.0, -(e_kin + e_fin) * (t - t_prime)));
}

/// The three pieces of the decay prefactor P for the sRICD continuum.
struct DecayPrefactor {
  cplx resonant, indirect_srical, indirect_other;
  cplx sum() const { return resonant + indirect_srical + indirect_other; }
};

inline DecayPrefactor decay_prefactor(const ModelSystem& sys) {
  const double v = sys.v_r(), w = sys.w_r();
  return {v * sys.mu_rg, -kI * kPi * v * v * sys.mu_c_srical(), -kI * kPi * v * w * sys.mu_c_other()};
}

namespace detail {

inline void require_after_pulse(double t, const XuvPulse& p, const char* where) {
  if (!(t > p.end())) throw ContractError(std::string(where) + ": t lies inside the pulse; use amplitude_numeric");
}

// int_{start}^{end} g(t') e^{i delta t'} dt' for complex delta, expressed as
// e^{-sigma^2 delta^2 / 2} (erf tau_max - erf tau_min) / 2, evaluated without overflow.
inline cplx gaussian_window_transform(cplx delta, const XuvPulse& p, double e_phase = 0.0) {
  const double s2 = std::sqrt(2.0) * p.sigma;
  const cplx shift = kI * p.sigma * p.sigma * delta;
  const cplx tmax = (p.end() - shift) / s2, tmin = (p.start() - shift) / s2;
  const cplx s = -0.5 * p.sigma * p.sigma * delta * delta + cplx(0.0, e_phase);
  return 0.5 * (exp_times_erf(s, tmax) - exp_times_erf(s, tmin));
}

}  // namespace detail

/// Direct ionization into the sRICD continuum after the pulse.
inline cplx direct_term(double e_kin, double t, const ModelSystem& sys, const XuvPulse& pulse) {
  detail::require_after_pulse(t, pulse, "direct_term");
  const double eps = e_kin + sys.srical.e_fin;
  const double mu = sys.mu_c_srical();
  if (mu == 0.0) return 0.0;
  const double delta = eps - pulse.omega;
  const double s2 = std::sqrt(2.0) * pulse.sigma;
  // For real detuning the two erf terms are complex conjugates: only Re erf survives.
  const cplx arg{0.5 * pulse.t_x / s2, pulse.sigma * pulse.sigma * delta / s2};
  const cplx g = exp_times_erf(-0.5 * pulse.sigma * pulse.sigma * delta * delta, arg);
  return -(pulse.a0() * pulse.omega * mu / 4.0) * std::exp(cplx(0.0, -eps * t)) * g.real();
}

/// Resonant core split into the part decaying as exp(-Gamma t / 2) and the stationary part.
struct ResonantCore {
  cplx decaying, stationary;
  cplx value() const { return decaying + stationary; }
};

/// Post-pulse amplitude at one kinetic energy, reduced to time-independent coefficients:
///   direct(t)     = c_direct e^{-i eps t}
///   core(t)       = c_decaying e^{-i z t} + c_stationary e^{-i eps t}
/// so that time traces cost no erf evaluations.
struct PostPulseTerms {
  double eps = 0.0;
  cplx z;
  cplx c_direct, c_decaying, c_stationary;
  DecayPrefactor prefactor;

  ResonantCore core(double t) const {
    const cplx ph = std::exp(cplx(0.0, -eps * t));
    return {c_decaying * ph * std::exp(-kI * (z - eps) * t), c_stationary * ph};
  }
  AmplitudeBreakdown at(double t) const {
    AmplitudeBreakdown b;
    const cplx c = core(t).value();
    b.direct = c_direct * std::exp(cplx(0.0, -eps * t));
    b.resonant = prefactor.resonant * c;
    b.indirect_srical = prefactor.indirect_srical * c;
    b.indirect_other = prefactor.indirect_other * c;
    b.total = b.direct + b.resonant + b.indirect_srical + b.indirect_other;
    return b;
  }
  cplx total(double t) const {
    const cplx dec = std::exp(-kI * (z - eps) * t);
    return std::exp(cplx(0.0, -eps * t)) * (c_direct + prefactor.sum() * (c_stationary + c_decaying * dec));
  }
};

/// Caches the energy-independent pieces (decay prefactor, pulse transform at the pole).
class SricdAmplitude {
 public:
  SricdAmplitude(const ModelSystem& sys, const XuvPulse& pulse)
      : sys_(sys), pulse_(pulse), pf_(decay_prefactor(sys)), z_(sys.e_r(), -0.5 * sys.gamma_r()),
        tz_(detail::gaussian_window_transform(z_ - pulse.omega, pulse)) {}

  PostPulseTerms terms(double e_kin) const {
    PostPulseTerms r;
    r.eps = e_kin + sys_.srical.e_fin;
    r.z = z_;
    r.prefactor = pf_;
    const double a = pulse_.a0() * pulse_.omega / 4.0;
    const double mu = sys_.mu_c_srical();
    const cplx te = detail::gaussian_window_transform(r.eps - pulse_.omega, pulse_);
    // for real detuning 2*transform = e^{-sigma^2 delta^2/2} * 2 Re erf(...)
    r.c_direct = mu == 0.0 ? cplx(0.0) : cplx(-a * mu * te.real());
    const cplx pre = -a / (z_ - r.eps);
    r.c_decaying = pre * tz_;
    r.c_stationary = -pre * te;
    return r;
  }

  /// Integral over the pulse of E_abs(t') e^{i z t'}: the amplitude fed into |R>.
  cplx pole_drive() const { return kI * (pulse_.a0() * pulse_.omega / 4.0) * tz_; }
  const DecayPrefactor& prefactor() const { return pf_; }
  cplx pole() const { return z_; }
  const ModelSystem& system() const { return sys_; }
  const XuvPulse& pulse() const { return pulse_; }

 private:
  ModelSystem sys_;
  XuvPulse pulse_;
  DecayPrefactor pf_;
  cplx z_;
  cplx tz_;
};

inline ResonantCore resonant_core_parts(double e_kin, double t, const ModelSystem& sys, const XuvPulse& pulse) {
  detail::require_after_pulse(t, pulse, "resonant_indirect_core");
  return SricdAmplitude(sys, pulse).terms(e_kin).core(t);
}

/// Resonant and indirect ionization core (all pieces share it; P multiplies it).
inline cplx resonant_indirect_core(double e_kin, double t, const ModelSystem& sys, const XuvPulse& pulse) {
  return resonant_core_parts(e_kin, t, sys, pulse).value();
}

inline AmplitudeBreakdown amplitude_post_pulse(double e_kin, double t, const ModelSystem& sys,
                                               const XuvPulse& pulse) {
  detail::require_after_pulse(t, pulse, "amplitude_post_pulse");
  return SricdAmplitude(sys, pulse).terms(e_kin).at(t);
}

struct QuadratureSpec {
  double panel_sigma = 0.25;  // initial panel width in units of sigma
  double tol = 1e-9;          // relative
  int max_depth = 30;
};

/// Absorption component of the XUV field at t (zero outside the support).
inline cplx field_absorption(double t, const XuvPulse& pulse) {
  if (t < pulse.start() || t > pulse.end()) return 0.0;
  const double g = std::exp(-0.5 * t * t / (pulse.sigma * pulse.sigma)) / (std::sqrt(2.0 * kPi) * pulse.sigma);
  return kI * (pulse.a0() * pulse.omega / 4.0) * std::exp(cplx(0.0, -pulse.omega * t)) * g;
}

/// General-time amplitude: outer t' integral by adaptive Gauss-Legendre, inner t'' integral
/// in closed form. Valid inside the pulse.
inline quad::Estimate<cplx> amplitude_numeric(double e_kin, double t, const ModelSystem& sys,
                                              const XuvPulse& pulse, const QuadratureSpec& qs = {}) {
  const double lo = pulse.start(), hi = std::min(t, pulse.end());
  if (hi <= lo) return {};
  const double eps = e_kin + sys.srical.e_fin;
  const cplx z{sys.e_r(), -0.5 * sys.gamma_r()};
  const cplx mu_c = sys.mu_c_srical();
  const cplx p = decay_prefactor(sys).sum();
  const double s2 = pulse.sigma * pulse.sigma;
  const cplx scale = kI * (pulse.a0() * pulse.omega / 4.0) / (std::sqrt(2.0 * kPi) * pulse.sigma);
  // The global phase e^{-i eps t} is factored out; the remaining integrand only oscillates
  // at the detuning eps - Omega.
  auto integrand = [&](double tp) -> cplx {
    const double s = t - tp;
    const cplx env = std::exp(cplx(-0.5 * tp * tp / s2, (eps - pulse.omega) * tp));
    const cplx inner = s * expm1_over(kI * (eps - z) * s);
    return env * (kI * mu_c + p * inner);
  };
  auto est = quad::adaptive<16>(integrand, lo, hi, qs.panel_sigma * pulse.sigma, qs.tol, 0.0, qs.max_depth);
  const cplx ph = scale * std::exp(cplx(0.0, -eps * t));
  est.value *= ph;
  est.error *= std::abs(ph);
  return est;
}

}  // namespace ricd
