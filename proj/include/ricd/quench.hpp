#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ricd/amplitude.hpp"
#include "ricd/quadrature.hpp"
#include "ricd/specfun.hpp"
#include "ricd/units.hpp"

namespace ricd {

/// Population of |R> left at the quench onset, in units where the bound-bound dipole is
/// mu_RG and the field prefactor is dropped.
inline double population_n0(const ModelSystem& sys, const XuvPulse& pulse, const IrQuench& quench) {
  if (!(quench.onset() > pulse.end()))
    throw ContractError("population_n0: quench onset overlaps the XUV pulse");
  const double d = pulse.omega - sys.e_r();
  return 0.25 * sys.mu_rg * sys.mu_rg * std::exp(-pulse.sigma * pulse.sigma * d * d) *
         std::exp(-sys.gamma_r() * quench.onset());
}

namespace detail {

// erf((t - t_s)/(sqrt2 sigma)) - erf(-dt/(sqrt2 sigma)), the depletion exponent without alpha/2.
inline double quench_erf_span(const IrQuench& q, double t) {
  if (t <= q.onset()) return 0.0;
  const double s = std::sqrt(2.0) * q.sigma_ir;
  return std::erf((t - q.t_s) / s) + std::erf(q.delta_t() / s);
}

}  // namespace detail

/// N_R(t) / N_0.
inline double remaining_fraction(const IrQuench& q, double t) {
  if (!q.enabled || q.alpha == 0.0) return 1.0;
  return std::exp(-0.5 * q.alpha * detail::quench_erf_span(q, t));
}

/// N_I(t) / N_0, without cancellation near the onset.
inline double transferred_fraction(const IrQuench& q, double t) {
  if (!q.enabled || q.alpha == 0.0) return 0.0;
  return -std::expm1(-0.5 * q.alpha * detail::quench_erf_span(q, t));
}

/// Quench rate f_IR(t) (zero before the onset).
inline double quench_rate(const IrQuench& q, double t) {
  if (!q.enabled || t < q.onset()) return 0.0;
  const double x = (t - q.t_s) / q.sigma_ir;
  return q.alpha / (std::sqrt(2.0 * kPi) * q.sigma_ir) * std::exp(-0.5 * x * x);
}

/// Time after which the quench is complete to double precision (f_IR ~ e^{-32}).
inline double quench_end(const IrQuench& q) { return q.t_s + 8.0 * q.sigma_ir; }

struct PopulationTrace {
  std::vector<double> times;
  std::vector<double> n_r;
  std::vector<double> n_i;
  double n0 = 0.0;
};

inline PopulationTrace population_trace(double n0, const IrQuench& quench, const std::vector<double>& times) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("population_trace: times must be increasing");
  PopulationTrace tr;
  tr.times = times;
  tr.n0 = n0;
  tr.n_r.reserve(times.size());
  tr.n_i.reserve(times.size());
  for (double t : times) {
    const double ni = n0 * transferred_fraction(quench, t);
    tr.n_i.push_back(ni);
    tr.n_r.push_back(n0 - ni);
  }
  return tr;
}

enum class IcdMode { source_sum, literal };

struct IcdOptions {
  IcdMode mode = IcdMode::source_sum;
  int source_panels = 64;  // 16-point Gauss-Legendre panels over the quench window
  int quench_panels_per_sigma = 4;
};

inline IcdMode parse_icd_mode(const std::string& s) {
  if (s == "source_sum") return IcdMode::source_sum;
  if (s == "literal") return IcdMode::literal;
  throw DomainError("unknown ICD mode '" + s + "' (expected source_sum or literal)");
}

/// Quenched sRICD and ICD amplitudes for one parameter set. Energy-dependent but
/// time-independent work is done once per energy through the *_row functions.
class QuenchModel {
 public:
  QuenchModel(const ModelSystem& sys, const XuvPulse& pulse, const IrQuench& quench, IcdOptions opt = {})
      : sys_(sys), pulse_(pulse), quench_(quench), opt_(opt), sricd_(sys, pulse) {
    if (opt_.source_panels < 1) throw DomainError("quench.source_panels must be positive");
    if (active()) {
      n0_ = population_n0(sys, pulse, quench);
      t_end_ = quench_end(quench);
      s_inf_ = std::sqrt(remaining_fraction(quench, t_end_));
      const double field = 0.5 * pulse.a0() * pulse.omega;
      amp0_ = field * std::sqrt(n0_);
    }
  }

  bool active() const { return quench_.enabled && quench_.alpha != 0.0; }
  double n0() const { return n0_; }
  const SricdAmplitude& unquenched() const { return sricd_; }

  /// sqrt(N_R(t)/N_0): the factor scaling the |R> amplitude.
  double survival(double t) const { return active() ? std::sqrt(remaining_fraction(quench_, t)) : 1.0; }

  /// Population moved into |I> up to time t, in the same units as |amplitude|^2.
  double transferred_population(double t) const {
    return active() ? amp0_ * amp0_ * transferred_fraction(quench_, t) : 0.0;
  }

  cplx srical(double e_kin, double t) const { return srical_row(e_kin, {t})[0]; }
  cplx icd(double e_kin, double t) const { return icd_row(e_kin, {t})[0]; }

  /// Quenched sRICD amplitude at one energy for several times (any order, all > pulse end
  /// or evaluated numerically inside the pulse).
  std::vector<cplx> srical_row(double e_kin, const std::vector<double>& times) const {
    std::vector<cplx> out(times.size());
    const PostPulseTerms terms = sricd_.terms(e_kin);
    const cplx corr_pre = sricd_.prefactor().sum() * sricd_.pole_drive();
    const cplx w = kI * (terms.eps - terms.z);  // e^{w t''} = e^{i(eps - z) t''}
    cplx full{};                               // correction integral over the whole window
    bool have_full = false;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      if (t <= pulse_.end()) {
        out[k] = t <= pulse_.start() ? cplx(0.0) : amplitude_numeric(e_kin, t, sys_, pulse_).value;
        continue;
      }
      out[k] = terms.total(t);
      if (!active() || t <= quench_.onset()) continue;
      // P Q e^{-i eps t} int_{onset}^{t} e^{i(eps - z)t''} (S(t'') - 1) dt''; beyond the window
      // S is constant and the remainder is analytic.
      cplx g;
      if (t <= t_end_) {
        g = window_integral(w, t);
      } else {
        if (!have_full) {
          full = window_integral(w, t_end_);
          have_full = true;
        }
        const double span = t - t_end_;
        g = full + (s_inf_ - 1.0) * std::exp(w * t_end_) * span * expm1_over(w * span);
      }
      out[k] += corr_pre * std::exp(cplx(0.0, -terms.eps * t)) * g;
    }
    return out;
  }

  /// ICD amplitude at one energy (relative to the ICD final state) for several times.
  std::vector<cplx> icd_row(double e_kin, const std::vector<double>& times) const {
    std::vector<cplx> out(times.size(), cplx(0.0));
    if (!active()) return out;
    const double eps = e_kin + sys_.icd.e_fin;
    const cplx zi{sys_.icd.e_r, -0.5 * sys_.icd.gamma()};
    const double vi = sys_.icd.coupling();
    const double de = eps - sys_.icd.e_r;
    bool have_full = false;
    cplx m1{}, m2{};
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      if (t <= quench_.onset()) continue;
      cplx a;
      if (t <= t_end_) {
        // emission kernel with the source-time phase, e^{-i eps t} factored out
        a = source_integral(t, [&](double tau) {
          const double s = t - tau;
          return std::exp(cplx(0.0, de * tau)) * s * expm1_over(kI * (eps - zi) * s);
        });
      } else {
        // After the quench the kernel separates:
        //   e^{i de tau} (e^{i(eps-z_I)(t-tau)} - 1) / (i(eps - z_I))
        //   = [e^{-i(z_I - eps) t} e^{Gamma_I tau/2} - e^{i de tau}] / (i(eps - z_I))
        if (!have_full) {
          const double hg = 0.5 * sys_.icd.gamma();
          m1 = source_integral(t_end_, [&](double tau) { return cplx(std::exp(hg * tau)); });
          m2 = source_integral(t_end_, [&](double tau) { return std::exp(cplx(0.0, de * tau)); });
          have_full = true;
        }
        a = (std::exp(-kI * (zi - eps) * t) * m1 - m2) / (kI * (eps - zi));
      }
      out[k] = -vi * std::exp(cplx(0.0, -eps * t)) * a;
    }
    return out;
  }

  double onset() const { return quench_.onset(); }
  double window_end() const { return t_end_; }
  const IcdOptions& options() const { return opt_; }

 private:
  // int_{onset}^{t} e^{w t''} (S(t'') - 1) dt'' by composite Gauss-Legendre.
  cplx window_integral(cplx w, double t) const {
    const double lo = quench_.onset();
    const double width = quench_.sigma_ir / opt_.quench_panels_per_sigma;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((t - lo) / width)));
    return quad::composite<16>([&](double tt) { return std::exp(w * tt) * (survival(tt) - 1.0); }, lo, t, n);
  }

  // Coherent sum over source times up to min(t, window end) of kernel(tau) d sqrt(N_I)(tau)
  // (source_sum) or of kernel(tau) sqrt(N_I(tau)) g_IR(tau) dtau (literal). tau = onset + u^2
  // removes the square-root onset of sqrt(N_I).
  template <class K>
  cplx source_integral(double t, const K& kernel) const {
    const double lo = quench_.onset();
    const double hi = std::min(t, t_end_);
    if (hi <= lo) return 0.0;
    const double umax = std::sqrt(hi - lo);
    auto f = [&](double u) -> cplx {
      const double tau = lo + u * u;
      double weight;
      if (opt_.mode == IcdMode::source_sum) {
        // d sqrt(N_I)/du = 2u f_IR N_R / (2 sqrt(N_I)); finite as u -> 0
        const double ni = transferred_fraction(quench_, tau);
        const double nr = 1.0 - ni;
        const double rate = quench_rate(quench_, tau);
        if (u == 0.0 || ni == 0.0) {
          weight = std::sqrt(rate);
        } else {
          weight = u * rate * nr / std::sqrt(ni);
        }
      } else {
        const double x = (tau - quench_.t_s) / quench_.sigma_ir;
        const double g = std::exp(-0.5 * x * x) / (std::sqrt(2.0 * kPi) * quench_.sigma_ir);
        weight = 2.0 * u * g * std::sqrt(transferred_fraction(quench_, tau));
      }
      return weight * kernel(tau);
    };
    return amp0_ * quad::composite<16>(f, 0.0, umax, static_cast<std::size_t>(opt_.source_panels));
  }

  ModelSystem sys_;
  XuvPulse pulse_;
  IrQuench quench_;
  IcdOptions opt_;
  SricdAmplitude sricd_;
  double n0_ = 0.0;
  double t_end_ = 0.0;
  double s_inf_ = 1.0;
  double amp0_ = 0.0;
};

inline cplx srical_amplitude_quenched(double e_kin, double t, const ModelSystem& sys, const XuvPulse& pulse,
                                      const IrQuench& quench) {
  return QuenchModel(sys, pulse, quench).srical(e_kin, t);
}

inline cplx icd_amplitude(double e_kin, double t, const ModelSystem& sys, const XuvPulse& pulse,
                          const IrQuench& quench, const IcdOptions& opt = {}) {
  return QuenchModel(sys, pulse, quench, opt).icd(e_kin, t);
}

/// ICD amplitude with a refinement check: the source discretization is doubled and the
/// difference reported as the error estimate.
inline quad::Estimate<cplx> icd_amplitude_checked(double e_kin, double t, const ModelSystem& sys,
                                                  const XuvPulse& pulse, const IrQuench& quench,
                                                  const IcdOptions& opt = {}, double rel_tol = 1e-6) {
  IcdOptions fine = opt;
  fine.source_panels *= 2;
  const cplx a = icd_amplitude(e_kin, t, sys, pulse, quench, opt);
  const cplx b = icd_amplitude(e_kin, t, sys, pulse, quench, fine);
  quad::Estimate<cplx> e;
  e.value = b;
  e.error = std::abs(b - a);
  e.converged = e.error <= rel_tol * std::abs(b) || std::abs(b) == 0.0;
  return e;
}

}  // namespace ricd
