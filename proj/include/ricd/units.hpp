#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ricd {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an evaluator is called outside the regime its closed form covers.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input data unusable for the requested analysis (malformed file, too few maxima, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace units {

inline constexpr double kHartreeEv = 27.211386245988;
inline constexpr double kAuTimeFs = 0.024188843265857;
/// Atomic unit of intensity, 1 a.u. field squared, in W/cm^2.
inline constexpr double kAuIntensityWcm2 = 3.50944758e16;

constexpr double ev_to_au(double ev) { return ev / kHartreeEv; }
constexpr double au_to_ev(double au) { return au * kHartreeEv; }
constexpr double fs_to_au(double fs) { return fs / kAuTimeFs; }
constexpr double au_to_fs(double au) { return au * kAuTimeFs; }

}  // namespace units

inline constexpr double kPi = std::numbers::pi;

/// Sentinel for an absent channel (infinite partial lifetime).
inline constexpr double kNoChannel = std::numeric_limits<double>::infinity();

inline double width_from_lifetime(double tau_au) {
  if (!(tau_au > 0.0)) throw DomainError("width_from_lifetime: lifetime must be positive");
  return 1.0 / tau_au;
}

inline double coupling_from_width(double gamma_au) {
  if (!(gamma_au >= 0.0)) throw DomainError("coupling_from_width: width must be non-negative");
  return std::sqrt(gamma_au / (2.0 * kPi));
}

/// Harmonic combination 1/tau = 1/tau_a + 1/tau_b. Pass kNoChannel for an absent channel.
inline double effective_lifetime(double tau_a, double tau_b) {
  if (!(tau_a > 0.0) || !(tau_b > 0.0))
    throw DomainError("effective_lifetime: lifetimes must be positive");
  return 1.0 / (1.0 / tau_a + 1.0 / tau_b);
}

/// Continuum dipole fixed by the Fano parameter, q = mu_rg / (mu_c * pi * v).
inline double continuum_dipole_from_q(double q, double mu_rg, double v) {
  if (q == 0.0 || std::isnan(q))
    throw DomainError("continuum_dipole_from_q: q must be non-zero");
  if (!(v > 0.0)) throw DomainError("continuum_dipole_from_q: coupling must be positive");
  if (std::isinf(q)) return 0.0;
  return mu_rg / (q * kPi * v);
}

/// One decaying state coupled to one continuum. Energies and times in atomic units.
struct ResonanceChannel {
  std::string label;
  double e_r = 0.0;
  double e_fin = 0.0;
  double tau = kNoChannel;

  static ResonanceChannel from_ev_fs(std::string label, double e_r_ev, double e_fin_ev,
                                     double tau_fs) {
    if (!(tau_fs > 0.0)) throw DomainError("ResonanceChannel " + label + ": tau must be positive");
    return {std::move(label), units::ev_to_au(e_r_ev), units::ev_to_au(e_fin_ev),
            std::isinf(tau_fs) ? kNoChannel : units::fs_to_au(tau_fs)};
  }

  double gamma() const { return std::isinf(tau) ? 0.0 : width_from_lifetime(tau); }
  double coupling() const { return coupling_from_width(gamma()); }
  /// Electron kinetic energy at the line center, e_r - e_fin.
  double kinetic_energy() const { return e_r - e_fin; }
  bool open() const { return e_r > e_fin; }
};

/// Full parameter set: the spectator-RICD channel, the competing channel that shares the
/// resonance, the ICD resonance, the Fano parameter and the bound-bound dipole.
struct ModelSystem {
  ResonanceChannel srical;
  ResonanceChannel other;
  ResonanceChannel icd;
  double q = 10.0;
  double mu_rg = 1.0;
  // When set, used for both continuum dipoles instead of deriving them from q.
  std::optional<double> mu_c_fixed;

  double e_r() const { return srical.e_r; }
  double v_r() const { return srical.coupling(); }
  double w_r() const { return other.coupling(); }
  double gamma_r() const { return srical.gamma() + other.gamma(); }
  double tau_eff() const { return 1.0 / gamma_r(); }
  /// Continuum dipoles with the same q for both continua.
  double mu_c_srical() const {
    if (mu_c_fixed) return *mu_c_fixed;
    return v_r() > 0.0 ? continuum_dipole_from_q(q, mu_rg, v_r()) : 0.0;
  }
  double mu_c_other() const {
    if (mu_c_fixed) return *mu_c_fixed;
    return w_r() > 0.0 ? continuum_dipole_from_q(q, mu_rg, w_r()) : 0.0;
  }

  void validate() const {
    if (other.e_r != srical.e_r)
      throw DomainError("ModelSystem: competing channel must share the resonance energy");
    if (!srical.open() || !icd.open())
      throw DomainError("ModelSystem: resonance below final state, channel closed");
  }
};

/// XUV pump pulse. The envelope is a Gaussian of standard deviation sigma centered at t = 0
/// and truncated to [-t_x/2, t_x/2].
struct XuvPulse {
  double intensity_wcm2 = 5e8;
  double omega = 0.0;
  double n_cycles = 50.0;
  double sigma = 0.0;
  double t_x = 0.0;

  /// Peak field strength in a.u.
  double field_peak() const { return std::sqrt(intensity_wcm2 / units::kAuIntensityWcm2); }
  /// Vector-potential amplitude A0 = E0 / omega.
  double a0() const { return field_peak() / omega; }
  double fwhm() const { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }
  double start() const { return -0.5 * t_x; }
  double end() const { return 0.5 * t_x; }
};

inline XuvPulse pulse_from_cycles(double omega_ev, double n_cycles, double fwhm_fs,
                                  double intensity_wcm2 = 5e8) {
  if (!(omega_ev > 0.0)) throw DomainError("pulse_from_cycles: photon energy must be positive");
  if (!(n_cycles >= 1.0)) throw DomainError("pulse_from_cycles: need at least one cycle");
  if (!(fwhm_fs > 0.0)) throw DomainError("pulse_from_cycles: FWHM must be positive");
  if (!(intensity_wcm2 >= 0.0)) throw DomainError("pulse_from_cycles: negative intensity");
  XuvPulse p;
  p.intensity_wcm2 = intensity_wcm2;
  p.omega = units::ev_to_au(omega_ev);
  p.n_cycles = n_cycles;
  p.sigma = units::fs_to_au(fwhm_fs) / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  p.t_x = n_cycles * 2.0 * kPi / p.omega;
  return p;
}

/// IR quench: Gaussian-rate population transfer from |R> to |I> centered at t_s.
struct IrQuench {
  bool enabled = true;
  double t_s = 0.0;
  double sigma_ir = 0.0;
  double alpha = 8.0;

  double delta_t() const { return 2.5 * sigma_ir; }
  double onset() const { return t_s - delta_t(); }

  /// Quench of total window 2*delta_t, i.e. sigma_ir = window / 5.
  static IrQuench from_window_fs(double t_s_fs, double window_fs, double alpha = 8.0) {
    if (!(window_fs > 0.0)) throw DomainError("IrQuench: window must be positive");
    if (!(alpha >= 0.0)) throw DomainError("IrQuench: alpha must be non-negative");
    IrQuench q;
    q.t_s = units::fs_to_au(t_s_fs);
    q.sigma_ir = units::fs_to_au(window_fs) / 5.0;
    q.alpha = alpha;
    return q;
  }
};

/// Neon dimer, Ne 2s^-1 5p resonance.
inline ModelSystem neon_dimer_system(double q = 10.0) {
  ModelSystem s;
  s.srical = ResonanceChannel::from_ev_fs("sRICD", 47.6930, 42.4138, 106.0);
  s.other = ResonanceChannel::from_ev_fs("pRICD+AI", 47.6930, 21.6290, 206.0);
  s.icd = ResonanceChannel::from_ev_fs("ICD", 48.4750, 47.8688, 98.0);
  s.q = q;
  s.mu_rg = 1.0;
  return s;
}

inline XuvPulse neon_dimer_pulse() { return pulse_from_cycles(47.6930, 50.0, 6.1, 5e8); }

inline IrQuench neon_dimer_quench() { return IrQuench::from_window_fs(35.0, 15.0, 8.0); }

}  // namespace ricd
