#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricd/amplitude.hpp"
#include "ricd/quench.hpp"
#include "ricd/units.hpp"

namespace ricd {

/// Propagation failure (norm drift, bad request).
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OracleChannel { srical, other, icd };

inline const char* oracle_channel_name(OracleChannel c) {
  switch (c) {
    case OracleChannel::srical: return "srical";
    case OracleChannel::other: return "other";
    default: return "icd";
  }
}

/// Uniformly binned continuum attached to |R> (srical, other) or |I> (icd).
struct BinnedContinuum {
  OracleChannel channel = OracleChannel::srical;
  double e_fin = 0.0;
  std::vector<double> energies;  // total energy eps of each bin, a.u.
  double de = 0.0;
  double v_bin = 0.0;   // V sqrt(dE)
  double mu_bin = 0.0;  // mu_C sqrt(dE); zero for icd
  std::size_t offset = 0;

  std::size_t size() const { return energies.size(); }
  double kinetic_ev(std::size_t k) const { return units::au_to_ev(energies[k] - e_fin); }
};

struct ChannelSet {
  bool srical = true;
  bool other = true;
  bool icd = true;
};

/// Bound states G (index 0, E = 0), R (1), I (2) followed by the binned continua.
struct DiscretizedModel {
  double e_r = 0.0, e_i = 0.0, mu_rg = 0.0;
  std::vector<BinnedContinuum> continua;
  std::size_t dimension = 3;

  static constexpr std::size_t kG = 0, kR = 1, kI = 2;

  const BinnedContinuum* find(OracleChannel c) const {
    for (const auto& b : continua)
      if (b.channel == c) return &b;
    return nullptr;
  }
  /// Golden-rule width 2 pi V^2 summed over the continua attached to a bound state.
  double golden_rule_width(std::size_t bound) const {
    double g = 0.0;
    for (const auto& b : continua)
      if ((b.channel == OracleChannel::icd) == (bound == kI)) g += 2.0 * kPi * b.v_bin * b.v_bin / b.de;
    return g;
  }
};

/// Bins over +-window_gammas widths around each channel's nominal electron energy, constant
/// couplings V sqrt(dE) and dipoles mu_C sqrt(dE).
inline DiscretizedModel build_model(const ModelSystem& sys, double window_gammas = 40.0, int n_bins = 2000,
                                    ChannelSet which = {}) {
  if (n_bins < 200) throw DomainError("build_model: need at least 200 bins per channel");
  if (!(window_gammas >= 20.0)) throw DomainError("build_model: energy window narrower than 20 widths");
  DiscretizedModel m;
  m.e_r = sys.e_r();
  m.e_i = sys.icd.e_r;
  m.mu_rg = sys.mu_rg;
  auto add = [&](OracleChannel c, const ResonanceChannel& ch, double width, double mu) {
    BinnedContinuum b;
    b.channel = c;
    b.e_fin = ch.e_fin;
    b.de = 2.0 * window_gammas * width / n_bins;
    for (int k = 0; k < n_bins; ++k) b.energies.push_back(ch.e_r + (k - 0.5 * (n_bins - 1)) * b.de);
    b.v_bin = ch.coupling() * std::sqrt(b.de);
    b.mu_bin = mu * std::sqrt(b.de);
    b.offset = m.dimension;
    m.dimension += b.size();
    m.continua.push_back(std::move(b));
  };
  // widths of the lines as seen in each continuum: Gamma_R for both |R> channels
  const double gr = (which.srical ? sys.srical.gamma() : 0.0) + (which.other ? sys.other.gamma() : 0.0);
  if (which.srical) add(OracleChannel::srical, sys.srical, gr, sys.mu_c_srical());
  if (which.other) add(OracleChannel::other, sys.other, gr, sys.mu_c_other());
  if (which.icd) add(OracleChannel::icd, sys.icd, sys.icd.gamma(), 0.0);
  return m;
}

using StateVector = std::vector<cplx>;

struct PropagationOptions {
  double dt = 0.5;                          // a.u., upper bound; segments are split evenly
  std::optional<double> t_start;            // default: pulse start
  std::optional<StateVector> initial;       // default: all population in G
  bool field = true;
  double max_norm_drift = 1e-6;
};

struct Snapshot {
  double t = 0.0;
  StateVector c;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  double max_norm_drift = 0.0;
  double transferred = 0.0;  // population moved R -> I by the quench
  const Snapshot& at(double t) const {
    for (const auto& s : snapshots)
      if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
    throw OracleError("trajectory has no snapshot at t = " + std::to_string(t));
  }
};

/// RK4 in the rotating-wave frame: G at 0; R and the |R> continua rotate at the carrier Omega;
/// I and the ICD continuum at E_I. The quench removes -(f/2) c_R from R and feeds the increments
/// of sqrt(transferred population) into I with the instantaneous phase of c_R. Amplitudes are
/// reported at the requested times (in the rotating frames; |c|^2 is frame independent).
inline Trajectory propagate(const DiscretizedModel& m, const XuvPulse& pulse, const IrQuench& quench,
                            std::vector<double> times, const PropagationOptions& opt = {},
                            const std::function<void(double, const StateVector&)>& observer = {}) {
  if (!(opt.dt > 0.0)) throw DomainError("propagate: dt must be positive");
  std::sort(times.begin(), times.end());
  const double t0 = opt.t_start.value_or(pulse.start());
  if (times.empty() || times.front() < t0) throw OracleError("propagate: requested times precede the start");
  const std::size_t n = m.dimension;
  StateVector c = opt.initial.value_or(StateVector{});
  if (c.empty()) {
    c.assign(n, 0.0);
    c[DiscretizedModel::kG] = 1.0;
  }
  if (c.size() != n) throw OracleError("propagate: initial state has the wrong dimension");

  const double omega = pulse.omega;
  const double a = opt.field ? pulse.a0() * pulse.omega / 4.0 : 0.0;
  // Field envelope in the carrier frame, (i A0 Omega / 4) g(t). Whether the pulse and the quench
  // are on is decided per segment, so stage times rounding across a boundary see one side only.
  bool field_on = false, quench_on = false;
  auto envelope = [&](double t) -> cplx {
    if (a == 0.0 || !field_on) return 0.0;
    return kI * a * std::exp(-0.5 * t * t / (pulse.sigma * pulse.sigma)) / (std::sqrt(2.0 * kPi) * pulse.sigma);
  };
  const bool quenching = quench.enabled && quench.alpha != 0.0 && m.find(OracleChannel::icd) != nullptr;

  // derivative of (c, n_transferred)
  auto deriv = [&](double t, const StateVector& x, double /*nt*/, StateVector& dx, double& dn) {
    const cplx e = envelope(t), ec = std::conj(e);
    const cplx cg = x[DiscretizedModel::kG], cr = x[DiscretizedModel::kR], ci = x[DiscretizedModel::kI];
    cplx hg = -m.mu_rg * ec * cr;
    cplx hr = (m.e_r - omega) * cr - m.mu_rg * e * cg;
    cplx hi = 0.0;
    for (const auto& b : m.continua) {
      const bool on_i = b.channel == OracleChannel::icd;
      const double frame = on_i ? m.e_i : omega;
      const cplx parent = on_i ? ci : cr;
      const cplx drive = -b.mu_bin * e * cg;
      cplx sum = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) {
        const cplx ck = x[b.offset + k];
        sum += ck;
        dx[b.offset + k] = -kI * ((b.energies[k] - frame) * ck + drive + b.v_bin * parent);
      }
      if (on_i) {
        hi += b.v_bin * sum;
      } else {
        hr += b.v_bin * sum;
        hg += -b.mu_bin * ec * sum;
      }
    }
    const double f = quench_on ? quench.alpha / (std::sqrt(2.0 * kPi) * quench.sigma_ir) *
                                     std::exp(-0.5 * std::pow((t - quench.t_s) / quench.sigma_ir, 2))
                               : 0.0;
    dx[DiscretizedModel::kG] = -kI * hg;
    dx[DiscretizedModel::kR] = -kI * hr - 0.5 * f * cr;
    dx[DiscretizedModel::kI] = -kI * hi;
    dn = f * std::norm(cr);
  };

  // segment boundaries at every discontinuity of the drive and at every requested time
  std::vector<double> marks{t0};
  for (double b : {pulse.start(), pulse.end()})
    if (b > t0) marks.push_back(b);
  if (quenching && quench.onset() > t0) marks.push_back(quench.onset());
  for (double t : times) marks.push_back(t);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              marks.end());
  while (marks.back() > times.back()) marks.pop_back();

  Trajectory tr;
  double nt = 0.0, budget = 0.0;
  for (const auto& z : c) budget += std::norm(z);
  StateVector k1(n), k2(n), k3(n), k4(n), tmp(n);
  double d1, d2, d3, d4;
  std::size_t next_time = 0;
  auto record = [&](double t) {
    while (next_time < times.size() && std::abs(times[next_time] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
      if (observer) observer(t, c);
      else tr.snapshots.push_back({t, c});
      ++next_time;
    }
  };
  record(t0);
  for (std::size_t s = 1; s < marks.size(); ++s) {
    const double lo = marks[s - 1], hi = marks[s];
    const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / opt.dt - 1e-9));
    const double h = (hi - lo) / static_cast<double>(steps);
    const double mid = 0.5 * (lo + hi);
    field_on = mid > pulse.start() && mid < pulse.end();
    quench_on = quenching && mid > quench.onset();
    for (std::size_t j = 0; j < steps; ++j) {
      const double t = lo + j * h;
      deriv(t, c, nt, k1, d1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = c[i] + 0.5 * h * k1[i];
      deriv(t + 0.5 * h, tmp, nt + 0.5 * h * d1, k2, d2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = c[i] + 0.5 * h * k2[i];
      deriv(t + 0.5 * h, tmp, nt + 0.5 * h * d2, k3, d3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = c[i] + h * k3[i];
      deriv(t + h, tmp, nt + h * d3, k4, d4);
      for (std::size_t i = 0; i < n; ++i) c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      const double dn = h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
      budget -= dn;
      if (dn > 0.0) {
        const cplx cr = c[DiscretizedModel::kR];
        const double inc = std::sqrt(nt + dn) - std::sqrt(nt);
        const double before = std::norm(c[DiscretizedModel::kI]);
        if (std::abs(cr) > 0.0) c[DiscretizedModel::kI] += inc * cr / std::abs(cr);
        budget += std::norm(c[DiscretizedModel::kI]) - before;
      }
      nt += dn;
      double norm = 0.0;
      for (const auto& z : c) norm += std::norm(z);
      const double drift = std::abs(norm - budget);
      tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
      if (!std::isfinite(norm) || drift > opt.max_norm_drift)
        throw OracleError("propagate: norm drift " + std::to_string(drift) + " at t = " +
                          std::to_string(units::au_to_fs(t + h)) + " fs; reduce dt");
    }
    record(hi);
  }
  tr.transferred = nt;
  return tr;
}

struct BinSpectrum {
  std::vector<double> e_kin;  // eV
  std::vector<double> p;      // |c|^2 / dE, a.u.
};

/// |bin amplitude|^2 / dE for one channel: an amplitude density comparable with |A(E, t)|^2.
inline BinSpectrum bin_spectrum(const DiscretizedModel& m, const StateVector& c, OracleChannel ch) {
  const auto* b = m.find(ch);
  if (!b) throw OracleError(std::string("bin_spectrum: model has no ") + oracle_channel_name(ch) + " continuum");
  if (c.size() != m.dimension) throw OracleError("bin_spectrum: state has the wrong dimension");
  BinSpectrum s;
  for (std::size_t k = 0; k < b->size(); ++k) {
    s.e_kin.push_back(b->kinetic_ev(k));
    s.p.push_back(std::norm(c[b->offset + k]) / b->de);
  }
  return s;
}

struct Agreement {
  double scale = 0.0;     // least-squares constant applied to the oracle
  double rms = 0.0;       // RMS of (scale P_oracle - P_analytic) over RMS of P_analytic
  double worst_e = 0.0;   // eV, largest local deviation
  double worst_dev = 0.0; // |scale P_oracle - P_analytic| / max P_analytic there
};

/// Compares two spectra on the same energies restricted to [lo, hi] eV after fixing one global
/// constant by least squares.
inline Agreement compare_spectra(const std::vector<double>& e, const std::vector<double>& analytic,
                                 const std::vector<double>& oracle, double lo, double hi) {
  double so = 0.0, sa = 0.0, saa = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k] >= lo && e[k] <= hi) {
      so += oracle[k] * oracle[k];
      sa += analytic[k] * oracle[k];
      saa += analytic[k] * analytic[k];
      mx = std::max(mx, analytic[k]);
    }
  Agreement g;
  if (so == 0.0 && saa == 0.0) return g;  // both empty
  if (so == 0.0 || saa == 0.0) {
    g.rms = 1.0;
    return g;
  }
  g.scale = sa / so;
  double num = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k] >= lo && e[k] <= hi) {
      const double d = g.scale * oracle[k] - analytic[k];
      num += d * d;
      if (std::abs(d) / mx > g.worst_dev) {
        g.worst_dev = std::abs(d) / mx;
        g.worst_e = e[k];
      }
    }
  g.rms = std::sqrt(num / saa);
  return g;
}

}  // namespace ricd
