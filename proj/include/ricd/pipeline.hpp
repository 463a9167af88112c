#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ricd/analysis.hpp"
#include "ricd/config.hpp"
#include "ricd/parallel.hpp"
#include "ricd/quench.hpp"
#include "ricd/spectrum.hpp"
#include "ricd/tdse.hpp"

namespace ricd {

/// Trapezoidal integral of P over energy (eV axis converted to a.u.).
inline double energy_yield(const std::vector<double>& e_ev, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < e_ev.size(); ++i) s += 0.5 * (p[i] + p[i - 1]) * units::ev_to_au(e_ev[i] - e_ev[i - 1]);
  return s;
}

/// Line metrics of the last time slice, or nothing if the slice is not a single line.
inline std::optional<LineMetrics> late_line(const SpectrumGrid& g) {
  if (g.t_axis.empty()) return std::nullopt;
  try {
    return line_metrics(g.e_axis, g.slice_at_time(g.t_axis.size() - 1));
  } catch (const DataError&) {
    return std::nullopt;
  }
}

/// Adds late-time line position and width to the grid metadata.
inline void annotate_late_line(SpectrumGrid& g) {
  const std::string tag = std::string("result.") + channel_name(g.channel);
  if (const auto m = late_line(g)) {
    g.set_meta(tag + "_late_t_fs", format_number(g.t_axis.back()));
    g.set_meta(tag + "_peak_ev", format_number(m->peak));
    g.set_meta(tag + "_fwhm_ev", format_number(m->fwhm));
    g.set_meta(tag + "_asymmetry", format_number(m->asymmetry));
  } else {
    g.set_meta(tag + "_peak_ev", "n/a");
  }
}

// ---- lifetime fit ---------------------------------------------------------------------

struct TimeTrace {
  double e_kin = 0.0;  // eV
  std::vector<double> t;  // fs
  std::vector<double> p;
};

/// Free-decay (quench off) sRICD trace at analysis.fit_energy from the end of the pulse to
/// analysis.fit_t_max.
inline TimeTrace free_decay_trace(const Config& cfg) {
  IrQuench off = cfg.quench;
  off.enabled = false;
  const QuenchModel m(cfg.system, cfg.pulse, off, cfg.icd);
  TimeTrace tr;
  tr.e_kin = cfg.analysis.fit_energy;
  std::vector<double> ta;
  const double t0 = std::max(cfg.grid.t.min, units::au_to_fs(cfg.pulse.end()));
  for (long i = 0;; ++i) {
    const double t = t0 + static_cast<double>(i) * cfg.analysis.fit_t_step;
    if (t > cfg.analysis.fit_t_max + 1e-9) break;
    tr.t.push_back(t);
    ta.push_back(units::fs_to_au(t));
  }
  for (const auto& a : m.srical_row(units::ev_to_au(tr.e_kin), ta)) tr.p.push_back(std::norm(a));
  return tr;
}

/// Column of a grid at the energy nearest e_kin; the energy must lie on the grid.
inline TimeTrace trace_from_grid(const SpectrumGrid& g, double e_kin) {
  if (g.e_axis.empty() || g.t_axis.empty()) throw DataError("grid is empty");
  std::size_t k = 0;
  for (std::size_t i = 1; i < g.e_axis.size(); ++i)
    if (std::abs(g.e_axis[i] - e_kin) < std::abs(g.e_axis[k] - e_kin)) k = i;
  const double step = g.e_axis.size() > 1 ? std::abs(g.e_axis[1] - g.e_axis[0]) : 0.0;
  if (std::abs(g.e_axis[k] - e_kin) > 0.5 * step + 1e-12)
    throw DataError("energy " + format_number(e_kin) + " eV is not on the grid");
  return {g.e_axis[k], g.t_axis, g.trace_at_energy(k)};
}

// ---- pump-probe -----------------------------------------------------------------------

struct PumpProbeEntry {
  double t_s = 0.0;  // fs
  bool accepted = false;
  std::string reason;
  double t_late = 0.0;  // fs
  double srical_yield = 0.0;
  double srical_suppressed = 0.0;  // free minus quenched sRICD yield
  double icd_yield = 0.0;
  SpectrumGrid srical, icd;  // single late-time row each
};

struct PumpProbeResult {
  std::vector<PumpProbeEntry> entries;
  std::optional<double> icd_tau;         // fs, from ln(yield) vs t_s
  std::optional<double> suppressed_tau;  // fs
};

/// Least-squares slope of ln(y) against x; returns -1/slope (the decay constant).
inline std::optional<double> exponential_decay_constant(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0) {
      xs.push_back(x[i]);
      ls.push_back(std::log(y[i]));
    }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ls[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ls[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  const double slope = (n * sxy - sx * sy) / den;
  if (!(slope < 0.0)) return std::nullopt;
  return -1.0 / slope;
}

/// Late-time spectra (t_s + late_offset) for every delay; entries whose quench would overlap the
/// XUV pulse are rejected and the scan continues.
inline PumpProbeResult pump_probe(const Config& cfg, int workers = 1) {
  if (cfg.pump_probe.t_s_list.empty()) throw ConfigError("pump_probe.t_s_list: must not be empty");
  PumpProbeResult r;
  r.entries.resize(cfg.pump_probe.t_s_list.size());
  const auto es = cfg.grid.sricd_e.values(), ei = cfg.grid.icd_e.values();
  parallel_for(r.entries.size(), workers, [&](std::size_t k) {
    PumpProbeEntry& e = r.entries[k];
    e.t_s = cfg.pump_probe.t_s_list[k];
    IrQuench q = IrQuench::from_window_fs(e.t_s, units::au_to_fs(2.0 * cfg.quench.delta_t()), cfg.quench.alpha);
    if (!(q.onset() > cfg.pulse.end())) {
      e.reason = "quench window overlaps the XUV pulse";
      return;
    }
    e.accepted = true;
    e.t_late = e.t_s + cfg.pump_probe.late_offset;
    const double t = units::fs_to_au(e.t_late);
    const QuenchModel m(cfg.system, cfg.pulse, q, cfg.icd);
    IrQuench off = q;
    off.enabled = false;
    const QuenchModel free(cfg.system, cfg.pulse, off, cfg.icd);
    Config c = cfg;
    c.quench = q;
    for (auto& kv : c.entries)
      if (kv.first == "quench.t_s") kv.second = format_number(e.t_s);
    auto fill = [&](SpectrumGrid& g, Channel ch, const std::vector<double>& axis) {
      g.channel = ch;
      g.e_axis = axis;
      g.t_axis = {e.t_late};
      g.metadata = run_metadata(c, ch);
      g.values.resize(axis.size());
      for (std::size_t i = 0; i < axis.size(); ++i) {
        const double en = units::ev_to_au(axis[i]);
        g.values[i] = std::norm(ch == Channel::srical ? m.srical(en, t) : m.icd(en, t));
      }
    };
    fill(e.srical, Channel::srical, es);
    fill(e.icd, Channel::icd, ei);
    std::vector<double> pf(es.size());
    for (std::size_t i = 0; i < es.size(); ++i) pf[i] = std::norm(free.srical(units::ev_to_au(es[i]), t));
    e.srical_yield = energy_yield(es, e.srical.values);
    e.srical_suppressed = energy_yield(es, pf) - e.srical_yield;
    e.icd_yield = energy_yield(ei, e.icd.values);
  });
  std::vector<double> ts, yi, ys;
  for (const auto& e : r.entries)
    if (e.accepted) {
      ts.push_back(e.t_s);
      yi.push_back(e.icd_yield);
      ys.push_back(e.srical_suppressed);
    }
  r.icd_tau = exponential_decay_constant(ts, yi);
  r.suppressed_tau = exponential_decay_constant(ts, ys);
  return r;
}

// ---- oracle comparison ----------------------------------------------------------------

struct OracleCheck {
  OracleChannel channel = OracleChannel::srical;
  double t = 0.0;  // fs
  Agreement agreement;
  double tolerance = 0.0;
  bool pass() const { return agreement.rms <= tolerance; }
  std::vector<double> e, analytic, oracle_scaled;  // central window only
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  double max_norm_drift = 0.0;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass(); });
  }
};

/// System whose widths are scaled by k (lifetimes divided by k).
inline ModelSystem scale_widths(ModelSystem s, double k) {
  s.srical.tau /= k;
  s.other.tau /= k;
  s.icd.tau /= k;
  return s;
}

/// Runs the binned-continuum oracle and the analytic pipeline (with oracle.gamma_scale applied
/// to the analytic widths only) and compares the lines over the central window.
inline OracleReport oracle_compare(const Config& cfg) {
  const auto& o = cfg.oracle;
  const DiscretizedModel model = build_model(cfg.system, o.window_gammas, o.n_bins);
  std::vector<double> times;
  for (double t : o.sricd_times) times.push_back(units::fs_to_au(t));
  for (double t : o.icd_times) times.push_back(units::fs_to_au(t));
  PropagationOptions po;
  po.dt = o.dt;
  const Trajectory tr = propagate(model, cfg.pulse, cfg.quench, times, po);
  const ModelSystem asys = scale_widths(cfg.system, o.gamma_scale);
  const QuenchModel qm(asys, cfg.pulse, cfg.quench, cfg.icd);

  OracleReport rep;
  rep.max_norm_drift = tr.max_norm_drift;
  auto check = [&](OracleChannel ch, double t_fs, double tol) {
    OracleCheck c;
    c.channel = ch;
    c.t = t_fs;
    c.tolerance = tol;
    const auto bs = bin_spectrum(model, tr.at(units::fs_to_au(t_fs)).c, ch);
    std::vector<double> an(bs.e_kin.size());
    for (std::size_t k = 0; k < bs.e_kin.size(); ++k) {
      const double e = units::ev_to_au(bs.e_kin[k]), t = units::fs_to_au(t_fs);
      an[k] = std::norm(ch == OracleChannel::srical ? qm.srical(e, t) : qm.icd(e, t));
    }
    const bool sr = ch == OracleChannel::srical;
    const double centre = units::au_to_ev(sr ? cfg.system.srical.kinetic_energy() : cfg.system.icd.kinetic_energy());
    const double half = o.central_gammas * units::au_to_ev(sr ? cfg.system.gamma_r() : cfg.system.icd.gamma());
    c.agreement = compare_spectra(bs.e_kin, an, bs.p, centre - half, centre + half);
    for (std::size_t k = 0; k < bs.e_kin.size(); ++k)
      if (bs.e_kin[k] >= centre - half && bs.e_kin[k] <= centre + half) {
        c.e.push_back(bs.e_kin[k]);
        c.analytic.push_back(an[k]);
        c.oracle_scaled.push_back(c.agreement.scale * bs.p[k]);
      }
    rep.checks.push_back(std::move(c));
  };
  for (double t : o.sricd_times) check(OracleChannel::srical, t, o.sricd_tol);
  if (cfg.quench.enabled)
    for (double t : o.icd_times) check(OracleChannel::icd, t, o.icd_tol);
  return rep;
}

}  // namespace ricd
