#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ricd/quench.hpp"
#include "ricd/units.hpp"

namespace ricd {

/// Invalid configuration: unknown key, malformed value, failed validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AxisSpec {
  double min = 0.0, max = 0.0, step = 0.0;

  std::vector<double> values() const {
    const double n = std::floor((max - min) / step + 1e-9);
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= static_cast<long>(n); ++i) v.push_back(min + static_cast<double>(i) * step);
    return v;
  }
};

struct GridSpec {
  AxisSpec sricd_e{4.3, 6.3, 0.002};
  AxisSpec icd_e{0.1, 1.1, 0.002};
  AxisSpec t{-10.0, 400.0, 0.25};
};

struct AnalysisSpec {
  double fit_energy = 5.3;  // eV
  int omit_leading = 1;
  double fit_t_max = 1200.0;  // fs
  double fit_t_step = 0.5;    // fs
};

struct PumpProbeSpec {
  std::vector<double> t_s_list{15, 25, 35, 50, 70, 100};  // fs
  double late_offset = 600.0;                              // fs after t_s
};

struct OracleSpec {
  int n_bins = 2000;
  double window_gammas = 40.0;
  double dt = 0.5;  // a.u.
  std::vector<double> sricd_times{30, 93, 200};  // fs
  std::vector<double> icd_times{60, 150};        // fs
  double central_gammas = 10.0;
  double sricd_tol = 0.03;
  double icd_tol = 0.05;
  double gamma_scale = 1.0;  // scales the resonance widths of the analytic pipeline only
};

/// Fully resolved run parameters. `entries` keeps every key with its textual value in
/// schema order, for output headers.
struct Config {
  ModelSystem system;
  XuvPulse pulse;
  IrQuench quench;
  IcdOptions icd;
  GridSpec grid;
  AnalysisSpec analysis;
  PumpProbeSpec pump_probe;
  OracleSpec oracle;
  std::vector<std::pair<std::string, std::string>> entries;
};

namespace detail {

enum class ValueKind { number, integer, boolean, text, list };

struct KeyDef {
  const char* key;  // section.name
  ValueKind kind;
  const char* fallback;
};

// Units: energies eV, times fs, intensity W/cm^2.
inline const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> s = {
      {"system.e_r", ValueKind::number, "47.6930"},
      {"system.e_fin_sricd", ValueKind::number, "42.4138"},
      {"system.tau_sricd", ValueKind::number, "106"},
      {"system.e_fin_other", ValueKind::number, "21.6290"},
      {"system.tau_other", ValueKind::number, "206"},
      {"system.e_icd", ValueKind::number, "48.4750"},
      {"system.e_fin_icd", ValueKind::number, "47.8688"},
      {"system.tau_icd", ValueKind::number, "98"},
      {"system.q", ValueKind::number, "10"},
      {"system.mu_rg", ValueKind::number, "1"},
      {"xuv.intensity", ValueKind::number, "5e8"},
      {"xuv.omega", ValueKind::number, "47.693"},
      {"xuv.n_cycles", ValueKind::number, "50"},
      {"xuv.fwhm", ValueKind::number, "6.1"},
      {"quench.enabled", ValueKind::boolean, "true"},
      {"quench.t_s", ValueKind::number, "35"},
      {"quench.window", ValueKind::number, "15"},
      {"quench.alpha", ValueKind::number, "8"},
      {"quench.mode", ValueKind::text, "source_sum"},
      {"quench.source_panels", ValueKind::integer, "64"},
      {"grid.sricd_e_min", ValueKind::number, "4.3"},
      {"grid.sricd_e_max", ValueKind::number, "6.3"},
      {"grid.sricd_e_step", ValueKind::number, "0.002"},
      {"grid.icd_e_min", ValueKind::number, "0.1"},
      {"grid.icd_e_max", ValueKind::number, "1.1"},
      {"grid.icd_e_step", ValueKind::number, "0.002"},
      {"grid.t_min", ValueKind::number, "-10"},
      {"grid.t_max", ValueKind::number, "400"},
      {"grid.t_step", ValueKind::number, "0.25"},
      {"analysis.fit_energy", ValueKind::number, "5.3"},
      {"analysis.omit_leading", ValueKind::integer, "1"},
      {"analysis.fit_t_max", ValueKind::number, "1200"},
      {"analysis.fit_t_step", ValueKind::number, "0.5"},
      {"pump_probe.t_s_list", ValueKind::list, "15, 25, 35, 50, 70, 100"},
      {"pump_probe.late_offset", ValueKind::number, "600"},
      {"oracle.n_bins", ValueKind::integer, "2000"},
      {"oracle.window_gammas", ValueKind::number, "40"},
      {"oracle.dt", ValueKind::number, "0.5"},
      {"oracle.sricd_times", ValueKind::list, "30, 93, 200"},
      {"oracle.icd_times", ValueKind::list, "60, 150"},
      {"oracle.central_gammas", ValueKind::number, "10"},
      {"oracle.sricd_tol", ValueKind::number, "0.03"},
      {"oracle.icd_tol", ValueKind::number, "0.05"},
      {"oracle.gamma_scale", ValueKind::number, "1"},
  };
  return s;
}

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

inline const KeyDef* find_key(const std::string& key) {
  for (const auto& d : schema())
    if (key == d.key) return &d;
  return nullptr;
}

inline bool parse_number(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

inline std::vector<double> parse_list(const std::string& s, bool& ok) {
  std::vector<double> v;
  ok = true;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x;
    if (!parse_number(trim(item), x)) {
      ok = false;
      return {};
    }
    v.push_back(x);
  }
  return v;
}

inline void check_value(const KeyDef& d, const std::string& value, const std::string& where) {
  bool ok = true;
  double x = 0.0;
  switch (d.kind) {
    case ValueKind::number: ok = parse_number(value, x); break;
    case ValueKind::integer: ok = parse_number(value, x) && x == std::floor(x); break;
    case ValueKind::boolean: ok = value == "true" || value == "false"; break;
    case ValueKind::text: ok = !value.empty(); break;
    case ValueKind::list: parse_list(value, ok); break;
  }
  if (!ok) throw ConfigError(where + ": invalid value '" + value + "' for " + d.key);
}

class Values {
 public:
  explicit Values(const std::map<std::string, std::string>& m) : m_(m) {}
  double num(const char* k) const {
    double x = 0.0;
    parse_number(m_.at(k), x);
    return x;
  }
  int integer(const char* k) const { return static_cast<int>(num(k)); }
  bool flag(const char* k) const { return m_.at(k) == "true"; }
  const std::string& text(const char* k) const { return m_.at(k); }
  std::vector<double> list(const char* k) const {
    bool ok;
    return parse_list(m_.at(k), ok);
  }

 private:
  const std::map<std::string, std::string>& m_;
};

inline void require(bool cond, const std::string& key, const std::string& what) {
  if (!cond) throw ConfigError(key + ": " + what);
}

inline Config build_config(const std::map<std::string, std::string>& m) {
  const Values v(m);
  Config c;
  for (const auto& d : schema()) c.entries.emplace_back(d.key, m.at(d.key));

  for (const char* k : {"system.tau_sricd", "system.tau_other", "system.tau_icd", "xuv.intensity", "xuv.omega",
                        "xuv.fwhm", "quench.window", "grid.sricd_e_step", "grid.icd_e_step", "grid.t_step",
                        "analysis.fit_t_step", "analysis.fit_t_max", "oracle.dt", "oracle.window_gammas",
                        "oracle.central_gammas", "oracle.gamma_scale", "oracle.sricd_tol", "oracle.icd_tol"})
    require(v.num(k) > 0.0, k, "must be positive");
  require(v.num("quench.alpha") >= 0.0, "quench.alpha", "must be non-negative");
  require(v.num("xuv.n_cycles") >= 1.0, "xuv.n_cycles", "must be at least 1");
  require(v.num("system.q") != 0.0, "system.q", "must be non-zero");
  require(v.integer("quench.source_panels") >= 1, "quench.source_panels", "must be positive");
  require(v.integer("analysis.omit_leading") >= 0, "analysis.omit_leading", "must be non-negative");
  require(v.integer("oracle.n_bins") >= 200, "oracle.n_bins", "must be at least 200");

  c.system.srical = ResonanceChannel::from_ev_fs("sRICD", v.num("system.e_r"), v.num("system.e_fin_sricd"),
                                                 v.num("system.tau_sricd"));
  c.system.other = ResonanceChannel::from_ev_fs("pRICD+AI", v.num("system.e_r"), v.num("system.e_fin_other"),
                                                v.num("system.tau_other"));
  c.system.icd = ResonanceChannel::from_ev_fs("ICD", v.num("system.e_icd"), v.num("system.e_fin_icd"),
                                              v.num("system.tau_icd"));
  c.system.q = v.num("system.q");
  c.system.mu_rg = v.num("system.mu_rg");
  try {
    c.system.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }

  c.pulse = pulse_from_cycles(v.num("xuv.omega"), v.num("xuv.n_cycles"), v.num("xuv.fwhm"), v.num("xuv.intensity"));
  c.quench = IrQuench::from_window_fs(v.num("quench.t_s"), v.num("quench.window"), v.num("quench.alpha"));
  c.quench.enabled = v.flag("quench.enabled");
  if (c.quench.enabled)
    require(c.quench.onset() > c.pulse.end(), "quench.t_s", "quench window overlaps the XUV pulse");
  try {
    c.icd.mode = parse_icd_mode(v.text("quench.mode"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("quench.mode: ") + e.what());
  }
  c.icd.source_panels = v.integer("quench.source_panels");

  auto axis = [&](const char* lo, const char* hi, const char* st) {
    AxisSpec a{v.num(lo), v.num(hi), v.num(st)};
    require(a.max >= a.min, hi, std::string("must not be below ") + lo);
    return a;
  };
  c.grid.sricd_e = axis("grid.sricd_e_min", "grid.sricd_e_max", "grid.sricd_e_step");
  c.grid.icd_e = axis("grid.icd_e_min", "grid.icd_e_max", "grid.icd_e_step");
  c.grid.t = axis("grid.t_min", "grid.t_max", "grid.t_step");
  require(c.grid.sricd_e.min > 0.0 && c.grid.icd_e.min > 0.0, "grid", "kinetic energies must be positive");
  require(c.grid.sricd_e.max < c.grid.icd_e.min || c.grid.icd_e.max < c.grid.sricd_e.min, "grid",
          "sRICD and ICD energy windows must not overlap");

  c.analysis.fit_energy = v.num("analysis.fit_energy");
  c.analysis.omit_leading = v.integer("analysis.omit_leading");
  c.analysis.fit_t_max = v.num("analysis.fit_t_max");
  c.analysis.fit_t_step = v.num("analysis.fit_t_step");

  c.pump_probe.t_s_list = v.list("pump_probe.t_s_list");
  c.pump_probe.late_offset = v.num("pump_probe.late_offset");
  require(!c.pump_probe.t_s_list.empty(), "pump_probe.t_s_list", "must not be empty");

  c.oracle.n_bins = v.integer("oracle.n_bins");
  c.oracle.window_gammas = v.num("oracle.window_gammas");
  require(c.oracle.window_gammas >= 20.0, "oracle.window_gammas", "window narrower than 20 widths");
  c.oracle.dt = v.num("oracle.dt");
  c.oracle.sricd_times = v.list("oracle.sricd_times");
  c.oracle.icd_times = v.list("oracle.icd_times");
  c.oracle.central_gammas = v.num("oracle.central_gammas");
  c.oracle.sricd_tol = v.num("oracle.sricd_tol");
  c.oracle.icd_tol = v.num("oracle.icd_tol");
  c.oracle.gamma_scale = v.num("oracle.gamma_scale");
  return c;
}

}  // namespace detail

/// Parses INI-style text (sections [system], [xuv], [quench], [grid], [analysis], [pump_probe],
/// [oracle]; `key = value`; `#` or `;` comments), then applies `section.key=value` overrides.
/// Keys not given keep their defaults.
inline Config parse_config(std::istream& in, const std::vector<std::string>& overrides = {},
                           const std::string& source = "<config>") {
  std::map<std::string, std::string> m;
  for (const auto& d : detail::schema()) m[d.key] = d.fallback;

  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find_first_of("#;");
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of a section");
    const std::string key = section + "." + detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    const auto* def = detail::find_key(key);
    if (!def) throw ConfigError(where + ": unknown key " + key);
    detail::check_value(*def, value, where);
    m[key] = value;
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected section.key=value");
    const std::string key = detail::trim(o.substr(0, eq));
    const std::string value = detail::trim(o.substr(eq + 1));
    const auto* def = detail::find_key(key);
    if (!def) throw ConfigError("override '" + o + "': unknown key " + key);
    detail::check_value(*def, value, "override");
    m[key] = value;
  }
  try {
    return detail::build_config(m);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline Config parse_config_string(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

/// Config file that cannot be read (distinct from invalid content).
struct ConfigIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Config load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigIoError("cannot open config file " + path);
  return parse_config(in, overrides, path);
}

inline Config default_config() { return parse_config_string(""); }

}  // namespace ricd
