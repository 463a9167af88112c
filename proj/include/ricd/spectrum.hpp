#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ricd/amplitude.hpp"
#include "ricd/config.hpp"
#include "ricd/parallel.hpp"
#include "ricd/quench.hpp"
#include "ricd/units.hpp"

namespace ricd {

inline constexpr const char* kVersion = "1.0.0";

enum class Channel { srical, icd, none };

inline const char* channel_name(Channel c) {
  switch (c) {
    case Channel::srical: return "srical";
    case Channel::icd: return "icd";
    default: return "none";
  }
}

struct ChannelWindows {
  double srical_lo = 4.3, srical_hi = 6.3;  // eV
  double icd_lo = 0.1, icd_hi = 1.1;        // eV

  static ChannelWindows from(const GridSpec& g) { return {g.sricd_e.min, g.sricd_e.max, g.icd_e.min, g.icd_e.max}; }
  Channel classify(double e_ev) const {
    if (e_ev >= srical_lo && e_ev <= srical_hi) return Channel::srical;
    if (e_ev >= icd_lo && e_ev <= icd_hi) return Channel::icd;
    return Channel::none;
  }
};

struct ProbabilityResult {
  double value = 0.0;
  Channel channel = Channel::none;
  bool in_window() const { return channel != Channel::none; }
};

/// P(E_kin, t) in the channel whose window contains E_kin. Energies in eV, times in fs. A
/// disabled quench (or none) gives the unquenched sRICD signal and no ICD signal.
inline ProbabilityResult probability(double e_kin_ev, double t_fs, const ModelSystem& sys, const XuvPulse& pulse,
                                     const IrQuench& quench, const ChannelWindows& windows = {},
                                     const IcdOptions& icd = {}) {
  ProbabilityResult r;
  r.channel = windows.classify(e_kin_ev);
  if (!r.in_window()) return r;
  const QuenchModel m(sys, pulse, quench, icd);
  const double e = units::ev_to_au(e_kin_ev), t = units::fs_to_au(t_fs);
  r.value = std::norm(r.channel == Channel::srical ? m.srical(e, t) : m.icd(e, t));
  return r;
}

/// Voigt-type reference exp[-sigma^2 (eps - Omega)^2] / [(eps - E_R)^2 + Gamma_R^2/4], a.u.
inline double voigt_reference(double e_kin_ev, const ModelSystem& sys, const XuvPulse& pulse) {
  const double eps = units::ev_to_au(e_kin_ev) + sys.srical.e_fin;
  const double d = eps - pulse.omega, x = eps - sys.e_r(), g = sys.gamma_r();
  return std::exp(-pulse.sigma * pulse.sigma * d * d) / (x * x + 0.25 * g * g);
}

/// P over an energy (eV) x time (fs) grid; values row-major by time.
struct SpectrumGrid {
  std::vector<double> e_axis;
  std::vector<double> t_axis;
  std::vector<double> values;
  Channel channel = Channel::srical;
  std::vector<std::pair<std::string, std::string>> metadata;

  double at(std::size_t ti, std::size_t ei) const { return values[ti * e_axis.size() + ei]; }
  double& at(std::size_t ti, std::size_t ei) { return values[ti * e_axis.size() + ei]; }
  std::vector<double> slice_at_time(std::size_t ti) const {
    return {values.begin() + static_cast<long>(ti * e_axis.size()),
            values.begin() + static_cast<long>((ti + 1) * e_axis.size())};
  }
  std::vector<double> trace_at_energy(std::size_t ei) const {
    std::vector<double> v(t_axis.size());
    for (std::size_t ti = 0; ti < t_axis.size(); ++ti) v[ti] = at(ti, ei);
    return v;
  }
  void set_meta(const std::string& k, const std::string& v) {
    for (auto& kv : metadata)
      if (kv.first == k) {
        kv.second = v;
        return;
      }
    metadata.emplace_back(k, v);
  }
};

inline std::string format_number(double x) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

inline std::vector<std::pair<std::string, std::string>> run_metadata(const Config& cfg, Channel ch) {
  std::vector<std::pair<std::string, std::string>> m;
  m.emplace_back("code.version", kVersion);
  m.emplace_back("channel", channel_name(ch));
  for (const auto& kv : cfg.entries) m.push_back(kv);
  const auto& s = cfg.system;
  m.emplace_back("derived.sricd_line_ev", format_number(units::au_to_ev(s.srical.kinetic_energy())));
  m.emplace_back("derived.icd_line_ev", format_number(units::au_to_ev(s.icd.kinetic_energy())));
  m.emplace_back("derived.other_line_ev", format_number(units::au_to_ev(s.other.kinetic_energy())));
  m.emplace_back("derived.tau_eff_fs", format_number(units::au_to_fs(s.tau_eff())));
  m.emplace_back("units", "E_kin in eV, t in fs, P in arbitrary units");
  return m;
}

struct SimulationResult {
  SpectrumGrid srical;
  SpectrumGrid icd;
};

/// Evaluates both channels on the configured grids. Each energy row is computed
/// independently, so the result does not depend on the worker count.
inline SimulationResult simulate_grid(const Config& cfg, int workers = 1) {
  const auto t_fs = cfg.grid.t.values();
  if (t_fs.empty()) throw ConfigError("grid.t: empty time axis");
  std::vector<double> t_au(t_fs.size());
  std::transform(t_fs.begin(), t_fs.end(), t_au.begin(), units::fs_to_au);

  const QuenchModel model(cfg.system, cfg.pulse, cfg.quench, cfg.icd);
  SimulationResult r;
  r.srical.channel = Channel::srical;
  r.icd.channel = Channel::icd;
  r.srical.e_axis = cfg.grid.sricd_e.values();
  r.icd.e_axis = cfg.grid.icd_e.values();
  for (auto* g : {&r.srical, &r.icd}) {
    if (g->e_axis.empty()) throw ConfigError("grid: empty energy axis");
    g->t_axis = t_fs;
    g->values.assign(t_fs.size() * g->e_axis.size(), 0.0);
    g->metadata = run_metadata(cfg, g->channel);
  }
  const std::size_t ns = r.srical.e_axis.size(), ni = r.icd.e_axis.size();
  parallel_for(ns + ni, workers, [&](std::size_t k) {
    SpectrumGrid& g = k < ns ? r.srical : r.icd;
    const std::size_t ei = k < ns ? k : k - ns;
    const double e = units::ev_to_au(g.e_axis[ei]);
    const auto row = k < ns ? model.srical_row(e, t_au) : model.icd_row(e, t_au);
    for (std::size_t ti = 0; ti < t_au.size(); ++ti) g.at(ti, ei) = std::norm(row[ti]);
  });
  return r;
}

// ---- CSV -----------------------------------------------------------------------------

inline constexpr const char* kCornerLabel = "t_fs/E_kin_eV";

inline void write_csv(const SpectrumGrid& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& [k, v] : g.metadata) out << "# " << k << " = " << v << '\n';
  out << kCornerLabel;
  for (double e : g.e_axis) out << ',' << format_number(e);
  out << '\n';
  for (std::size_t ti = 0; ti < g.t_axis.size(); ++ti) {
    out << format_number(g.t_axis[ti]);
    for (std::size_t ei = 0; ei < g.e_axis.size(); ++ei) out << ',' << format_number(g.at(ti, ei));
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

namespace detail {

inline std::vector<double> parse_csv_numbers(const std::string& line, const std::string& where, bool skip_first_label) {
  std::vector<double> v;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= line.size()) {
    auto end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    const std::string cell = trim(std::string_view(line).substr(pos, end - pos));
    if (!(first && skip_first_label)) {
      double x;
      if (!parse_number(cell, x)) throw DataError(where + ": not a number: '" + cell + "'");
      v.push_back(x);
    }
    first = false;
    pos = end + 1;
  }
  return v;
}

}  // namespace detail

inline SpectrumGrid read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  SpectrumGrid g;
  std::string line;
  int lineno = 0;
  bool have_axis = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) g.metadata.emplace_back(detail::trim(line.substr(1, eq - 1)), line.substr(eq + 3));
      continue;
    }
    if (!have_axis) {
      g.e_axis = detail::parse_csv_numbers(line, where, true);
      have_axis = true;
      continue;
    }
    const auto row = detail::parse_csv_numbers(line, where, false);
    if (row.size() != g.e_axis.size() + 1) throw DataError(where + ": row width does not match the energy axis");
    g.t_axis.push_back(row[0]);
    g.values.insert(g.values.end(), row.begin() + 1, row.end());
  }
  if (!have_axis) throw DataError(path + ": no energy axis row");
  for (const auto& [k, v] : g.metadata)
    if (k == "channel") g.channel = v == "icd" ? Channel::icd : v == "srical" ? Channel::srical : Channel::none;
  return g;
}

/// One CSV per time step, named <stem>_<index>.csv with zero-padded indices.
inline std::vector<std::string> write_frames(const SpectrumGrid& g, const std::string& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::size_t digits = std::max<std::size_t>(5, std::to_string(g.t_axis.size()).size());
  std::vector<std::string> paths;
  for (std::size_t ti = 0; ti < g.t_axis.size(); ++ti) {
    std::string idx = std::to_string(ti);
    idx.insert(0, digits - idx.size(), '0');
    const std::string path = (std::filesystem::path(dir) / (stem + "_" + idx + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [k, v] : g.metadata) out << "# " << k << " = " << v << '\n';
    out << "# t_fs = " << format_number(g.t_axis[ti]) << '\n';
    out << "E_kin_eV,P\n";
    for (std::size_t ei = 0; ei < g.e_axis.size(); ++ei)
      out << format_number(g.e_axis[ei]) << ',' << format_number(g.at(ti, ei)) << '\n';
    if (!out) throw IoError("write failed for " + path);
    paths.push_back(path);
  }
  return paths;
}

// ---- SVG heatmap -----------------------------------------------------------------------

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string r;
  for (char ch : s) {
    switch (ch) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      default: r += ch;
    }
  }
  return r;
}

// Fixed colormap: black -> indigo -> crimson -> orange -> pale yellow, linear in P / max P.
inline std::array<int, 3> heat_color(double x) {
  static constexpr double stops[5][3] = {
      {0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}};
  x = std::clamp(x, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const double f = x - i;
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return c;
}

}  // namespace detail

/// Static heatmap (energy horizontal, time vertical, time increasing upwards). Large grids are
/// block-averaged to at most max_cells per axis.
inline void write_heatmap_svg(const SpectrumGrid& g, const std::string& path, std::size_t max_cells = 256) {
  const std::size_t ne = g.e_axis.size(), nt = g.t_axis.size();
  if (ne == 0 || nt == 0) throw DataError("write_heatmap_svg: empty grid");
  const std::size_t be = (ne + max_cells - 1) / max_cells, bt = (nt + max_cells - 1) / max_cells;
  const std::size_t ce = (ne + be - 1) / be, ct = (nt + bt - 1) / bt;
  std::vector<double> cells(ce * ct, 0.0);
  for (std::size_t j = 0; j < ct; ++j)
    for (std::size_t i = 0; i < ce; ++i) {
      double s = 0.0;
      int n = 0;
      for (std::size_t tj = j * bt; tj < std::min(nt, (j + 1) * bt); ++tj)
        for (std::size_t ei = i * be; ei < std::min(ne, (i + 1) * be); ++ei, ++n) s += g.at(tj, ei);
      cells[j * ce + i] = s / n;
    }
  const double peak = *std::max_element(cells.begin(), cells.end());

  const double W = 640, H = 480, left = 80, top = 30, right = 110, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<title>P(E_kin, t), channel " << channel_name(g.channel) << "</title>\n";
  if (!g.metadata.empty()) {
    out << "<metadata>\n";
    for (const auto& [k, v] : g.metadata) out << detail::xml_escape(k) << " = " << detail::xml_escape(v) << '\n';
    out << "</metadata>\n";
  }
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g shape-rendering=\"crispEdges\">\n";
  const double cw = pw / ce, chh = ph / ct;
  for (std::size_t j = 0; j < ct; ++j) {
    const double y = top + ph - (j + 1) * chh;
    std::size_t i = 0;
    while (i < ce) {
      const auto col = detail::heat_color(peak > 0 ? cells[j * ce + i] / peak : 0.0);
      std::size_t k = i + 1;
      while (k < ce && detail::heat_color(peak > 0 ? cells[j * ce + k] / peak : 0.0) == col) ++k;
      out << "<rect x=\"" << format_number(left + i * cw) << "\" y=\"" << format_number(y) << "\" width=\""
          << format_number((k - i) * cw + 0.01) << "\" height=\"" << format_number(chh + 0.01) << "\" fill=\"rgb("
          << col[0] << ',' << col[1] << ',' << col[2] << ")\"/>\n";
      i = k;
    }
  }
  out << "</g>\n<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick_label = [](double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
  };
  for (int k = 0; k <= 4; ++k) {
    const double fx = k / 4.0;
    const double ev = g.e_axis.front() + fx * (g.e_axis.back() - g.e_axis.front());
    const double x = left + fx * pw;
    out << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << tick_label(ev) << "</text>\n";
    const double tv = g.t_axis.front() + fx * (g.t_axis.back() - g.t_axis.front());
    const double y = top + ph - fx * ph;
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << tick_label(tv) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">E_kin (eV)</text>\n";
  out << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << top + ph / 2 << ")\">t (fs)</text>\n";
  // color bar
  const double bx = left + pw + 25;
  for (int k = 0; k < 64; ++k) {
    const auto c = detail::heat_color((k + 0.5) / 64.0);
    out << "<rect x=\"" << bx << "\" y=\"" << format_number(top + ph - (k + 1) * ph / 64) << "\" width=\"16\" height=\""
        << format_number(ph / 64 + 0.01) << "\" fill=\"rgb(" << c[0] << ',' << c[1] << ',' << c[2] << ")\"/>\n";
  }
  out << "<text x=\"" << bx + 20 << "\" y=\"" << top + 10 << "\">" << tick_label(peak) << "</text>\n";
  out << "<text x=\"" << bx + 20 << "\" y=\"" << top + ph << "\">0</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace ricd
