// ricd_cli: time-resolved sRICD / ICD spectra, pump-probe scans, lifetime fits and the
// discretized-continuum cross-check.
//
// Exit codes: 0 ok, 2 configuration, 3 I/O, 4 data, 5 threshold breach.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ricd/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ricd;

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kData = 4, kThreshold = 5 };

struct Common {
  std::string config;
  std::string out = "ricd_out";
  std::vector<std::string> overrides;
  int workers = default_workers();
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "INI config file (built-in defaults when omitted)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--override", c.overrides, "section.key=value, repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->allow_extra_args(false);
  sub->add_option("--workers", c.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

Config resolve(const Common& c) {
  return c.config.empty() ? parse_config_string("", c.overrides) : load_config(c.config, c.overrides);
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return fs::path(dir);
}

using Meta = std::vector<std::pair<std::string, std::string>>;

Meta base_metadata(const Config& cfg, const std::string& command) {
  Meta m = run_metadata(cfg, Channel::none);
  m.insert(m.begin() + 1, {"command", command});
  return m;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

void write_header(std::ostream& out, const Meta& m) {
  for (const auto& [k, v] : m) out << "# " << k << " = " << v << '\n';
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw IoError("write failed for " + p.string());
}

int run_simulate(const Common& c, const std::string& frames) {
  const Config cfg = resolve(c);
  const fs::path dir = prepare_out(c.out);
  SimulationResult r = simulate_grid(cfg, c.workers);
  annotate_late_line(r.srical);
  annotate_late_line(r.icd);
  write_csv(r.srical, (dir / "srical.csv").string());
  write_csv(r.icd, (dir / "icd.csv").string());
  write_heatmap_svg(r.srical, (dir / "srical.svg").string());
  write_heatmap_svg(r.icd, (dir / "icd.svg").string());
  if (!frames.empty()) {
    const fs::path fdir = fs::path(frames).is_absolute() ? fs::path(frames) : dir / frames;
    write_frames(r.srical, fdir.string(), "srical");
    write_frames(r.icd, fdir.string(), "icd");
  }
  Meta m = base_metadata(cfg, "simulate");
  for (const auto* g : {&r.srical, &r.icd})
    for (const auto& kv : g->metadata)
      if (kv.first.rfind("result.", 0) == 0) m.push_back(kv);
  const fs::path mp = dir / "metadata.txt";
  auto out = open_out(mp);
  for (const auto& [k, v] : m) out << k << " = " << v << '\n';
  finish(out, mp);
  for (const auto& [k, v] : m)
    if (k.rfind("result.", 0) == 0) std::cout << k << " = " << v << '\n';
  return kOk;
}

int run_pump_probe(const Common& c) {
  const Config cfg = resolve(c);
  const fs::path dir = prepare_out(c.out);
  const PumpProbeResult r = pump_probe(cfg, c.workers);
  int accepted = 0;
  for (std::size_t k = 0; k < r.entries.size(); ++k) {
    const auto& e = r.entries[k];
    if (!e.accepted) {
      std::cerr << "warning: t_s = " << format_number(e.t_s) << " fs rejected: " << e.reason << '\n';
      continue;
    }
    ++accepted;
    const std::string stem = "pump_probe_" + std::to_string(k);
    write_csv(e.srical, (dir / (stem + "_srical.csv")).string());
    write_csv(e.icd, (dir / (stem + "_icd.csv")).string());
  }
  if (accepted == 0) throw DataError("pump-probe: every t_s was rejected");

  Meta m = base_metadata(cfg, "pump-probe");
  m.emplace_back("fit.model", "yield = A exp(-t_s / tau), least squares on ln(yield)");
  m.emplace_back("fit.icd_tau_fs", r.icd_tau ? format_number(*r.icd_tau) : "n/a");
  m.emplace_back("fit.srical_suppressed_tau_fs", r.suppressed_tau ? format_number(*r.suppressed_tau) : "n/a");
  const fs::path sp = dir / "pump_probe_summary.csv";
  auto out = open_out(sp);
  write_header(out, m);
  out << "t_s_fs,status,t_late_fs,srical_yield,srical_suppressed,icd_yield\n";
  for (const auto& e : r.entries) {
    out << format_number(e.t_s) << ',';
    if (e.accepted)
      out << "ok," << format_number(e.t_late) << ',' << format_number(e.srical_yield) << ','
          << format_number(e.srical_suppressed) << ',' << format_number(e.icd_yield) << '\n';
    else
      out << "rejected,,,,\n";
  }
  finish(out, sp);
  std::cout << "fit.icd_tau_fs = " << (r.icd_tau ? format_number(*r.icd_tau) : "n/a") << '\n';
  return kOk;
}

int run_fit(const Common& c, const std::string& input, std::optional<double> energy, std::optional<int> omit) {
  const Config cfg = resolve(c);
  const int omit_leading = omit.value_or(cfg.analysis.omit_leading);
  const double e_kin = energy.value_or(cfg.analysis.fit_energy);
  TimeTrace tr;
  if (input.empty()) {
    Config c2 = cfg;
    c2.analysis.fit_energy = e_kin;
    tr = free_decay_trace(c2);
  } else {
    tr = trace_from_grid(read_csv(input), e_kin);
  }
  const auto maxima = extract_maxima(tr.t, tr.p, omit_leading);
  const LifetimeFit f = fit_lifetime(maxima, omit_leading);

  const fs::path dir = prepare_out(c.out);
  Meta m = base_metadata(cfg, "fit");
  m.emplace_back("fit.source", input.empty() ? "free-decay trace (quench off)" : input);
  m.emplace_back("fit.energy_ev", format_number(tr.e_kin));
  m.emplace_back("fit.omit_leading", std::to_string(omit_leading));
  m.emplace_back("fit.maxima_used", std::to_string(f.maxima_used));
  m.emplace_back("fit.a", format_number(f.a));
  m.emplace_back("fit.b_fs", format_number(f.b));
  m.emplace_back("fit.c", format_number(f.c));
  m.emplace_back("fit.d_fs", format_number(f.d));
  m.emplace_back("fit.d_error_fs", format_number(f.d_error));
  m.emplace_back("fit.residual_norm", format_number(f.residual_norm));
  m.emplace_back("fit.iterations", std::to_string(f.iterations));

  const fs::path rp = dir / "fit_report.txt";
  auto rep = open_out(rp);
  for (const auto& [k, v] : m) rep << k << " = " << v << '\n';
  finish(rep, rp);

  const fs::path mp = dir / "fit_maxima.csv";
  auto out = open_out(mp);
  write_header(out, m);
  out << "t_fs,P,leading\n";
  for (const auto& x : maxima) out << format_number(x.t) << ',' << format_number(x.value) << ',' << (x.leading ? 1 : 0) << '\n';
  finish(out, mp);
  std::cout << "fit.d_fs = " << format_number(f.d) << " +- " << format_number(f.d_error) << '\n';
  return kOk;
}

int run_oracle(const Common& c) {
  const Config cfg = resolve(c);
  const OracleReport rep = oracle_compare(cfg);
  const fs::path dir = prepare_out(c.out);
  Meta m = base_metadata(cfg, "oracle-compare");
  m.emplace_back("oracle.max_norm_drift", format_number(rep.max_norm_drift));
  m.emplace_back("oracle.status", rep.pass() ? "pass" : "fail");

  const auto name = [](OracleChannel ch) { return ch == OracleChannel::srical ? "srical" : "icd"; };
  const fs::path cp = dir / "oracle_compare.csv";
  auto out = open_out(cp);
  write_header(out, m);
  out << "channel,t_fs,E_kin_eV,analytic,oracle_scaled,deviation\n";
  for (const auto& k : rep.checks)
    for (std::size_t i = 0; i < k.e.size(); ++i)
      out << name(k.channel) << ',' << format_number(k.t) << ',' << format_number(k.e[i]) << ','
          << format_number(k.analytic[i]) << ',' << format_number(k.oracle_scaled[i]) << ','
          << format_number(k.oracle_scaled[i] - k.analytic[i]) << '\n';
  finish(out, cp);

  const fs::path sp = dir / "oracle_summary.csv";
  auto sum = open_out(sp);
  write_header(sum, m);
  sum << "channel,t_fs,scale,rms,tolerance,worst_E_kin_eV,worst_deviation,status\n";
  for (const auto& k : rep.checks) {
    sum << name(k.channel) << ',' << format_number(k.t) << ',' << format_number(k.agreement.scale) << ','
        << format_number(k.agreement.rms) << ',' << format_number(k.tolerance) << ','
        << format_number(k.agreement.worst_e) << ',' << format_number(k.agreement.worst_dev) << ','
        << (k.pass() ? "pass" : "fail") << '\n';
    std::cout << name(k.channel) << " t = " << format_number(k.t) << " fs: rms " << format_number(k.agreement.rms)
              << " (tolerance " << format_number(k.tolerance) << ")" << (k.pass() ? "" : "  FAIL") << '\n';
  }
  finish(sum, sp);
  if (!rep.pass()) {
    std::cerr << "error: oracle deviation above tolerance\n";
    return kThreshold;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-resolved sRICD and ICD electron spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common sim_c, pp_c, fit_c, or_c;
  std::string frames;
  auto* sim = app.add_subcommand("simulate", "sRICD and ICD spectrograms on the configured grids");
  add_common(sim, sim_c);
  sim->add_option("--frames", frames, "also write one CSV per time step into this directory (relative to --out)");

  auto* pp = app.add_subcommand("pump-probe", "late-time spectra and yields over pump_probe.t_s_list");
  add_common(pp, pp_c);

  std::string input;
  std::optional<double> energy;
  std::optional<int> omit;
  auto* fit = app.add_subcommand("fit", "lifetime from the maxima of P(E, t) at one energy");
  add_common(fit, fit_c);
  fit->add_option("--input", input, "spectrogram CSV written by simulate (default: free-decay trace)");
  fit->add_option("--energy", energy, "kinetic energy in eV (default analysis.fit_energy)");
  fit->add_option("--omit-leading", omit, "maxima dropped before the fit (default analysis.omit_leading)")
      ->check(CLI::NonNegativeNumber);

  auto* orc = app.add_subcommand("oracle-compare", "compare with the discretized-continuum propagation");
  add_common(orc, or_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_c, frames);
    if (pp->parsed()) return run_pump_probe(pp_c);
    if (fit->parsed()) return run_fit(fit_c, input, energy, omit);
    if (orc->parsed()) return run_oracle(or_c);
  } catch (const ConfigIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const OracleError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
