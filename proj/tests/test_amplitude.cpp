#include <gtest/gtest.h>

#include <vector>

#include "ricd/amplitude.hpp"

using namespace ricd;

namespace {

double ev(double x) { return units::ev_to_au(x); }
double fs(double x) { return units::fs_to_au(x); }

XuvPulse untruncated(XuvPulse p) {
  p.t_x = 40.0 * p.sigma;  // edges at 20 sigma, e^{-200}
  return p;
}

// Least-squares slope of log(y) against t.
double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double l = std::log(y[i]);
    st += t[i];
    sy += l;
    stt += t[i] * t[i];
    sty += t[i] * l;
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace

TEST(FreePhase, UnitModulusAndPeriodicity) {
  EXPECT_EQ(free_phase(0.3, 1.2, 5.0, 5.0), cplx(1.0));
  const cplx wrap = free_phase(2.0 * kPi - 1.0, 1.0, 1.0, 0.0);
  EXPECT_NEAR(wrap.real(), 1.0, 1e-15);
  EXPECT_NEAR(wrap.imag(), 0.0, 1e-15);
  const cplx v = free_phase(0.194, 1.5588, 10.0, 0.0);
  EXPECT_NEAR(v.real(), 0.24666790716842179, 1e-14);
  EXPECT_NEAR(v.imag(), 0.96910006891607992, 1e-14);
  EXPECT_NEAR(std::abs(free_phase(0.7, 3.1, 1234.5, -17.0)), 1.0, 1e-15);
  EXPECT_THROW(free_phase(0.1, 0.1, 0.0, 1.0), DomainError);
}

TEST(DirectTerm, ResonanceAndDetuning) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  const double e0 = p.omega - sys.srical.e_fin;
  const double t = fs(93.0);
  const cplx on = direct_term(e0, t, sys, p);
  const double want = p.a0() * p.omega * sys.mu_c_srical() / 4.0 * std::erf(p.t_x / (2.0 * std::sqrt(2.0) * p.sigma));
  EXPECT_NEAR(std::abs(on), want, 1e-14 * want);
  // magnitude is time independent, phase advances at eps
  const cplx later = direct_term(e0, t + 50.0, sys, p);
  EXPECT_NEAR(std::abs(later), std::abs(on), 1e-15 * want);
  EXPECT_NEAR(std::arg(later / on), std::remainder(-p.omega * 50.0, 2.0 * kPi), 1e-9);
  // Gaussian suppression 0.5 eV off resonance (untruncated support)
  const XuvPulse u = untruncated(p);
  const double r = std::abs(direct_term(e0 + ev(0.5), t, sys, u)) / std::abs(direct_term(e0, t, sys, u));
  EXPECT_NEAR(r, 0.14426875963245413, 1e-12);
  ModelSystem noc = sys;
  noc.q = INFINITY;
  EXPECT_EQ(direct_term(e0, t, noc, p), cplx(0.0));
  EXPECT_THROW(direct_term(e0, 0.0, sys, p), ContractError);
}

TEST(ResonantCore, PoleAndLongTimeLimit) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  const double e_res = sys.e_r() - sys.srical.e_fin;
  const cplx z{sys.e_r(), -0.5 * sys.gamma_r()};
  EXPECT_NEAR(units::au_to_ev(std::abs(z - sys.e_r())), 4.702375219103338e-3, 1e-15);
  const auto late = resonant_core_parts(e_res + ev(0.003), fs(3000.0), sys, p);
  EXPECT_LT(std::abs(late.decaying), 1e-9 * std::abs(late.stationary));
  const auto early = resonant_core_parts(e_res, fs(20.0), sys, p);
  EXPECT_GT(std::abs(early.decaying), 0.5 * std::abs(early.stationary));
}

TEST(ResonantCore, FarDetunedPulseVanishes) {
  const ModelSystem sys = neon_dimer_system();
  XuvPulse p = untruncated(neon_dimer_pulse());
  p.omega = sys.e_r() + ev(3.0);
  const double e_res = sys.e_r() - sys.srical.e_fin;
  const cplx z{sys.e_r(), -0.5 * sys.gamma_r()};
  const auto c = resonant_core_parts(e_res, fs(200.0), sys, p);
  const double unit = p.a0() * p.omega / 4.0;
  // each Gaussian factor alone
  EXPECT_LT(std::abs(c.stationary * (z - sys.e_r())) / unit, 6e-31);
  EXPECT_LT(std::abs(c.decaying * (z - sys.e_r())) / unit, 6e-31);
  // and the probability relative to the resonant case
  XuvPulse ref = untruncated(neon_dimer_pulse());
  const double pr = std::norm(amplitude_post_pulse(e_res, fs(200.0), sys, p).total) /
                    std::norm(amplitude_post_pulse(e_res, fs(200.0), sys, ref).total);
  EXPECT_LT(pr, 1e-50);
}

TEST(AmplitudeBreakdown, PrefactorStructure) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  const double e = ev(5.28);
  const auto b = amplitude_post_pulse(e, fs(93.0), sys, p);
  EXPECT_LE(std::abs(b.total - (b.direct + b.resonant + b.indirect_srical + b.indirect_other)), 1e-15 * std::abs(b.total));
  EXPECT_NEAR(std::abs(b.indirect_srical) / std::abs(b.resonant), 0.1, 1e-12);
  EXPECT_NEAR(std::abs(b.indirect_other) / std::abs(b.resonant), 0.1, 1e-12);

  ModelSystem noc = sys;
  noc.q = INFINITY;
  const auto l = amplitude_post_pulse(e, fs(93.0), noc, p);
  EXPECT_EQ(l.direct, cplx(0.0));
  EXPECT_EQ(l.indirect_srical, cplx(0.0));
  EXPECT_EQ(l.indirect_other, cplx(0.0));
  EXPECT_EQ(l.total, l.resonant);

  ModelSystem bare = sys;
  bare.srical.tau = kNoChannel;
  bare.other.tau = kNoChannel;
  bare.mu_c_fixed = 2.0;
  const auto d = amplitude_post_pulse(e, fs(93.0), bare, p);
  EXPECT_NE(d.direct, cplx(0.0));
  EXPECT_EQ(d.total, d.direct);
}

TEST(AmplitudeNumeric, MatchesPostPulseFormOnProbeGrid) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double e = ev(4.3 + 0.1 * i);
    for (int j = 0; j <= 10; ++j) {
      const double t = fs(5.0 + 39.5 * j);
      const cplx a = amplitude_post_pulse(e, t, sys, p).total;
      const auto n = amplitude_numeric(e, t, sys, p);
      EXPECT_TRUE(n.converged);
      worst = std::max(worst, std::abs(n.value - a) / std::abs(a));
    }
  }
  EXPECT_LE(worst, 1e-6);
  const double e = ev(5.28), t = fs(93.0);
  const cplx a = amplitude_post_pulse(e, t, sys, p).total;
  EXPECT_LE(std::abs(amplitude_numeric(e, t, sys, p).value - a) / std::abs(a), 1e-6);
}

TEST(AmplitudeNumeric, BeforeAndInsidePulse) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  EXPECT_EQ(amplitude_numeric(ev(5.28), p.start(), sys, p).value, cplx(0.0));
  EXPECT_EQ(amplitude_numeric(ev(5.28), p.start() - 100.0, sys, p).value, cplx(0.0));
  const auto mid = amplitude_numeric(ev(5.28), 0.0, sys, p);
  EXPECT_TRUE(mid.converged);
  EXPECT_GT(std::abs(mid.value), 0.0);
  EXPECT_LT(std::abs(mid.value), std::abs(amplitude_numeric(ev(5.28), p.end(), sys, p).value));
}

TEST(AmplitudeLinearity, ScalesWithFieldAmplitude) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  XuvPulse p4 = p;
  p4.intensity_wcm2 *= 4.0;
  for (double e : {4.5, 5.2792, 5.3, 6.1}) {
    for (double t : {10.0, 93.0, 300.0}) {
      const cplx a = amplitude_post_pulse(ev(e), fs(t), sys, p).total;
      const cplx b = amplitude_post_pulse(ev(e), fs(t), sys, p4).total;
      EXPECT_LE(std::abs(b - 2.0 * a), 1e-13 * std::abs(a));
      const cplx na = amplitude_numeric(ev(e), fs(t), sys, p).value;
      const cplx nb = amplitude_numeric(ev(e), fs(t), sys, p4).value;
      EXPECT_LE(std::abs(nb - 2.0 * na), 1e-13 * std::abs(na));
    }
  }
}

TEST(LineShape, LongTimeFanoProfile) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  const double hw = 0.5 * sys.gamma_r();
  const double r = sys.srical.gamma() / sys.gamma_r();
  const double e_res = sys.e_r() - sys.srical.e_fin;
  const double t = fs(3000.0);
  for (double x = -20.0; x <= 20.0; x += 0.5) {
    const double e = e_res + x * hw;
    const double eps = e + sys.srical.e_fin;
    const double tr = std::abs(detail::gaussian_window_transform(eps - p.omega, p));
    const double scale = p.a0() * p.omega * sys.mu_c_srical() / 4.0 * tr;
    const double got = std::norm(amplitude_post_pulse(e, t, sys, p).total) / (scale * scale);
    const double want = ((x + sys.q * r) * (x + sys.q * r) + (1 - 2 * r) * (1 - 2 * r)) / (1 + x * x);
    EXPECT_NEAR(got, want, 1e-8 * std::max(want, 1.0)) << x;
  }
}

TEST(LineShape, AsymmetryFlipsWithSignOfQ) {
  const XuvPulse p = neon_dimer_pulse();
  for (double q : {10.0, -10.0}) {
    const ModelSystem sys = neon_dimer_system(q);
    const double hw = 0.5 * sys.gamma_r();
    const double r = sys.srical.gamma() / sys.gamma_r();
    const double e_res = sys.e_r() - sys.srical.e_fin;
    const double lo = std::norm(amplitude_post_pulse(e_res - 10.0 * r * hw, fs(1000.0), sys, p).total);
    const double hi = std::norm(amplitude_post_pulse(e_res + 10.0 * r * hw, fs(1000.0), sys, p).total);
    if (q > 0) EXPECT_LT(lo, 0.01 * hi);
    else EXPECT_LT(hi, 0.01 * lo);
  }
}

TEST(LineShape, TwoDampingScales) {
  const ModelSystem sys = neon_dimer_system();
  const XuvPulse p = neon_dimer_pulse();
  const DecayPrefactor pf = decay_prefactor(sys);
  const double e = sys.e_r() - sys.srical.e_fin + units::ev_to_au(0.01);
  std::vector<double> ts, sq, cross;
  for (double tf = 150.0; tf <= 400.0; tf += 5.0) {
    const double t = fs(tf);
    const auto c = resonant_core_parts(e, t, sys, p);
    const cplx dec = pf.sum() * c.decaying;
    const cplx stat = pf.sum() * c.stationary + direct_term(e, t, sys, p);
    ts.push_back(t);
    sq.push_back(std::norm(dec));
    cross.push_back(std::abs(std::conj(stat) * dec));
  }
  EXPECT_NEAR(-log_slope(ts, sq) / sys.gamma_r(), 1.0, 0.02);
  EXPECT_NEAR(-log_slope(ts, cross) / (0.5 * sys.gamma_r()), 1.0, 0.02);
}
