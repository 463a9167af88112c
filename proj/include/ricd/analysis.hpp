#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ricd/units.hpp"

namespace ricd {

/// Damped beat of a decaying resonance against one kinetic energy:
/// cos[(E_r - E_kin - E_fin) t] exp(-Gamma t / 2). Gamma is the total width of the resonance
/// (a.u.); energies in eV, t in fs.
inline double oscillation_reference(double e_kin_ev, double t_fs, const ResonanceChannel& ch, double gamma) {
  const double det = ch.e_r - units::ev_to_au(e_kin_ev) - ch.e_fin;
  const double t = units::fs_to_au(t_fs);
  return std::cos(det * t) * std::exp(-0.5 * gamma * t);
}

inline double oscillation_reference(double e_kin_ev, double t_fs, const ResonanceChannel& ch) {
  return oscillation_reference(e_kin_ev, t_fs, ch, ch.gamma());
}

/// 2 pi / |E_r - E_kin - E_fin| in fs; infinite on resonance.
inline double oscillation_period_fs(double e_kin_ev, const ResonanceChannel& ch) {
  const double det = std::abs(ch.e_r - units::ev_to_au(e_kin_ev) - ch.e_fin);
  if (det == 0.0) return std::numeric_limits<double>::infinity();
  return units::au_to_fs(2.0 * kPi / det);
}

struct Maximum {
  double t = 0.0;
  double value = 0.0;
  bool leading = false;  // inside the early region where faster-damped terms still contribute
};

/// Local maxima by the three-point test, refined by a parabola through the neighbours. An
/// endpoint counts only when the parabola through it and its two neighbours peaks within half
/// a step of it (a stationary maximum cut by the sampling window, not a monotone edge). The
/// first `flag_leading` maxima are flagged. Fewer than three maxima is a DataError.
inline std::vector<Maximum> extract_maxima(const std::vector<double>& t, const std::vector<double>& v,
                                           int flag_leading = 1) {
  if (t.size() != v.size()) throw DataError("extract_maxima: time and value lengths differ");
  const std::size_t n = v.size();
  std::vector<Maximum> out;
  // vertex of the parabola through samples i-1, i, i+1 (uniform spacing assumed locally)
  auto vertex = [&](std::size_t i, Maximum& m) {
    const double h = 0.5 * (t[i + 1] - t[i - 1]);
    const double den = v[i - 1] - 2.0 * v[i] + v[i + 1];
    if (!(den < 0.0) || std::abs(t[i + 1] - t[i] - (t[i] - t[i - 1])) > 1e-9 * h) return false;
    const double off = 0.5 * (v[i - 1] - v[i + 1]) / den;  // in steps
    m.t = t[i] + off * h;
    m.value = v[i] - 0.25 * (v[i - 1] - v[i + 1]) * off;
    return true;
  };
  if (n >= 3 && v[0] >= v[1]) {
    Maximum m;
    if (vertex(1, m) && m.t <= t[0] + 0.5 * (t[1] - t[0])) out.push_back({t[0], std::max(v[0], m.value), false});
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    Maximum m{t[i], v[i], false};
    vertex(i, m);
    out.push_back(m);
  }
  if (n >= 3 && v[n - 1] > v[n - 2]) {
    Maximum m;
    if (vertex(n - 2, m) && m.t >= t[n - 1] - 0.5 * (t[n - 1] - t[n - 2]))
      out.push_back({t[n - 1], std::max(v[n - 1], m.value), false});
  }
  if (out.size() < 3)
    throw DataError("extract_maxima: found " + std::to_string(out.size()) + " maxima, need at least 3");
  for (int k = 0; k < flag_leading && k < static_cast<int>(out.size()); ++k) out[k].leading = true;
  return out;
}

/// a exp[-(t - b)/(2d)] + c, times in fs.
struct LifetimeFit {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double d_error = 0.0;  // one-sigma estimate from the residual and the curvature
  double residual_norm = 0.0;
  int maxima_used = 0;
  int omitted_leading = 0;
  int iterations = 0;

  double operator()(double t) const { return a * std::exp(-(t - b) / (2.0 * d)) + c; }
};

struct FitError : DataError {
  FitError(const std::string& what, LifetimeFit last) : DataError(what), last_iterate(last) {}
  LifetimeFit last_iterate;
};

/// Levenberg-Marquardt fit of the envelope through the maxima after dropping the first
/// `omit_leading`. d_guess (fs) seeds the lifetime.
inline LifetimeFit fit_lifetime(const std::vector<Maximum>& maxima, int omit_leading = 1, double d_guess = 70.0,
                                int max_iter = 500) {
  if (omit_leading < 0) throw DomainError("fit_lifetime: omit_leading must be non-negative");
  const auto first = static_cast<std::size_t>(omit_leading);
  if (maxima.size() < first + 3)
    throw DataError("fit_lifetime: " + std::to_string(maxima.size() > first ? maxima.size() - first : 0) +
                    " maxima after omission, need at least 3");
  const int n = static_cast<int>(maxima.size() - first);
  Eigen::VectorXd t(n), y(n);
  for (int i = 0; i < n; ++i) {
    t[i] = maxima[first + i].t;
    y[i] = maxima[first + i].value;
  }

  LifetimeFit f;
  f.a = y[0] - y[n - 1];
  f.b = t[0];
  f.c = y[n - 1];
  f.d = d_guess;
  f.maxima_used = n;
  f.omitted_leading = omit_leading;

  using Vec4 = Eigen::Vector4d;
  auto residual = [&](const Vec4& p) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = p[0] * std::exp(-(t[i] - p[1]) / (2.0 * p[3])) + p[2] - y[i];
    return r;
  };
  auto jacobian = [&](const Vec4& p) {
    Eigen::MatrixXd J(n, 4);
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(-(t[i] - p[1]) / (2.0 * p[3]));
      J(i, 0) = e;
      J(i, 1) = p[0] * e / (2.0 * p[3]);
      J(i, 2) = 1.0;
      J(i, 3) = p[0] * e * (t[i] - p[1]) / (2.0 * p[3] * p[3]);
    }
    return J;
  };

  Vec4 p(f.a, f.b, f.c, f.d);
  Eigen::VectorXd r = residual(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < max_iter && !converged; ++it) {
    const Eigen::MatrixXd J = jacobian(p);
    const Eigen::Matrix4d JtJ = J.transpose() * J;
    const Vec4 g = J.transpose() * r;
    // Marquardt scaling by diag(J^T J) keeps the iteration equivariant under rescaling of y
    Vec4 diag = JtJ.diagonal();
    for (int k = 0; k < 4; ++k) diag[k] = std::max(diag[k], 1e-300);
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::Matrix4d A = JtJ;
      A.diagonal() += lambda * diag;
      const Vec4 step = A.ldlt().solve(-g);
      const Vec4 q = p + step;
      if (!(q[3] > 0.0) || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd rq = residual(q);
      const double cq = rq.squaredNorm();
      if (std::isfinite(cq) && cq <= cost) {
        const bool small_step = (step.cwiseAbs().array() <= 1e-13 * (q.cwiseAbs().array() + 1e-300)).all();
        const bool flat = cost - cq <= 1e-15 * cost;
        p = q;
        r = rq;
        cost = cq;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        converged = small_step || flat;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) converged = true;  // no downhill step left at machine precision
  }
  f.a = p[0];
  f.b = p[1];
  f.c = p[2];
  f.d = p[3];
  f.iterations = it;
  f.residual_norm = std::sqrt(cost);
  if (!converged || !std::isfinite(f.residual_norm) || !(f.d > 0.0))
    throw FitError("fit_lifetime: no convergence after " + std::to_string(it) + " iterations (d = " +
                       std::to_string(f.d) + " fs)",
                   f);
  // a and b are degenerate (a e^{b/2d}); the d uncertainty follows from the (a, c, d) problem
  if (n > 3) {
    const Eigen::MatrixXd J = jacobian(p);
    Eigen::MatrixXd K(n, 3);
    K << J.col(0), J.col(2), J.col(3);
    const Eigen::Matrix3d cov = (K.transpose() * K).inverse() * (cost / (n - 3));
    f.d_error = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return f;
}

struct LineMetrics {
  double fwhm = 0.0;       // eV
  double peak = 0.0;       // eV
  double asymmetry = 0.0;  // (area above peak - area below) / total, within +-5 FWHM
};

/// Width, position and asymmetry of a single-peaked line sampled on increasing energies.
inline LineMetrics line_metrics(const std::vector<double>& e, const std::vector<double>& v) {
  if (e.size() != v.size() || e.size() < 3) throw DataError("line_metrics: need matching axes with >= 3 samples");
  const auto imax = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double vmax = v[imax];
  const double vmin = *std::min_element(v.begin(), v.end());
  if (!(vmax > 0.0) || vmax == vmin) throw DataError("line_metrics: flat or empty line");
  const double half = 0.5 * vmax;

  std::size_t l = imax, r = imax;
  while (l > 0 && v[l - 1] >= half) --l;
  while (r + 1 < v.size() && v[r + 1] >= half) ++r;
  if (l == 0 || r + 1 == v.size()) throw DataError("line_metrics: line not resolved within the energy range");
  for (std::size_t i = 0; i < v.size(); ++i)
    if ((i < l || i > r) && v[i] >= half) throw DataError("line_metrics: more than one peak above half maximum");
  auto cross = [&](std::size_t i, std::size_t j) { return e[i] + (half - v[i]) * (e[j] - e[i]) / (v[j] - v[i]); };
  LineMetrics m;
  m.fwhm = cross(r, r + 1) - cross(l - 1, l);

  m.peak = e[imax];
  if (imax > 0 && imax + 1 < v.size()) {
    const double den = v[imax - 1] - 2.0 * v[imax] + v[imax + 1];
    if (den < 0.0) m.peak += 0.5 * (v[imax - 1] - v[imax + 1]) / den * 0.5 * (e[imax + 1] - e[imax - 1]);
  }

  // piecewise-linear areas on either side of the peak, clipped to +-5 FWHM
  const double lo = m.peak - 5.0 * m.fwhm, hi = m.peak + 5.0 * m.fwhm;
  auto value_at = [&](double x) {
    if (x <= e.front()) return v.front();
    if (x >= e.back()) return v.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin());
    return v[k - 1] + (x - e[k - 1]) * (v[k] - v[k - 1]) / (e[k] - e[k - 1]);
  };
  auto area = [&](double a, double b) {
    a = std::max(a, e.front());
    b = std::min(b, e.back());
    if (b <= a) return 0.0;
    std::vector<double> xs{a};
    for (double x : e)
      if (x > a && x < b) xs.push_back(x);
    xs.push_back(b);
    double s = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) s += 0.5 * (xs[i] - xs[i - 1]) * (value_at(xs[i]) + value_at(xs[i - 1]));
    return s;
  };
  const double below = area(lo, m.peak), above = area(m.peak, hi);
  m.asymmetry = (above - below) / (above + below);
  return m;
}

}  // namespace ricd
