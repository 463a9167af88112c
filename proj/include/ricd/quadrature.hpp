#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace ricd::quad {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    // Newton iteration on P_N from the Chebyshev-like initial guess.
    const std::size_t m = (N + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 1; j <= N; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
        }
        pp = static_cast<double>(N) * (z * p1 - p2) / (z * z - 1.0);
        const double dz = p1 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[N - 1 - i] = z;
      w[i] = w[N - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
  }
};

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule;
  return rule;
}

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

/// N-point Gauss-Legendre on one panel [a, b].
template <std::size_t N = 16, class F>
auto panel(const F& f, double a, double b) {
  const auto& r = gauss_legendre<N>();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  decltype(f(c)) sum{};
  for (std::size_t i = 0; i < N; ++i) sum += r.w[i] * f(c + h * r.x[i]);
  return sum * h;
}

/// Composite rule: n_panels equal panels of N nodes each.
template <std::size_t N = 16, class F>
auto composite(const F& f, double a, double b, std::size_t n_panels) {
  decltype(f(a)) sum{};
  const double h = (b - a) / static_cast<double>(n_panels);
  for (std::size_t k = 0; k < n_panels; ++k) sum += panel<N>(f, a + k * h, a + (k + 1) * h);
  return sum;
}

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  bool converged = true;
};

namespace detail {

template <std::size_t N, class F, class T>
void bisect(const F& f, double a, double b, const T& whole, double tol, int depth, Estimate<T>& acc) {
  const double m = 0.5 * (a + b);
  const T left = panel<N>(f, a, m), right = panel<N>(f, m, b);
  const T halves = left + right;
  const double diff = magnitude(halves - whole);
  if (diff <= tol || depth <= 0) {
    acc.value += halves;
    acc.error += diff;
    if (diff > tol) acc.converged = false;
    return;
  }
  bisect<N>(f, a, m, left, 0.5 * tol, depth - 1, acc);
  bisect<N>(f, m, b, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive composite Gauss-Legendre. The interval is first cut into panels no wider than
/// max_panel; each panel is bisected until the two-halves estimate agrees with the whole-panel
/// estimate to within its share of tol_abs + tol_rel * |coarse total|.
template <std::size_t N = 16, class F>
auto adaptive(const F& f, double a, double b, double max_panel, double tol_rel, double tol_abs = 0.0,
              int max_depth = 30) {
  using T = decltype(f(a));
  Estimate<T> out;
  if (b <= a) return out;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
  const std::size_t panels = n == 0 ? 1 : n;
  const double h = (b - a) / static_cast<double>(panels);
  std::vector<T> coarse(panels);
  double scale = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    coarse[k] = panel<N>(f, a + k * h, a + (k + 1) * h);
    scale += magnitude(coarse[k]);
  }
  const double tol = tol_abs + tol_rel * scale;
  for (std::size_t k = 0; k < panels; ++k)
    detail::bisect<N>(f, a + k * h, a + (k + 1) * h, coarse[k], tol / static_cast<double>(panels),
                      max_depth, out);
  return out;
}

/// Composite Gauss-Legendre with the panel count doubled until two successive estimates
/// differ by less than tol (absolute).
template <std::size_t N = 16, class F>
auto doubling(const F& f, double a, double b, std::size_t start_panels, double tol,
              std::size_t max_panels = std::size_t{1} << 22) {
  using T = decltype(f(a));
  Estimate<T> out;
  std::size_t panels = start_panels == 0 ? 1 : start_panels;
  T prev = composite<N>(f, a, b, panels);
  while (true) {
    panels *= 2;
    const T next = composite<N>(f, a, b, panels);
    out.value = next;
    out.error = magnitude(next - prev);
    if (out.error < tol) return out;
    if (panels >= max_panels) {
      out.converged = false;
      return out;
    }
    prev = next;
  }
}

}  // namespace ricd::quad
