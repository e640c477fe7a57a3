#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "vallee/error.hpp"
#include "vallee/quadrature.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

/// S_k(f): harmonics of order <= k.
inline TrigSeries partial_sum(const TrigSeries& f, std::size_t k) {
  TrigSeries out(std::min(k, f.size()));
  out.set_a0(f.a0());
  for (std::size_t j = 1; j <= out.size(); ++j) {
    out.set_a(j, f.a(j));
    out.set_b(j, f.b(j));
  }
  return out;
}

namespace detail {

inline void check_np(std::size_t n, std::size_t p) {
  require(n >= 1, "de la Vallee Poussin sum needs n >= 1");
  require(p >= 1 && p <= n, "de la Vallee Poussin sum needs 1 <= p <= n");
}

}  // namespace detail

/// Multiplier of harmonic k in V_{n,p}: 1 up to n-p, then (n-k)/p, then 0.
inline double vp_multiplier(std::size_t n, std::size_t p, std::size_t k) {
  if (k + p <= n) return 1.0;
  if (k >= n) return 0.0;
  return static_cast<double>(n - k) / static_cast<double>(p);
}

/// tau_{n,p}(k) = 1 - (n-k)/p for n-p+1 <= k <= n-1 and 1 for k >= n.
inline double tau_weight(std::size_t n, std::size_t p, std::size_t k) {
  detail::check_np(n, p);
  detail::require(k + p >= n + 1, "tau_weight is defined only for k >= n-p+1");
  if (k >= n) return 1.0;
  return 1.0 - static_cast<double>(n - k) / static_cast<double>(p);
}

/// V_{n,p}(f) in multiplier form.
inline TrigSeries vp_sum(const TrigSeries& f, std::size_t n, std::size_t p) {
  detail::check_np(n, p);
  TrigSeries out(std::min(n - 1, f.size()));
  out.set_a0(f.a0());
  for (std::size_t k = 1; k <= out.size(); ++k) {
    const double w = vp_multiplier(n, p, k);
    out.set_a(k, w * f.a(k));
    out.set_b(k, w * f.b(k));
  }
  return out;
}

/// V_{n,p}(f) as the literal average (1/p) sum_{k=n-p}^{n-1} S_k(f).
inline TrigSeries vp_sum_by_averaging(const TrigSeries& f, std::size_t n, std::size_t p) {
  detail::check_np(n, p);
  TrigSeries acc;
  for (std::size_t k = n - p; k <= n - 1; ++k) acc += partial_sum(f, k);
  return acc * (1.0 / static_cast<double>(p));
}

/// Fejer sum sigma_{n-1}(f) = (1/n) sum_{k=0}^{n-1} S_k(f).
inline TrigSeries fejer_sum(const TrigSeries& f, std::size_t n) {
  detail::require(n >= 1, "fejer_sum needs n >= 1");
  return vp_sum_by_averaging(f, n, n);
}

/// rho_{n,p}(f) = f - V_{n,p}(f).
inline TrigSeries deviation_rho(const TrigSeries& f, std::size_t n, std::size_t p) {
  return f - vp_sum(f, n, p);
}

/// Sign changes of a series in [0, 2pi), refined by bisection.
inline std::vector<double> sign_changes(const TrigSeries& f, std::size_t per_degree = 16) {
  const std::size_t deg = f.degree();
  std::vector<double> roots;
  if (deg == 0) return roots;
  const std::size_t n = per_degree * (deg + 1);
  const double h = kTwoPi / static_cast<double>(n);
  double t0 = 0.0;
  double f0 = f(t0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t1 = h * static_cast<double>(i);
    const double f1 = f(t1);
    if (f0 == 0.0) {
      roots.push_back(t0);
    } else if (f0 * f1 < 0.0) {
      double lo = t0;
      double hi = t1;
      double flo = f0;
      for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    t0 = t1;
    f0 = f1;
  }
  return roots;
}

struct NormOptions {
  double rel_tol = 1e-10;
  /// Sup-norm grid points per unit of degree (total grid is this times degree+1).
  std::size_t sup_points_per_degree = 4096;
  /// Grid size for sampled functions without a degree hint.
  std::size_t sampled_grid = 1U << 16;
  std::size_t refine_candidates = 8;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Values of f on the uniform grid t_j = 2 pi j / M, via one inverse real FFT.
inline std::vector<double> grid_values(const TrigSeries& f, std::size_t m) {
  const std::size_t deg = f.degree();
  require(m >= 2 * deg + 2, "grid too coarse for series degree");
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> in(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1))), &fftw_free);
  std::unique_ptr<double[], decltype(&fftw_free)> out(
      static_cast<double*>(fftw_malloc(sizeof(double) * m)), &fftw_free);
  if (!in || !out) throw NumericError("fftw_malloc failed");
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), in.get(), out.get(), FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k <= m / 2; ++k) {
    in[k][0] = 0.0;
    in[k][1] = 0.0;
  }
  in[0][0] = 0.5 * f.a0();
  for (std::size_t k = 1; k <= deg; ++k) {
    in[k][0] = 0.5 * f.a(k);
    in[k][1] = -0.5 * f.b(k);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return std::vector<double>(out.get(), out.get() + m);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1U;
  return p;
}

/// Maximizes g on [a, b] by golden-section search.
template <class G>
double golden_max(const G& g, double a, double b, int iters = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  double best = std::max({g(a), g(b), g1, g2});
  for (int i = 0; i < iters && b - a > 1e-15; ++i) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + r * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - r * (b - a);
      g1 = g(x1);
    }
    best = std::max({best, g1, g2});
  }
  return best;
}

/// Refines the largest local maxima of |values| found on a uniform grid.
template <class F>
double refine_grid_max(const F& f, const std::vector<double>& values, std::size_t candidates) {
  const std::size_t m = values.size();
  const double h = kTwoPi / static_cast<double>(m);
  std::vector<std::pair<double, std::size_t>> peaks;
  for (std::size_t j = 0; j < m; ++j) {
    const double v = std::abs(values[j]);
    const double l = std::abs(values[(j + m - 1) % m]);
    const double r = std::abs(values[(j + 1) % m]);
    if (v >= l && v >= r) peaks.emplace_back(v, j);
  }
  std::sort(peaks.begin(), peaks.end(), std::greater<>());
  double best = peaks.empty() ? 0.0 : peaks.front().first;
  const std::size_t count = std::min(candidates, peaks.size());
  for (std::size_t i = 0; i < count; ++i) {
    const double t = h * static_cast<double>(peaks[i].second);
    best = std::max(best, golden_max([&f](double x) { return std::abs(f(x)); }, t - h, t + h));
  }
  return best;
}

}  // namespace detail

/// ||f||_C for a series: FFT grid plus golden-section refinement.
inline double sup_norm(const TrigSeries& f, const NormOptions& opt = {}) {
  const std::size_t deg = f.degree();
  if (deg == 0) return std::abs(0.5 * f.a0());
  const std::size_t want = std::max<std::size_t>(opt.sup_points_per_degree * (deg + 1), 2 * deg + 2);
  const std::size_t m = detail::next_pow2(std::min<std::size_t>(want, std::size_t{1} << 23));
  const auto values = detail::grid_values(f, m);
  return detail::refine_grid_max(f, values, opt.refine_candidates);
}

/// ||f||_C for a sampled function: dense grid, breakpoints, refinement.
inline double sup_norm(const SampledFunction& f, const NormOptions& opt = {}) {
  std::size_t m = opt.sampled_grid;
  if (f.degree_hint() > 0) {
    m = std::max(m, std::min<std::size_t>(64 * (f.degree_hint() + 1), std::size_t{1} << 22));
  }
  std::vector<double> values(m);
  const double h = kTwoPi / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) values[j] = f(h * static_cast<double>(j));
  double best = detail::refine_grid_max(f, values, opt.refine_candidates);
  for (double b : f.breakpoints()) best = std::max(best, std::abs(f(b)));
  return best;
}

namespace detail {

template <class F>
double lebesgue_norm(const F& f, double s, std::vector<double> breakpoints, double rel_tol) {
  QuadratureOptions qo;
  qo.rel_tol = rel_tol;
  qo.initial_panels = std::max<std::size_t>(16, 2 * breakpoints.size() + 16);
  if (s == 1.0) {
    return integrate_period([&f](double t) { return std::abs(f(t)); }, std::move(breakpoints), qo)
        .value;
  }
  if (s == 2.0) {
    return std::sqrt(
        integrate_period([&f](double t) { const double v = f(t); return v * v; },
                         std::move(breakpoints), qo)
            .value);
  }
  const auto r = integrate_period([&f, s](double t) { return std::pow(std::abs(f(t)), s); },
                                  std::move(breakpoints), qo);
  return std::pow(r.value, 1.0 / s);
}

}  // namespace detail

/// ||f||_2 from Parseval: sqrt(pi (a0^2/2 + sum a_k^2 + b_k^2)).
inline double norm_L2_parseval(const TrigSeries& f) {
  double sum = 0.5 * f.a0() * f.a0();
  for (std::size_t k = 1; k <= f.degree(); ++k) sum += f.a(k) * f.a(k) + f.b(k) * f.b(k);
  return std::sqrt(kPi * sum);
}

/// Unnormalized L_s norm (int_0^{2pi} |f|^s)^{1/s}; s = kInf gives the sup norm.
inline double norm_Ls(const TrigSeries& f, double s, const NormOptions& opt = {}) {
  detail::require(s >= 1.0, "norm_Ls needs s >= 1");
  if (std::isinf(s)) return sup_norm(f, opt);
  if (f.degree() == 0) return std::abs(0.5 * f.a0()) * std::pow(kTwoPi, 1.0 / s);
  if (s == 2.0) return norm_L2_parseval(f);
  // panels resolve each oscillation and never straddle a zero of f
  std::vector<double> bps = sign_changes(f);
  const std::size_t deg = f.degree();
  for (std::size_t i = 0; i < 2 * deg; ++i) {
    bps.push_back(kTwoPi * static_cast<double>(i) / static_cast<double>(2 * deg));
  }
  return detail::lebesgue_norm(f, s, std::move(bps), opt.rel_tol);
}

inline double norm_Ls(const SampledFunction& f, double s, const NormOptions& opt = {}) {
  detail::require(s >= 1.0, "norm_Ls needs s >= 1");
  if (std::isinf(s)) return sup_norm(f, opt);
  std::vector<double> bps = f.breakpoints();
  const std::size_t deg = f.degree_hint();
  for (std::size_t i = 0; i < 2 * deg; ++i) {
    bps.push_back(kTwoPi * static_cast<double>(i) / static_cast<double>(2 * deg));
  }
  return detail::lebesgue_norm(f, s, std::move(bps), opt.rel_tol);
}

/// Fourier projection of a sampled function onto harmonics 0..degree.
///
/// Coefficients are computed by composite Gauss-Legendre quadrature whose
/// panels are aligned to the function's breakpoints and geometrically graded
/// towards them. `l1_norm` is (1/pi) int |phi|, an upper bound on the
/// amplitude sqrt(a_k^2 + b_k^2) of every discarded harmonic.
struct Projection {
  TrigSeries series;
  double l1_norm = 0.0;
};

inline Projection fourier_project(const SampledFunction& phi, std::size_t degree) {
  const NodeSet ns = panel_nodes(phi.breakpoints(), kPi / static_cast<double>(degree + 1),
                                 !phi.breakpoints().empty());
  const auto& nodes = ns.x;
  const auto& weights = ns.w;

  std::vector<double> ca(degree + 1, 0.0);
  std::vector<double> cb(degree + 1, 0.0);
  double l1 = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = nodes[i];
    const double fw = phi(t) * weights[i];
    l1 += std::abs(fw);
    const std::complex<double> step(std::cos(t), std::sin(t));
    std::complex<double> z(1.0, 0.0);
    ca[0] += fw;
    for (std::size_t k = 1; k <= degree; ++k) {
      if ((k & 31U) == 0) {
        z = std::polar(1.0, static_cast<double>(k) * t);
      } else {
        z *= step;
      }
      ca[k] += fw * z.real();
      cb[k] += fw * z.imag();
    }
  }
  TrigSeries out(degree);
  out.set_a0(ca[0] / kPi);
  for (std::size_t k = 1; k <= degree; ++k) {
    out.set_a(k, ca[k] / kPi);
    out.set_b(k, cb[k] / kPi);
  }
  return {out, l1 / kPi};
}

}  // namespace vallee
