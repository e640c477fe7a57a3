#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vallee/error.hpp"
#include "vallee/fourier.hpp"
#include "vallee/lp.hpp"
#include "vallee/psi.hpp"
#include "vallee/quadrature.hpp"
#include "vallee/special.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

enum class Solver { parseval, remez, lp_grid, convex_ls };

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::parseval: return "parseval";
    case Solver::remez: return "remez";
    case Solver::lp_grid: return "lp_grid";
    case Solver::convex_ls: return "convex_ls";
  }
  return "?";
}

/// E_m(f) in some L_s norm. The true value lies in [lower, upper];
/// certified_gap = upper - lower.
struct BestApproxResult {
  double value = 0.0;
  TrigSeries optimal_poly;
  Solver solver = Solver::parseval;
  double certified_gap = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

inline std::size_t basis_dim(std::size_t m) { return 2 * m - 1; }

/// 1, cos t, sin t, ..., cos (m-1)t, sin (m-1)t
inline void basis_eval(std::size_t m, double t, double* out) {
  out[0] = 1.0;
  for (std::size_t k = 1; k < m; ++k) {
    const double kt = static_cast<double>(k) * t;
    out[2 * k - 1] = std::cos(kt);
    out[2 * k] = std::sin(kt);
  }
}

inline TrigSeries poly_from_coeffs(const Eigen::VectorXd& c, std::size_t m) {
  TrigSeries p(m - 1);
  p.set_a0(2.0 * c(0));
  for (std::size_t k = 1; k < m; ++k) {
    p.set_a(k, c(static_cast<Eigen::Index>(2 * k - 1)));
    p.set_b(k, c(static_cast<Eigen::Index>(2 * k)));
  }
  return p;
}

inline Eigen::VectorXd coeffs_from_poly(const TrigSeries& p, std::size_t m) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dim(m)));
  c(0) = 0.5 * p.a0();
  for (std::size_t k = 1; k < m; ++k) {
    c(static_cast<Eigen::Index>(2 * k - 1)) = p.a(k);
    c(static_cast<Eigen::Index>(2 * k)) = p.b(k);
  }
  return c;
}

/// L2 norms squared of the basis functions over one period.
inline double basis_norm2(std::size_t j) { return j == 0 ? kTwoPi : kPi; }

inline SampledFunction residual(const SampledFunction& f, const TrigSeries& p) {
  std::vector<double> bps = f.breakpoints();
  return SampledFunction([f, p](double t) { return f(t) - p(t); }, f.hint(), std::move(bps),
                         std::max(f.degree_hint(), p.degree()));
}

/// Sign changes of a sampled function on a uniform grid, refined by bisection.
inline std::vector<double> sampled_sign_changes(const SampledFunction& f, std::size_t points) {
  std::vector<double> roots;
  const double h = kTwoPi / static_cast<double>(points);
  double t0 = 0.0;
  double f0 = f(0.0);
  for (std::size_t i = 1; i <= points; ++i) {
    const double t1 = h * static_cast<double>(i);
    const double f1 = f(t1);
    if (f1 == 0.0 && f0 != 0.0 && i < points) {
      roots.push_back(t1);
    } else if (f0 * f1 < 0.0) {
      double lo = t0;
      double hi = t1;
      double flo = f0;
      for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
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

inline std::size_t scan_points(const SampledFunction& f, std::size_t m) {
  return std::max<std::size_t>(4096, 64 * (f.degree_hint() + m + 1));
}

/// argmax of g on [a, b] by golden section; returns (t, g(t)).
template <class G>
std::pair<double, double> golden_argmax(const G& g, double a, double b, int iters = 60) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int i = 0; i < iters && b - a > 1e-14; ++i) {
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
  }
  return g1 > g2 ? std::pair{x1, g1} : std::pair{x2, g2};
}

struct Extremum {
  double t;
  double e;
};

/// Alternating extrema of e on the circle from its grid values, one per sign run,
/// refined by golden section. An even count is returned when non-empty.
template <class E>
std::vector<Extremum> alternating_extrema(const E& err, const std::vector<double>& grid_e) {
  const std::size_t n = grid_e.size();
  const double h = kTwoPi / static_cast<double>(n);
  std::vector<Extremum> runs;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = grid_e[j];
    if (v == 0.0) continue;
    const double l = grid_e[(j + n - 1) % n];
    const double r = grid_e[(j + 1) % n];
    const bool peak = v > 0 ? (v >= l && v >= r) : (v <= l && v <= r);
    if (!peak) continue;
    const Extremum x{h * static_cast<double>(j), v};
    if (!runs.empty() && (runs.back().e > 0) == (v > 0)) {
      if (std::abs(v) > std::abs(runs.back().e)) runs.back() = x;
    } else {
      runs.push_back(x);
    }
  }
  if (runs.size() >= 2 && (runs.front().e > 0) == (runs.back().e > 0)) {
    if (std::abs(runs.back().e) > std::abs(runs.front().e)) runs.front() = runs.back();
    runs.pop_back();
  }
  for (auto& x : runs) {
    const double sgn = x.e > 0 ? 1.0 : -1.0;
    const auto [t, v] = golden_argmax([&](double s) { return sgn * err(s); }, x.t - h, x.t + h);
    if (v > std::abs(x.e)) {
      x.t = t;
      x.e = sgn * v;
    }
  }
  std::sort(runs.begin(), runs.end(), [](const Extremum& a, const Extremum& b) {
    return reduce_angle(a.t) < reduce_angle(b.t);
  });
  return runs;
}

/// Drops adjacent pairs (never the global maximum) until `want` points remain.
inline std::vector<Extremum> reduce_reference(std::vector<Extremum> pts, std::size_t want) {
  while (pts.size() > want) {
    const std::size_t n = pts.size();
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(pts[i].e) > std::abs(pts[top].e)) top = i;
    }
    std::size_t drop = n;
    double smallest = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      if (i == top || j == top) continue;
      const double w = std::abs(pts[i].e) + std::abs(pts[j].e);
      if (w < smallest) {
        smallest = w;
        drop = i;
      }
    }
    const std::size_t j = (drop + 1) % n;
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(std::max(drop, j)));
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(std::min(drop, j)));
  }
  return pts;
}

inline std::vector<double> grid_eval(const SampledFunction& f, std::size_t n) {
  std::vector<double> v(n);
  const double h = kTwoPi / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f(h * static_cast<double>(j));
  return v;
}

inline std::vector<double> grid_eval(const TrigSeries& p, std::size_t n) {
  if (p.degree() == 0) return std::vector<double>(n, 0.5 * p.a0());
  return grid_values(p, n);
}

}  // namespace detail

/// Discrete Chebyshev approximation on a uniform grid, solved as a linear program.
/// lower is the grid optimum, upper the continuous sup of the residual.
inline BestApproxResult best_linf_lp(const SampledFunction& f, std::size_t m,
                                     std::size_t grid_size = 0) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  const std::size_t n = grid_size ? grid_size : 64 * m;
  const std::size_t d = detail::basis_dim(m);
  const auto fv = detail::grid_eval(f, n);
  lp::Problem pr;
  pr.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(2 * n));
  pr.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
  pr.b(static_cast<Eigen::Index>(d)) = 1.0;
  pr.c.resize(static_cast<Eigen::Index>(2 * n));
  pr.upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(2 * n), kInf);
  std::vector<double> bv(d);
  const double h = kTwoPi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::basis_eval(m, h * static_cast<double>(i), bv.data());
    const auto ip = static_cast<Eigen::Index>(i);
    const auto im = static_cast<Eigen::Index>(n + i);
    for (std::size_t j = 0; j < d; ++j) {
      pr.A(static_cast<Eigen::Index>(j), ip) = bv[j];
      pr.A(static_cast<Eigen::Index>(j), im) = -bv[j];
    }
    pr.A(static_cast<Eigen::Index>(d), ip) = 1.0;
    pr.A(static_cast<Eigen::Index>(d), im) = 1.0;
    pr.c(ip) = fv[i];
    pr.c(im) = -fv[i];
  }
  const auto sol = lp::solve(pr);
  const TrigSeries poly = detail::poly_from_coeffs(sol.duals.head(static_cast<Eigen::Index>(d)), m);
  BestApproxResult out;
  out.solver = Solver::lp_grid;
  out.optimal_poly = poly;
  out.lower = std::max(0.0, sol.objective);
  out.upper = std::max(out.lower, sup_norm(detail::residual(f, poly)));
  out.value = out.lower;
  out.certified_gap = out.upper - out.lower;
  out.iterations = sol.iterations;
  return out;
}

/// Best uniform approximation by trigonometric polynomials of order <= m-1.
///
/// Remez exchange on 2m reference points with multi-point exchange; the
/// levelled error is a lower bound (de la Vallee Poussin) and the sup of the
/// residual an upper bound. Falls back to the grid LP when the exchange stalls.
inline BestApproxResult best_linf(const SampledFunction& f, std::size_t m, double tol = 1e-10) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  const std::size_t d = detail::basis_dim(m);
  const std::size_t grid = detail::next_pow2(std::max<std::size_t>(1U << 14, detail::scan_points(f, m)));
  const auto fv = detail::grid_eval(f, grid);

  std::vector<double> ref;
  {
    std::vector<detail::Extremum> init =
        detail::alternating_extrema([&f](double t) { return f(t); }, fv);
    if (init.size() >= 2 * m) {
      for (const auto& x : detail::reduce_reference(init, 2 * m)) ref.push_back(x.t);
    } else {
      for (std::size_t i = 0; i < 2 * m; ++i) ref.push_back(kPi * static_cast<double>(i) / static_cast<double>(m));
    }
  }
  const double fscale = std::max(1e-300, *std::max_element(fv.begin(), fv.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));

  BestApproxResult best;
  best.solver = Solver::remez;
  best.upper = kInf;
  double best_h = 0.0;
  std::size_t stalls = 0;
  Eigen::MatrixXd M(static_cast<Eigen::Index>(2 * m), static_cast<Eigen::Index>(2 * m));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(2 * m));
  std::vector<double> bv(d);
  for (std::size_t it = 1; it <= 60; ++it) {
    std::sort(ref.begin(), ref.end(), [](double a, double b) { return reduce_angle(a) < reduce_angle(b); });
    for (std::size_t i = 0; i < 2 * m; ++i) {
      detail::basis_eval(m, ref[i], bv.data());
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < d; ++j) M(ii, static_cast<Eigen::Index>(j)) = bv[j];
      M(ii, static_cast<Eigen::Index>(d)) = (i % 2 == 0) ? 1.0 : -1.0;
      rhs(ii) = f(ref[i]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) break;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const double h = std::abs(sol(static_cast<Eigen::Index>(d)));
    const TrigSeries poly = detail::poly_from_coeffs(sol.head(static_cast<Eigen::Index>(d)), m);
    const auto pv = detail::grid_eval(poly, grid);
    std::vector<double> ev(grid);
    for (std::size_t j = 0; j < grid; ++j) ev[j] = fv[j] - pv[j];
    auto err = [&f, &poly](double t) { return f(t) - poly(t); };
    const auto ext = detail::alternating_extrema(err, ev);
    double emax = 0.0;
    for (double v : ev) emax = std::max(emax, std::abs(v));
    for (const auto& x : ext) emax = std::max(emax, std::abs(x.e));

    best.lower = std::max(best.lower, h);
    if (emax < best.upper) {
      best.upper = emax;
      best.optimal_poly = poly;
    }
    best.iterations = it;
    if (best.upper - best.lower <= tol * std::max(best.upper, 1e-300) + 1e-15 * fscale) {
      best.value = best.lower;
      best.certified_gap = std::max(0.0, best.upper - best.lower);
      return best;
    }
    if (ext.size() < 2 * m) break;
    if (h <= best_h * (1.0 + 1e-12)) {
      if (++stalls >= 6) break;
    } else {
      stalls = 0;
      best_h = h;
    }
    ref.clear();
    for (const auto& x : detail::reduce_reference(ext, 2 * m)) ref.push_back(x.t);
  }
  auto lp = best_linf_lp(f, m, std::max<std::size_t>(64 * m, 2 * detail::scan_points(f, m) / 64));
  // keep whichever bracket is tighter; both are valid
  if (best.upper < kInf) {
    lp.lower = std::max(lp.lower, best.lower);
    if (best.upper < lp.upper) {
      lp.upper = best.upper;
      lp.optimal_poly = best.optimal_poly;
    }
    lp.value = lp.lower;
    lp.certified_gap = lp.upper - lp.lower;
  }
  return lp;
}

inline BestApproxResult best_linf(const TrigSeries& f, std::size_t m, double tol = 1e-10) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  if (f.degree() < m) {
    BestApproxResult r;
    r.solver = Solver::remez;
    r.optimal_poly = f;
    return r;
  }
  return best_linf(SampledFunction::from_series(f), m, tol);
}

/// Best L2 approximation: the partial sum S_{m-1}, value from Parseval.
inline BestApproxResult best_l2(const TrigSeries& f, std::size_t m) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  double tail = 0.0;
  for (std::size_t k = m; k <= f.degree(); ++k) tail += f.a(k) * f.a(k) + f.b(k) * f.b(k);
  BestApproxResult r;
  r.solver = Solver::parseval;
  r.optimal_poly = partial_sum(f, m - 1);
  r.value = r.lower = r.upper = std::sqrt(kPi * tail);
  return r;
}

namespace detail {

/// Quadrature nodes for integrals of |f - t|^s-type integrands: panels cut at
/// the zeros of the residual and at the breakpoints of f.
inline NodeSet residual_nodes(const SampledFunction& r, std::size_t m) {
  std::vector<double> cuts = r.breakpoints();
  const auto z = sampled_sign_changes(r, scan_points(r, m));
  cuts.insert(cuts.end(), z.begin(), z.end());
  const double width = kPi / static_cast<double>(2 * (r.degree_hint() + m + 1));
  return panel_nodes(cuts, width, true);
}

/// Lower bound int r g / ||g||_{s'} with g = w - P_{m-1} w, P the L2 projection.
/// Any g orthogonal to T_{2m-1} certifies E_m(f)_s >= int f g / ||g||_{s'}.
inline double dual_lower_bound(const NodeSet& ns, const std::vector<double>& r,
                               const std::vector<double>& w, std::size_t m, double s) {
  const std::size_t d = basis_dim(m);
  std::vector<double> proj(d, 0.0);
  std::vector<double> bv(d);
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    basis_eval(m, ns.x[i], bv.data());
    for (std::size_t j = 0; j < d; ++j) proj[j] += ns.w[i] * w[i] * bv[j];
  }
  for (std::size_t j = 0; j < d; ++j) proj[j] /= basis_norm2(j);
  const double sd = dual_exponent(s);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    basis_eval(m, ns.x[i], bv.data());
    double g = w[i];
    for (std::size_t j = 0; j < d; ++j) g -= proj[j] * bv[j];
    num += ns.w[i] * r[i] * g;
    den = std::isinf(sd) ? std::max(den, std::abs(g)) : den + ns.w[i] * std::pow(std::abs(g), sd);
  }
  if (!std::isinf(sd)) den = std::pow(den, 1.0 / sd);
  return den > 0.0 ? std::max(0.0, num / den) : 0.0;
}

/// Newton polish of a trial L1 approximant on the continuous functional
/// J(c) = int |f - sum c_j e_j|. With simple zeros z of the residual r the
/// Hessian is 2 sum_z e(z) e(z)^T / |r'(z)|. Returns the start unchanged if no
/// step helps.
inline TrigSeries l1_polish(const SampledFunction& f, const TrigSeries& start, std::size_t m,
                            std::size_t& iterations) {
  const std::size_t d = basis_dim(m);
  const auto di = static_cast<Eigen::Index>(d);
  auto l1 = [&](const TrigSeries& p) {
    const SampledFunction r = residual(f, p);
    const NodeSet ns = residual_nodes(r, m);
    double J = 0.0;
    for (std::size_t i = 0; i < ns.x.size(); ++i) J += ns.w[i] * std::abs(r(ns.x[i]));
    return J;
  };
  Eigen::VectorXd c = coeffs_from_poly(start, m);
  double J = l1(start);
  std::vector<double> bv(d);
  for (iterations = 0; iterations < 40; ++iterations) {
    const TrigSeries poly = poly_from_coeffs(c, m);
    const SampledFunction r = residual(f, poly);
    const NodeSet ns = residual_nodes(r, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(di);
    for (std::size_t i = 0; i < ns.x.size(); ++i) {
      const double v = r(ns.x[i]);
      if (v == 0.0) continue;
      basis_eval(m, ns.x[i], bv.data());
      for (std::size_t j = 0; j < d; ++j) g(static_cast<Eigen::Index>(j)) -= ns.w[i] * (v > 0 ? bv[j] : -bv[j]);
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(di, di);
    const double h = 1e-6;
    for (double z : sampled_sign_changes(r, scan_points(r, m))) {
      const double slope = std::abs(r(z + h) - r(z - h)) / (2 * h);
      if (!(slope > 1e-12)) return poly;
      basis_eval(m, z, bv.data());
      const Eigen::Map<const Eigen::VectorXd> e(bv.data(), di);
      H.noalias() += (2.0 / slope) * e * e.transpose();
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff())) return poly;
    const Eigen::VectorXd step = ldlt.solve(-g);
    if (!step.allFinite()) return poly;
    bool moved = false;
    const double J_old = J;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      const Eigen::VectorXd trial = c + alpha * step;
      const double Jt = l1(poly_from_coeffs(trial, m));
      if (Jt < J) {
        c = trial;
        J = Jt;
        moved = true;
        break;
      }
    }
    // quadrature noise in J sits near 1e-15 J; past that the steps only chase rounding
    if (!moved || J_old - J <= 1e-14 * J ||
        step.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + c.lpNorm<Eigen::Infinity>())) {
      break;
    }
  }
  return poly_from_coeffs(c, m);
}

}  // namespace detail

/// Best L1 approximation: weighted discrete LP on a uniform grid, then Newton on
/// the continuous functional. upper is the L1 norm of the final residual; lower
/// comes from the dual certificate sign(r) - P_{m-1} sign(r), which is tight at
/// the optimum. If the polish cannot close the gap (zeros of the residual that
/// are not simple) a second start from a finer grid is tried.
inline BestApproxResult best_l1(const SampledFunction& f, std::size_t m, std::size_t grid_size = 0) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  const std::size_t base = grid_size ? grid_size : 64 * m;
  const std::size_t d = detail::basis_dim(m);
  auto solve_grid = [&](std::size_t n) {
    const double h = kTwoPi / static_cast<double>(n);
    const auto fv = detail::grid_eval(f, n);
    lp::Problem pr;
    pr.A.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    pr.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    pr.c.resize(static_cast<Eigen::Index>(n));
    pr.upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 2.0 * h);
    std::vector<double> bv(d);
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      detail::basis_eval(m, h * static_cast<double>(i), bv.data());
      for (std::size_t j = 0; j < d; ++j) {
        pr.A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = bv[j];
        pr.b(static_cast<Eigen::Index>(j)) += h * bv[j];
      }
      pr.c(static_cast<Eigen::Index>(i)) = fv[i];
      shift += h * fv[i];
    }
    const auto sol = lp::solve(pr);
    return std::pair{sol.objective - shift, detail::poly_from_coeffs(sol.duals, m)};
  };
  struct Bracket {
    TrigSeries poly;
    double upper = 0.0;
    double lower = 0.0;
    std::size_t iterations = 0;
  };
  auto certify = [&](const TrigSeries& start) {
    Bracket b;
    b.poly = detail::l1_polish(f, start, m, b.iterations);
    const SampledFunction r = detail::residual(f, b.poly);
    const NodeSet ns = detail::residual_nodes(r, m);
    std::vector<double> rv(ns.x.size());
    std::vector<double> w(ns.x.size());
    for (std::size_t i = 0; i < ns.x.size(); ++i) {
      rv[i] = r(ns.x[i]);
      w[i] = rv[i] > 0 ? 1.0 : (rv[i] < 0 ? -1.0 : 0.0);
      b.upper += ns.w[i] * std::abs(rv[i]);
    }
    b.lower = std::min(b.upper, detail::dual_lower_bound(ns, rv, w, m, 1.0));
    return b;
  };
  Bracket best = certify(solve_grid(base).second);
  if (best.upper - best.lower > 1e-9 * best.upper) {
    // a second start from a finer grid; both brackets are valid, so combine them
    const Bracket other = certify(solve_grid(2 * base).second);
    const double lower = std::max(best.lower, other.lower);
    if (other.upper < best.upper) best = other;
    best.lower = std::min(best.upper, lower);
  }
  BestApproxResult out;
  out.solver = Solver::lp_grid;
  out.optimal_poly = best.poly;
  out.iterations = best.iterations;
  out.upper = best.upper;
  out.value = best.upper;
  out.lower = best.lower;
  out.certified_gap = best.upper - best.lower;
  return out;
}

inline BestApproxResult best_l1(const TrigSeries& f, std::size_t m, std::size_t grid_size = 0) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  if (f.degree() < m) {
    BestApproxResult r;
    r.solver = Solver::lp_grid;
    r.optimal_poly = f;
    return r;
  }
  return best_l1(SampledFunction::from_series(f), m, grid_size);
}

/// Best L_s approximation, 1 < s < inf, by damped Newton on int |f - t|^s.
/// tol is relative accuracy of the value.
///
/// The Hessian is assembled by quadrature with panels cut at the residual's
/// zeros; for s < 2 its weight |r|^{s-2} is singular there but integrable, and
/// an Armijo line search keeps every step a descent step.
inline BestApproxResult best_ls(const SampledFunction& f, std::size_t m, double s, double tol = 1e-10) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  detail::require(s > 1.0 && std::isfinite(s), "best_ls needs 1 < s < inf");
  const std::size_t d = detail::basis_dim(m);
  const auto di = static_cast<Eigen::Index>(d);
  // start from the L2 projection
  Eigen::VectorXd c = Eigen::VectorXd::Zero(di);
  {
    const NodeSet ns = panel_nodes(f.breakpoints(), kPi / static_cast<double>(2 * (f.degree_hint() + m + 1)),
                                   !f.breakpoints().empty());
    std::vector<double> bv(d);
    for (std::size_t i = 0; i < ns.x.size(); ++i) {
      detail::basis_eval(m, ns.x[i], bv.data());
      const double fv = f(ns.x[i]);
      for (std::size_t j = 0; j < d; ++j) c(static_cast<Eigen::Index>(j)) += ns.w[i] * fv * bv[j];
    }
    for (std::size_t j = 0; j < d; ++j) c(static_cast<Eigen::Index>(j)) /= detail::basis_norm2(j);
  }

  auto objective = [&](const NodeSet& ns, const Eigen::MatrixXd& B, const Eigen::VectorXd& fv,
                       const Eigen::VectorXd& cc) {
    const Eigen::VectorXd r = fv - B * cc;
    double F = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) F += ns.w[static_cast<std::size_t>(i)] * std::pow(std::abs(r(i)), s);
    return F;
  };

  std::size_t it = 0;
  bool converged = false;
  double last_decrement = kInf;
  for (; it < 200; ++it) {
    const TrigSeries poly = detail::poly_from_coeffs(c, m);
    const NodeSet ns = detail::residual_nodes(detail::residual(f, poly), m);
    const auto nn = static_cast<Eigen::Index>(ns.x.size());
    Eigen::MatrixXd B(nn, di);
    Eigen::VectorXd fv(nn);
    std::vector<double> bv(d);
    for (Eigen::Index i = 0; i < nn; ++i) {
      detail::basis_eval(m, ns.x[static_cast<std::size_t>(i)], bv.data());
      for (std::size_t j = 0; j < d; ++j) B(i, static_cast<Eigen::Index>(j)) = bv[j];
      fv(i) = f(ns.x[static_cast<std::size_t>(i)]);
    }
    const Eigen::VectorXd r = fv - B * c;
    Eigen::VectorXd gw(nn);
    Eigen::VectorXd hw(nn);
    double F = 0.0;
    for (Eigen::Index i = 0; i < nn; ++i) {
      const double w = ns.w[static_cast<std::size_t>(i)];
      const double a = std::abs(r(i));
      F += w * std::pow(a, s);
      gw(i) = w * std::pow(a, s - 1.0) * (r(i) > 0 ? 1.0 : (r(i) < 0 ? -1.0 : 0.0));
      hw(i) = w * std::pow(std::max(a, 1e-300), s - 2.0);
    }
    if (F == 0.0) {
      converged = true;
      break;
    }
    const Eigen::VectorXd g = -s * (B.transpose() * gw);
    Eigen::MatrixXd H = s * (s - 1.0) * (B.transpose() * hw.asDiagonal() * B);
    H.diagonal().array() += 1e-14 * H.diagonal().maxCoeff();
    const Eigen::VectorXd step = H.ldlt().solve(-g);
    const double decrement = -g.dot(step);
    last_decrement = decrement;
    // decrement ~ 2 (F - F*), so this pins the value to about 1e-3 tol / s relative;
    // asking for tol^2 would sit below the rounding noise of the quadrature sum
    const double stop = 1e-3 * tol * F;
    if (!(decrement > stop)) {
      converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = c + alpha * step;
      if (objective(ns, B, fv, trial) <= F - 1e-4 * alpha * decrement) {
        c = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = decrement <= stop;
      break;
    }
  }
  if (!converged) {
    throw NumericError("best_ls did not converge in " + std::to_string(it) +
                           " iterations; Newton decrement " + std::to_string(last_decrement),
                       last_decrement);
  }
  const TrigSeries poly = detail::poly_from_coeffs(c, m);
  const SampledFunction r = detail::residual(f, poly);
  const NodeSet ns = detail::residual_nodes(r, m);
  std::vector<double> rv(ns.x.size());
  std::vector<double> w(ns.x.size());
  double integral = 0.0;
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    rv[i] = r(ns.x[i]);
    const double a = std::abs(rv[i]);
    w[i] = std::pow(a, s - 1.0) * (rv[i] > 0 ? 1.0 : (rv[i] < 0 ? -1.0 : 0.0));
    integral += ns.w[i] * std::pow(a, s);
  }
  BestApproxResult out;
  out.solver = Solver::convex_ls;
  out.optimal_poly = poly;
  out.iterations = it;
  out.upper = std::pow(integral, 1.0 / s);
  out.lower = std::min(out.upper, detail::dual_lower_bound(ns, rv, w, m, s));
  out.value = out.upper;
  out.certified_gap = out.upper - out.lower;
  return out;
}

inline BestApproxResult best_ls(const TrigSeries& f, std::size_t m, double s, double tol = 1e-10) {
  detail::require(m >= 1, "best approximation needs m >= 1");
  if (f.degree() < m) {
    BestApproxResult r;
    r.solver = Solver::convex_ls;
    r.optimal_poly = f;
    return r;
  }
  return best_ls(SampledFunction::from_series(f), m, s, tol);
}

/// Dispatch on s: Parseval at 2, Remez at inf, LP at 1, Newton otherwise.
inline BestApproxResult best_approx(const TrigSeries& f, std::size_t m, double s) {
  if (s == 2.0) return best_l2(f, m);
  if (std::isinf(s)) return best_linf(f, m);
  if (s == 1.0) return best_l1(f, m);
  return best_ls(f, m, s);
}

inline BestApproxResult best_approx(const SampledFunction& f, std::size_t m, double s) {
  if (std::isinf(s)) return best_linf(f, m);
  if (s == 1.0) return best_l1(f, m);
  return best_ls(f, m, s);
}

/// Phi(t) = ||cos||_{s'}^{1-s'} |cos(mt + beta pi/2)|^{s'-1} sign cos(mt + beta pi/2) E,
/// s' = s/(s-1); ||Phi||_s = E and the zero polynomial is its best approximation.
inline SampledFunction extremal_phi(std::size_t m, double beta, double s, double E) {
  detail::require(m >= 1, "extremal_phi needs m >= 1");
  detail::require(E > 0.0, "extremal_phi needs E > 0");
  if (s == 1.0) throw Unsupported("extremal_phi is not constructed for s = 1");
  detail::require(s > 1.0, "extremal_phi needs s > 1");
  const double sd = dual_exponent(s);
  const double mm = static_cast<double>(m);
  const double shift = beta * kPi / 2.0;
  const double scale = E * std::pow(cos_norm(sd), 1.0 - sd);
  std::vector<double> zeros;
  for (std::size_t k = 0; k < 2 * m; ++k) {
    zeros.push_back((2.0 * static_cast<double>(k) + 1.0 - beta) * kPi / (2.0 * mm));
  }
  const Smoothness hint = sd == 2.0 ? Smoothness::trig_poly : Smoothness::piecewise_linear;
  return SampledFunction(
      [=](double t) {
        const double c = std::cos(mm * t + shift);
        if (c == 0.0) return 0.0;
        const double sg = c > 0 ? 1.0 : -1.0;
        return sd == 1.0 ? sg * scale : sg * scale * std::pow(std::abs(c), sd - 1.0);
      },
      hint, zeros, m);
}

/// E sign cos(mt + beta pi/2) outside delta-neighbourhoods of its zeros
/// t_k = (2k+1-beta) pi/(2m), linear inside them.
inline SampledFunction phi_delta(std::size_t m, double beta, double delta, double E) {
  detail::require(m >= 1, "phi_delta needs m >= 1");
  const double mm = static_cast<double>(m);
  detail::require(delta > 0.0 && delta < kPi / (2.0 * mm), "phi_delta needs 0 < delta < pi/(2m)");
  const double shift = beta * kPi / 2.0;
  std::vector<double> kinks;
  for (std::size_t k = 0; k < 2 * m; ++k) {
    const double tk = (2.0 * static_cast<double>(k) + 1.0 - beta) * kPi / (2.0 * mm);
    kinks.push_back(tk - delta);
    kinks.push_back(tk + delta);
  }
  return SampledFunction(
      [=](double t) {
        // signed offset from the nearest zero u0 = pi/2 + k pi of cos u
        const double v = mm * t + shift - kPi / 2.0;
        const double k = std::round(v / kPi);
        const double du = v - k * kPi;
        const double sg = (static_cast<long long>(k) % 2 == 0) ? -1.0 : 1.0;
        return E * sg * std::clamp(du / (mm * delta), -1.0, 1.0);
      },
      Smoothness::piecewise_linear, kinks, m);
}

/// Half of (1/m) (psi(m+1)/psi(m))^2 with m = n-p+1, kept below pi/(2m).
inline double delta_for_thm4(const PsiSequence& psi, std::size_t n, std::size_t p) {
  detail::require(p >= 1 && p <= n, "delta_for_thm4 needs 1 <= p <= n");
  const std::size_t m = n - p + 1;
  const double mm = static_cast<double>(m);
  const double ratio = psi.ratio(m);
  const double delta = 0.5 * ratio * ratio / mm;
  return std::min(delta, kPi / (4.0 * mm));
}

/// max_j |int b_j w| / int |w| over the basis of T_{2m-1}, with w = |Phi|^{s-1} sign Phi
/// (for s = inf, w = sign Phi on the set where |Phi| attains its sup).
inline double dual_residual(const SampledFunction& phi, std::size_t m, double s) {
  detail::require(m >= 1, "dual_residual needs m >= 1");
  detail::require(s > 1.0, "dual_residual needs s > 1");
  const std::size_t d = detail::basis_dim(m);
  const NodeSet ns = panel_nodes(phi.breakpoints(),
                                 kPi / static_cast<double>(2 * (phi.degree_hint() + m + 1)), true);
  double top = 0.0;
  std::vector<double> pv(ns.x.size());
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    pv[i] = phi(ns.x[i]);
    top = std::max(top, std::abs(pv[i]));
  }
  std::vector<double> acc(d, 0.0);
  std::vector<double> bv(d);
  double mass = 0.0;
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    const double a = std::abs(pv[i]);
    const double sg = pv[i] > 0 ? 1.0 : (pv[i] < 0 ? -1.0 : 0.0);
    double w = 0.0;
    if (std::isinf(s)) {
      w = a >= (1.0 - 1e-9) * top ? sg : 0.0;
    } else {
      w = std::pow(a, s - 1.0) * sg;
    }
    detail::basis_eval(m, ns.x[i], bv.data());
    for (std::size_t j = 0; j < d; ++j) acc[j] += ns.w[i] * w * bv[j];
    mass += ns.w[i] * std::abs(w);
  }
  double worst = 0.0;
  for (double v : acc) worst = std::max(worst, std::abs(v));
  return mass > 0.0 ? worst / mass : 0.0;
}

}  // namespace vallee
