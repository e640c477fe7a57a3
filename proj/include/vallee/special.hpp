#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "vallee/error.hpp"
#include "vallee/fourier.hpp"
#include "vallee/quadrature.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

enum class ConstantMethod { quadrature, closed_form, sup_scan };

inline const char* to_string(ConstantMethod m) {
  switch (m) {
    case ConstantMethod::quadrature: return "quadrature";
    case ConstantMethod::closed_form: return "closed_form";
    case ConstantMethod::sup_scan: return "sup_scan";
  }
  return "?";
}

struct SharpConstant {
  double value = 0.0;
  ConstantMethod method = ConstantMethod::quadrature;
  double est_error = 0.0;
};

/// Hoelder conjugate s/(s-1); 1 <-> inf.
inline double dual_exponent(double s) {
  detail::require(s >= 1.0, "exponent must be >= 1");
  if (std::isinf(s)) return 1.0;
  if (s == 1.0) return kInf;
  return s / (s - 1.0);
}

/// ||cos t||_u over one period: (2 sqrt(pi) Gamma((u+1)/2) / Gamma(u/2+1))^{1/u}, 1 at u = inf.
inline double cos_norm(double u) {
  detail::require(u >= 1.0, "cos_norm needs u >= 1");
  if (std::isinf(u)) return 1.0;
  const double lg = std::log(2.0 * std::sqrt(kPi)) + std::lgamma(0.5 * (u + 1.0)) -
                    std::lgamma(0.5 * u + 1.0);
  return std::exp(lg / u);
}

/// sigma(u, p): 1 for (u = 1, p = 1), 2 for (u > 1, p = 1), 3 for p >= 2.
inline int sigma(double u, std::size_t p) {
  detail::require(u >= 1.0, "sigma needs u >= 1");
  detail::require(p >= 1, "sigma needs p >= 1");
  if (p >= 2) return 3;
  return u == 1.0 ? 1 : 2;
}

/// delta(s): 0 at s = 2, 1 otherwise.
inline int delta_s(double s) {
  detail::require(s >= 1.0, "delta_s needs s >= 1");
  return s == 2.0 ? 0 : 1;
}

/// Complete elliptic integral of the first kind with modulus q, by AGM.
inline double elliptic_K(double q) {
  detail::require(q >= 0.0 && q < 1.0, "elliptic_K needs q in [0,1)");
  double a = 1.0;
  double b = std::sqrt((1.0 - q) * (1.0 + q));
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (a + b);
}

struct Hyp2f1Result {
  double value = 0.0;
  double est_error = 0.0;
  std::size_t terms = 0;
};

/// Gauss series F(a, b; c; z) for |z| < 1.
inline Hyp2f1Result hyp2f1_series(double a, double b, double c, double z,
                                  std::size_t max_terms = 1000000) {
  detail::require(std::abs(z) < 1.0, "hyp2f1 series needs |z| < 1");
  detail::require(!(c <= 0.0 && c == std::floor(c)), "hyp2f1 needs c not a non-positive integer");
  double sum = 1.0;
  double term = 1.0;
  for (std::size_t k = 0; k < max_terms; ++k) {
    const double kk = static_cast<double>(k);
    const double ratio = (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * z;
    term *= ratio;
    sum += term;
    if (term == 0.0) return {sum, 0.0, k + 1};
    // once the term ratio has settled below 1 the tail is dominated geometrically
    const double rho = std::max(std::abs(ratio), std::abs(z));
    if (kk > std::abs(a) + std::abs(b) && rho < 1.0) {
      const double tail = std::abs(term) * rho / (1.0 - rho);
      if (tail < 1e-16 * std::abs(sum)) return {sum, tail, k + 1};
    }
  }
  throw NumericError("hyp2f1 series did not converge in " + std::to_string(max_terms) +
                         " terms; last partial sum " + std::to_string(sum),
                     std::abs(term));
}

inline double hyp2f1(double a, double b, double c, double z) {
  return hyp2f1_series(a, b, c, z).value;
}

/// K_{q,1}(u) = pi^{1/u} F(u/2, u/2; 1; q^2)^{1/u}.
inline double K_q1_via_hypergeom(double q, double u) {
  detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::require(u >= 1.0 && std::isfinite(u), "K_q1_via_hypergeom needs finite u >= 1");
  return std::pow(kPi, 1.0 / u) * std::pow(hyp2f1(0.5 * u, 0.5 * u, 1.0, q * q), 1.0 / u);
}

namespace detail {

inline double kqp_integrand(double q, std::size_t p, double t) {
  const double qp = std::pow(q, static_cast<double>(p));
  const double num = std::sqrt(1.0 - 2.0 * qp * std::cos(static_cast<double>(p) * t) + qp * qp);
  return num / (1.0 - 2.0 * q * std::cos(t) + q * q);
}

}  // namespace detail

/// K_{q,p}(u) = 2^{-1/u} || sqrt(1 - 2q^p cos pt + q^{2p}) / (1 - 2q cos t + q^2) ||_u.
inline SharpConstant K_qp(double q, std::size_t p, double u, double rel_tol = 1e-13) {
  detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::require(p >= 1, "K_qp needs p >= 1");
  detail::require(u >= 1.0, "K_qp needs u >= 1");
  if (q > 0.999) throw NumericError("K_qp: q > 0.999 is outside the supported range");
  auto g = [q, p](double t) { return detail::kqp_integrand(q, p, t); };
  if (std::isinf(u)) {
    constexpr std::size_t steps = 2048;  // step pi/1024
    const double h = kTwoPi / static_cast<double>(steps);
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < steps; ++j) {
      const double v = g(h * static_cast<double>(j));
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    const double t = h * static_cast<double>(arg);
    best = std::max(best, detail::golden_max(g, t - h, t + h, 200));
    return {best, ConstantMethod::sup_scan, 1e-15 * best};
  }
  // the integrand peaks sharply at t = 0 as q -> 1; cut the period there and at the
  // minima of the numerator
  std::vector<double> bps;
  for (std::size_t j = 0; j <= p; ++j) bps.push_back(kTwoPi * static_cast<double>(j) / static_cast<double>(p));
  const double w = std::max(1e-3, 1.0 - q);
  for (double c : {0.25 * w, w, 4.0 * w}) {
    if (c < kPi) {
      bps.push_back(c);
      bps.push_back(kTwoPi - c);
    }
  }
  QuadratureOptions qo;
  qo.rel_tol = rel_tol;
  qo.initial_panels = 64;
  const auto r = integrate_period([&g, u](double t) { return std::pow(g(t), u); }, bps, qo);
  const double value = std::pow(0.5 * r.value, 1.0 / u);
  const double est = value * (r.error / std::max(r.value, 1e-300)) / u;
  return {value, ConstantMethod::quadrature, est};
}

/// sqrt(pi) q^{n-p+1} sqrt((1 + q^2 - q^{2p}(2p + 1 - q^2 (2p - 1))) / (1 - q^2)^3).
inline double vp_kernel_l2_closed_form(double q, std::size_t n, std::size_t p) {
  detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::require(p >= 1 && p <= n, "needs 1 <= p <= n");
  const double pp = static_cast<double>(p);
  const double q2 = q * q;
  const double q2p = std::pow(q, 2.0 * pp);
  const double num = 1.0 + q2 - q2p * (2.0 * pp + 1.0 - q2 * (2.0 * pp - 1.0));
  const double den = std::pow(1.0 - q2, 3.0);
  return std::sqrt(kPi) * std::pow(q, static_cast<double>(n - p + 1)) * std::sqrt(num / den);
}

}  // namespace vallee
