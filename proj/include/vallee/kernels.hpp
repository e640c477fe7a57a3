#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "vallee/error.hpp"
#include "vallee/fourier.hpp"
#include "vallee/psi.hpp"
#include "vallee/quadrature.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

/// A truncated kernel sum; the true value lies within tail_bound of value.
struct KernelSample {
  double value = 0.0;
  std::size_t truncation_k = 0;
  double tail_bound = 0.0;
};

inline constexpr double kKernelTol = 1e-12;
inline constexpr std::size_t kMaxKernelTerms = 10'000'000;

namespace detail {

/// sum_{k >= k0} w(k) psi(k) cos(kt - beta pi/2) with |w| <= 1, stopped once the
/// certified tail sum_{k > K} psi(k) drops to tol.
template <class W>
KernelSample certified_cos_sum(const PsiSequence& psi, double beta, double t, std::size_t k0,
                               double tol, const W& weight) {
  const double shift = beta * kPi / 2.0;
  KernelSample out;
  for (std::size_t k = k0;; ++k) {
    if (k - k0 > kMaxKernelTerms) {
      throw NumericError("kernel sum needs more than " + std::to_string(kMaxKernelTerms) +
                             " terms; q too close to 1 for tolerance",
                         out.tail_bound);
    }
    const double w = weight(k);
    if (w != 0.0) {
      out.value += w * psi.value_or_zero(k) * std::cos(static_cast<double>(k) * t - shift);
    }
    const double tail = psi.tail_bound(k);
    if (tail <= tol) {
      out.truncation_k = k;
      out.tail_bound = tail;
      return out;
    }
  }
}

}  // namespace detail

/// Psi_beta(t) = sum_{k >= 1} psi(k) cos(kt - beta pi/2).
inline KernelSample psi_kernel(const PsiSequence& psi, double beta, double t,
                               double tol = kKernelTol) {
  (void)psi.dq_limit();  // rejects sequences without a declared limit
  return detail::certified_cos_sum(psi, beta, t, 1, tol, [](std::size_t) { return 1.0; });
}

/// 1 / sqrt(1 - 2q cos t + q^2).
inline double Z_q(double q, double t) { return 1.0 / std::sqrt(1.0 - 2.0 * q * std::cos(t) + q * q); }

/// arctan(q sin t / (1 - q cos t)); for q < 1 the denominator stays positive.
inline double theta_q(double q, double t) { return std::atan2(q * std::sin(t), 1.0 - q * std::cos(t)); }

/// sum_{k=n-p+1}^{n} q^k cos(kt + theta_q(t) - beta pi/2).
inline double P_qbnp(double q, double beta, std::size_t n, std::size_t p, double t) {
  detail::require(p >= 1 && p <= n, "P_qbnp needs 1 <= p <= n");
  const double th = theta_q(q, t) - beta * kPi / 2.0;
  double sum = 0.0;
  for (std::size_t k = n - p + 1; k <= n; ++k) {
    sum += std::pow(q, static_cast<double>(k)) * std::cos(static_cast<double>(k) * t + th);
  }
  return sum;
}

/// Psi_{j,n,p}(t) = sum_{k >= n-p+j} tau_{n,p}(k) psi(k) cos(kt - beta pi/2).
inline KernelSample psi_jnp_kernel(const PsiSequence& psi, double beta, std::size_t n,
                                   std::size_t p, std::size_t j, double t,
                                   double tol = kKernelTol) {
  detail::require(j >= 1, "psi_jnp_kernel needs j >= 1");
  detail::require(p >= 1 && p <= n, "psi_jnp_kernel needs 1 <= p <= n");
  (void)psi.dq_limit();
  return detail::certified_cos_sum(psi, beta, t, n - p + j, tol,
                                   [n, p](std::size_t k) { return tau_weight(n, p, k); });
}

struct TauTailSum {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t truncation_k = 0;
  /// sum_{k >= n-p+j} psi(k)
  double plain_sum = 0.0;
  /// (1/p) sum_{k >= n-p+j} (k - n + p) psi(k)
  double weighted_sum = 0.0;
  /// min(plain_sum, weighted_sum), an upper bound on value
  double min_bound = 0.0;
  /// true when the p > j branch of the split applies
  bool split_branch = false;
};

namespace detail {

/// sum_{k >= k0} w(k) psi(k) for w(k) = c0 + c1 k with c1 >= 0 and w(k0) >= 0,
/// to relative accuracy rel.
inline std::pair<double, double> weighted_tail(const PsiSequence& psi, std::size_t k0, double c0,
                                               double c1, double rel, std::size_t& last_k) {
  double sum = 0.0;
  for (std::size_t k = k0;; ++k) {
    if (k - k0 > kMaxKernelTerms) throw NumericError("tail sum did not converge", sum);
    const double kk = static_cast<double>(k);
    sum += (c0 + c1 * kk) * psi.value_or_zero(k);
    const double rho = psi.ratio_bound_after(k);
    if (!(rho < 1.0)) continue;
    // for k' >= k+1 the weight grows by at most 1 + c1/w(k+1) per step
    const double w1 = c0 + c1 * (kk + 1.0);
    if (!(w1 > 0.0)) continue;
    const double r = rho * (1.0 + c1 / w1);
    if (!(r < 1.0)) continue;
    const double first = w1 * psi.value_or_zero(k + 1);
    const double tail = first / (1.0 - r);
    if (tail <= rel * sum || (sum == 0.0 && tail == 0.0)) {
      last_k = k;
      return {sum, tail};
    }
  }
}

}  // namespace detail

/// sum_{k >= n-p+j} tau_{n,p}(k) psi(k), via the split at k = n, plus the min-bound.
inline TauTailSum tail_sum_tau_psi(const PsiSequence& psi, std::size_t n, std::size_t p,
                                   std::size_t j, double rel_tol = 1e-15) {
  detail::require(j >= 1, "tail_sum_tau_psi needs j >= 1");
  detail::require(p >= 1 && p <= n, "tail_sum_tau_psi needs 1 <= p <= n");
  (void)psi.dq_limit();
  const std::size_t k0 = n - p + j;
  TauTailSum out;
  std::size_t last = 0;
  if (p > j) {
    out.split_branch = true;
    double head = 0.0;
    for (std::size_t k = k0; k <= n - 1; ++k) {
      head += static_cast<double>(k + p - n) / static_cast<double>(p) * psi.value_or_zero(k);
    }
    const auto [tail, tb] = detail::weighted_tail(psi, n, 1.0, 0.0, rel_tol, last);
    out.value = head + tail;
    out.tail_bound = tb;
  } else {
    const auto [tail, tb] = detail::weighted_tail(psi, k0, 1.0, 0.0, rel_tol, last);
    out.value = tail;
    out.tail_bound = tb;
  }
  out.truncation_k = last;
  std::size_t ignored = 0;
  out.plain_sum = detail::weighted_tail(psi, k0, 1.0, 0.0, rel_tol, ignored).first;
  // (k - n + p) / p with k >= k0 is positive
  const double pp = static_cast<double>(p);
  out.weighted_sum =
      detail::weighted_tail(psi, k0, (pp - static_cast<double>(n)) / pp, 1.0 / pp, rel_tol, ignored)
          .first;
  out.min_bound = std::min(out.plain_sum, out.weighted_sum);
  return out;
}

/// r_{n,p}(t) = sum_{k >= n-p+2} tau(k) (psi(k)/psi(m) - q^{k-m}) cos(kt - beta pi/2), m = n-p+1.
inline KernelSample r_np_remainder(const PsiSequence& psi, double q, double beta, std::size_t n,
                                   std::size_t p, double t, double tol = kKernelTol) {
  detail::require(p >= 1 && p <= n, "r_np_remainder needs 1 <= p <= n");
  detail::require(q > 0.0 && q < 1.0, "r_np_remainder needs q in (0,1)");
  const std::size_t m = n - p + 1;
  const double lm = psi.log_value(m);
  const double shift = beta * kPi / 2.0;
  KernelSample out;
  for (std::size_t k = m + 1;; ++k) {
    if (k - m > kMaxKernelTerms) throw NumericError("r_np_remainder did not converge", out.tail_bound);
    const double d = static_cast<double>(k - m);
    const double c = std::exp(psi.log_value(k) - lm) - std::pow(q, d);
    out.value += tau_weight(n, p, k) * c * std::cos(static_cast<double>(k) * t - shift);
    const double rho = psi.ratio_bound_after(k);
    if (!(rho < 1.0)) continue;
    const double tail = std::exp(psi.log_value(k + 1) - lm) / (1.0 - rho) +
                        std::pow(q, d + 1.0) / (1.0 - q);
    if (tail <= tol) {
      out.truncation_k = k;
      out.tail_bound = tail;
      return out;
    }
  }
}

/// f = a0/2 + (1/pi) int phi(x - t) Psi_beta(t) dt, by coefficient multiplication.
inline TrigSeries convolve(const TrigSeries& phi, const PsiSequence& psi, double beta, double a0 = 0.0) {
  return psi_integral(phi, psi, beta, a0);
}

/// Point value of the convolution by quadrature against the truncated kernel.
/// The kernel truncation contributes at most tol * (1/pi) ||phi||_1.
inline double convolve_quadrature(const TrigSeries& phi, const PsiSequence& psi, double beta,
                                  double a0, double x, double tol = kKernelTol) {
  detail::require(phi.a0() == 0.0, "convolve needs a series with zero constant term");
  QuadratureOptions qo;
  qo.rel_tol = 1e-12;
  qo.abs_tol = 1e-14;
  qo.initial_panels = 8 * (phi.degree() + 2);
  const auto r = integrate(
      [&](double t) { return phi(x - t) * psi_kernel(psi, beta, t, tol).value; }, -kPi, kPi, {}, qo);
  return 0.5 * a0 + r.value / kPi;
}

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double tail_bound = 0.0;
};

/// Double sum sum_{k=n-p}^{n-1} sum_{j > k} q^j cos(jt - beta pi/2) against Z_q(t) P_{q,beta,n,p}(t).
inline IdentityCheck vp_kernel_identity_check(double q, double beta, std::size_t n, std::size_t p,
                                              double t, double tol = 1e-15) {
  detail::require(q > 0.0 && q < 1.0, "q must lie in (0,1)");
  detail::require(p >= 1 && p <= n, "needs 1 <= p <= n");
  const double shift = beta * kPi / 2.0;
  // every inner sum is cut at the same J; each discarded tail is at most q^{J+1}/(1-q)
  std::size_t J = n;
  while (static_cast<double>(p) * std::pow(q, static_cast<double>(J + 1)) / (1.0 - q) > tol) ++J;
  IdentityCheck out;
  for (std::size_t k = n - p; k <= n - 1; ++k) {
    for (std::size_t j = k + 1; j <= J; ++j) {
      out.lhs += std::pow(q, static_cast<double>(j)) * std::cos(static_cast<double>(j) * t - shift);
    }
  }
  out.tail_bound = static_cast<double>(p) * std::pow(q, static_cast<double>(J + 1)) / (1.0 - q);
  out.rhs = Z_q(q, t) * P_qbnp(q, beta, n, p, t);
  return out;
}

}  // namespace vallee
