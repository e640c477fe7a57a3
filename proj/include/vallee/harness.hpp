#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vallee/best_approx.hpp"
#include "vallee/error.hpp"
#include "vallee/fourier.hpp"
#include "vallee/kernels.hpp"
#include "vallee/psi.hpp"
#include "vallee/special.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

enum class Theorem { T1, T2, T3, T4 };

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::T1: return "T1";
    case Theorem::T2: return "T2";
    case Theorem::T3: return "T3";
    case Theorem::T4: return "T4";
  }
  return "?";
}

struct ErrorTerm {
  std::string name;
  double value = 0.0;
};

/// One evaluated inequality.
///
/// rhs_leading, budget1 and budget2 are absolute: they already carry psi(m)/p
/// (where the theorem has it) and the best-approximation value E. The
/// inequality reads lhs <= rhs_leading + O(1) (budget1 + budget2).
/// error_terms holds the raw bracketed terms before those factors.
struct InequalityReport {
  Theorem theorem = Theorem::T1;
  std::string psi;
  double beta = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  double s = 0.0;

  double lhs = 0.0;
  double rhs_leading = 0.0;
  double budget1 = 0.0;
  double budget2 = 0.0;
  double ratio = 0.0;
  std::vector<ErrorTerm> error_terms;

  double best_approx_value = 0.0;
  double best_approx_lower = 0.0;
  double best_approx_gap = 0.0;
  std::string best_approx_source;

  double K_value = 0.0;
  double K_est_error = 0.0;
  std::string K_method;
  double epsilon = 0.0;
  std::string epsilon_method;

  /// Bound on the lhs error from truncating the Fourier projection of phi.
  double truncation_bound = 0.0;
  bool flagged = false;
};

struct HarnessOptions {
  /// Degree of the Fourier projection for sampled phi; 0 means 16 (n+1).
  std::size_t projection_degree = 0;
  /// Use this as E instead of solving for it (extremal families know E by construction).
  std::optional<double> known_E;
  NormOptions norm{1e-10, 64, 1U << 16, 16};
};

/// Leading factor of the Thm 1 bound and its two bracketed correction terms.
struct T1Rhs {
  /// psi(m)/p ||cos||_{s'} / pi^{1+1/s'} K_{q,p}(s'), without E.
  double leading = 0.0;
  /// q delta(s) / (m (1-q)^{sigma(s',p)})
  double term1 = 0.0;
  /// epsilon_m / (1-q)^2 min{p, 1/(1-q)}
  double term2 = 0.0;
  SharpConstant K;
  EpsilonResult eps;
};

inline T1Rhs rhs_leading_T1(const PsiSequence& psi, double q, std::size_t n, std::size_t p, double s) {
  detail::check_np(n, p);
  detail::require(q > 0.0 && q < 1.0, "Thm 1 needs q in (0,1)");
  detail::require(s >= 1.0, "Thm 1 needs s >= 1");
  const std::size_t m = n - p + 1;
  const double sd = dual_exponent(s);
  const double pp = static_cast<double>(p);
  T1Rhs out;
  out.K = K_qp(q, p, sd);
  const double pi_pow = std::isinf(sd) ? kPi : std::pow(kPi, 1.0 + 1.0 / sd);
  out.leading = psi.value(m) / pp * cos_norm(sd) / pi_pow * out.K.value;
  out.term1 = q * delta_s(s) / (static_cast<double>(m) * std::pow(1.0 - q, sigma(sd, p)));
  out.eps = epsilon_m(psi, m);
  out.term2 = out.eps.value / ((1.0 - q) * (1.0 - q)) * std::min(pp, 1.0 / (1.0 - q));
  return out;
}

/// Thm 2 counterpart: ||cos||_s / pi^{1+1/s} K_{q,p}(s), sigma(s,p), no delta(s).
inline T1Rhs rhs_leading_T2(const PsiSequence& psi, double q, std::size_t n, std::size_t p, double s) {
  detail::check_np(n, p);
  detail::require(q > 0.0 && q < 1.0, "Thm 2 needs q in (0,1)");
  detail::require(s >= 1.0, "Thm 2 needs s >= 1");
  const std::size_t m = n - p + 1;
  const double pp = static_cast<double>(p);
  T1Rhs out;
  out.K = K_qp(q, p, s);
  const double pi_pow = std::isinf(s) ? kPi : std::pow(kPi, 1.0 + 1.0 / s);
  out.leading = psi.value(m) / pp * cos_norm(s) / pi_pow * out.K.value;
  out.term1 = q / (static_cast<double>(m) * std::pow(1.0 - q, sigma(s, p)));
  out.eps = epsilon_m(psi, m);
  out.term2 = out.eps.value / ((1.0 - q) * (1.0 - q)) * std::min(pp, 1.0 / (1.0 - q));
  return out;
}

namespace detail {

/// phi as a series plus a bound on the sup of what the projection dropped from rho.
struct PreparedPhi {
  TrigSeries series;
  double rho_trunc_sup = 0.0;
};

inline PreparedPhi prepare(const TrigSeries& phi, const PsiSequence&, std::size_t, const HarnessOptions&) {
  require(phi.a0() == 0.0, "phi must have zero mean");
  return {phi, 0.0};
}

inline PreparedPhi prepare(const SampledFunction& phi, const PsiSequence& psi, std::size_t n,
                           const HarnessOptions& opt) {
  const std::size_t D = opt.projection_degree ? opt.projection_degree : 16 * (n + 1);
  auto proj = fourier_project(phi, D);
  proj.series.set_a0(0.0);
  // every harmonic of phi has amplitude <= (1/pi)||phi||_1, and tau <= 1
  return {proj.series, proj.l1_norm * psi.tail_bound(D)};
}

inline TrigSeries rho_of(const TrigSeries& phi, const PsiSequence& psi, double beta, std::size_t n,
                         std::size_t p) {
  return deviation_rho(psi_integral(phi, psi, beta), n, p);
}

struct EValue {
  double value = 0.0;
  double lower = 0.0;
  double gap = 0.0;
  std::string source;
};

template <class Phi>
EValue best_value(const Phi& phi, std::size_t m, double s, const HarnessOptions& opt) {
  if (opt.known_E) return {*opt.known_E, *opt.known_E, 0.0, "construction"};
  const auto r = best_approx(phi, m, s);
  return {r.value, r.lower, r.certified_gap, to_string(r.solver)};
}

inline void finish(InequalityReport& r) {
  r.ratio = r.lhs == 0.0 ? 0.0 : r.lhs / r.rhs_leading;
  r.flagged = r.truncation_bound > 0.01 * r.lhs && r.truncation_bound > 0.0;
}

inline void require_dq(const PsiSequence& psi, bool zero) {
  const double q = psi.dq_limit();
  if (zero) {
    require(q == 0.0, "Thm 3/4 need a psi with q-limit 0 (D_0 class)");
  } else {
    require(q > 0.0 && q < 1.0, "Thm 1/2 need a psi with q-limit in (0,1)");
  }
}

template <class Phi>
InequalityReport verify_q_class(Theorem th, const Phi& phi, const PsiSequence& psi, double beta,
                                std::size_t n, std::size_t p, double s, const HarnessOptions& opt) {
  check_np(n, p);
  require(s >= 1.0, "s must be >= 1");
  require_dq(psi, false);
  const double q = psi.dq_limit();
  const std::size_t m = n - p + 1;
  InequalityReport r;
  r.theorem = th;
  r.psi = psi.name();
  r.beta = beta;
  r.n = n;
  r.p = p;
  r.s = s;
  const auto prep = prepare(phi, psi, n, opt);
  const TrigSeries rho = rho_of(prep.series, psi, beta, n, p);
  const double lhs_norm = th == Theorem::T1 ? kInf : s;
  r.lhs = norm_Ls(rho, lhs_norm, opt.norm);
  r.truncation_bound = prep.rho_trunc_sup * (std::isinf(lhs_norm) ? 1.0 : std::pow(kTwoPi, 1.0 / lhs_norm));
  const auto E = best_value(phi, m, th == Theorem::T1 ? s : 1.0, opt);
  r.best_approx_value = E.value;
  r.best_approx_lower = E.lower;
  r.best_approx_gap = E.gap;
  r.best_approx_source = E.source;
  const T1Rhs rhs = th == Theorem::T1 ? rhs_leading_T1(psi, q, n, p, s) : rhs_leading_T2(psi, q, n, p, s);
  const double scale = psi.value(m) / static_cast<double>(p) * E.value;
  r.rhs_leading = rhs.leading * E.value;
  r.budget1 = scale * rhs.term1;
  r.budget2 = scale * rhs.term2;
  r.error_terms = {{"q_term", rhs.term1}, {"epsilon_term", rhs.term2}};
  r.K_value = rhs.K.value;
  r.K_est_error = rhs.K.est_error;
  r.K_method = to_string(rhs.K.method);
  r.epsilon = rhs.eps.value;
  r.epsilon_method = rhs.eps.closed_form ? "closed_form" : "numeric";
  finish(r);
  return r;
}

}  // namespace detail

/// Thm 1: ||rho_{n,p}(f)||_C against E_{n-p+1}(phi)_{L_s}.
inline InequalityReport verify_T1(const TrigSeries& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_q_class(Theorem::T1, phi, psi, beta, n, p, s, opt);
}
inline InequalityReport verify_T1(const SampledFunction& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_q_class(Theorem::T1, phi, psi, beta, n, p, s, opt);
}

/// Thm 2: ||rho_{n,p}(f)||_{L_s} against E_{n-p+1}(phi)_{L_1}.
inline InequalityReport verify_T2(const TrigSeries& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_q_class(Theorem::T2, phi, psi, beta, n, p, s, opt);
}
inline InequalityReport verify_T2(const SampledFunction& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_q_class(Theorem::T2, phi, psi, beta, n, p, s, opt);
}

namespace detail {

template <class Phi>
InequalityReport verify_zero_class(Theorem th, const Phi& phi, const PsiSequence& psi, double beta,
                                   std::size_t n, std::size_t p, double s, const HarnessOptions& opt) {
  check_np(n, p);
  require_dq(psi, true);
  if (th == Theorem::T3) {
    require(s >= 1.0 && std::isfinite(s), "Thm 3 needs 1 <= s < inf");
  }
  const std::size_t m = n - p + 1;
  const double pp = static_cast<double>(p);
  InequalityReport r;
  r.theorem = th;
  r.psi = psi.name();
  r.beta = beta;
  r.n = n;
  r.p = p;
  r.s = s;
  const auto prep = prepare(phi, psi, n, opt);
  r.lhs = sup_norm(rho_of(prep.series, psi, beta, n, p), opt.norm);
  r.truncation_bound = prep.rho_trunc_sup;
  const auto E = best_value(phi, m, s, opt);
  r.best_approx_value = E.value;
  r.best_approx_lower = E.lower;
  r.best_approx_gap = E.gap;
  r.best_approx_source = E.source;
  const double pm = psi.value(m);
  r.epsilon_method = "none";
  r.K_method = "none";
  if (th == Theorem::T3) {
    const auto tail = tail_sum_tau_psi(psi, n, p, 2);
    r.rhs_leading = cos_norm(dual_exponent(s)) / (kPi * pp) * pm * E.value;
    r.budget1 = tail.value * E.value;
    r.error_terms = {{"tau_tail_sum", tail.value}};
  } else {
    const auto tail = tail_sum_tau_psi(psi, n, p, 3);
    const double lr = 2.0 * psi.log_value(m + 1) - psi.log_value(m);
    r.rhs_leading = 4.0 / (kPi * pp) * pm * E.value;
    r.budget1 = std::exp(lr) / pp * E.value;
    r.budget2 = tail.value * E.value;
    r.error_terms = {{"psi_ratio_term", std::exp(lr)}, {"tau_tail_sum", pp * tail.value}};
  }
  finish(r);
  return r;
}

}  // namespace detail

/// Thm 3 (q-limit 0): ||rho||_C against E_{n-p+1}(phi)_{L_s}, 1 <= s < inf.
inline InequalityReport verify_T3(const TrigSeries& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_zero_class(Theorem::T3, phi, psi, beta, n, p, s, opt);
}
inline InequalityReport verify_T3(const SampledFunction& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, double s, const HarnessOptions& opt = {}) {
  return detail::verify_zero_class(Theorem::T3, phi, psi, beta, n, p, s, opt);
}

/// Thm 4 (q-limit 0): ||rho||_C against E_{n-p+1}(phi)_C.
inline InequalityReport verify_T4(const TrigSeries& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, const HarnessOptions& opt = {}) {
  return detail::verify_zero_class(Theorem::T4, phi, psi, beta, n, p, kInf, opt);
}
inline InequalityReport verify_T4(const SampledFunction& phi, const PsiSequence& psi, double beta,
                                  std::size_t n, std::size_t p, const HarnessOptions& opt = {}) {
  return detail::verify_zero_class(Theorem::T4, phi, psi, beta, n, p, kInf, opt);
}

/// Reflected deviation kernel G(-u), G(t) = sum_{k >= m} tau(k) psi(k)/psi(m) cos(kt - beta pi/2),
/// truncated once the certified tail falls below 1e-17.
inline TrigSeries reflected_deviation_kernel(const PsiSequence& psi, double beta, std::size_t n,
                                             std::size_t p) {
  detail::check_np(n, p);
  const std::size_t m = n - p + 1;
  const double lm = psi.log_value(m);
  std::size_t K = m;
  while (true) {
    const double rho = psi.ratio_bound_after(K);
    if (rho < 1.0 && std::exp(psi.log_value(K + 1) - lm) / (1.0 - rho) < 1e-17) break;
    if (K - m > kMaxKernelTerms) throw NumericError("deviation kernel does not decay");
    ++K;
  }
  const Phase ph = Phase::of_beta(beta);
  TrigSeries g(K);
  for (std::size_t k = m; k <= K; ++k) {
    const double w = tau_weight(n, p, k) * std::exp(psi.log_value(k) - lm);
    // cos(ku + beta pi/2)
    g.set_a(k, w * ph.c);
    g.set_b(k, -w * ph.s);
  }
  return g;
}

/// phi(u) = E |G(-u)|^{s'-1} sign G(-u) / ||G||_{s'}^{s'-1}: Hoelder equality against the
/// deviation kernel, so ||rho||_C = E ||G||_{s'} / pi and E_{n-p+1}(phi)_{L_s} = E.
inline SampledFunction kernel_extremal(const PsiSequence& psi, double beta, std::size_t n,
                                       std::size_t p, double s, double E) {
  if (s == 1.0) throw Unsupported("kernel extremal is not constructed for s = 1");
  detail::require(s > 1.0, "kernel extremal needs s > 1");
  const TrigSeries g = reflected_deviation_kernel(psi, beta, n, p);
  const double sd = dual_exponent(s);
  if (sd == 2.0) {
    TrigSeries phi = g;
    phi *= E / norm_L2_parseval(g);
    return SampledFunction::from_series(phi);
  }
  const double norm = norm_Ls(g, sd);
  const double scale = sd == 1.0 ? E : E / std::pow(norm, sd - 1.0);
  return SampledFunction(
      [g, sd, scale](double u) {
        const double v = g(u);
        if (v == 0.0) return 0.0;
        const double sg = v > 0 ? 1.0 : -1.0;
        return sd == 1.0 ? sg * scale : sg * scale * std::pow(std::abs(v), sd - 1.0);
      },
      Smoothness::piecewise_linear, sign_changes(g), g.degree());
}

enum class PRuleKind { fixed, half, full };

struct PRule {
  PRuleKind kind = PRuleKind::fixed;
  std::size_t value = 1;

  std::size_t operator()(std::size_t n) const {
    switch (kind) {
      case PRuleKind::full: return n;
      case PRuleKind::half: return std::max<std::size_t>(1, n / 2);
      case PRuleKind::fixed: return value;
    }
    return value;
  }
};

struct SweepEntry {
  std::size_t n = 0;
  std::size_t p = 0;
  /// "ok", "flagged" or "error: ..."
  std::string status;
  InequalityReport report;
};

/// Worker count: hardware concurrency capped by VALLEE_LAB_THREADS.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t k = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VALLEE_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) k = std::min(k, static_cast<std::size_t>(v));
  }
  return std::max<std::size_t>(1, std::min(k, jobs));
}

/// Runs job(i) for i in [0, count) on worker threads; job writes its own slot.
template <class Job>
void parallel_for(std::size_t count, const Job& job) {
  const std::size_t workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// One report per n for the theorem's extremal family, E = 1.
///
/// T1 uses kernel_extremal; T3 uses extremal_phi; T4 uses phi_delta with
/// delta_for_thm4. Entries come back in n_list order whatever the thread count.
inline std::vector<SweepEntry> extremal_sweep(Theorem th, const PsiSequence& psi, double beta, double s,
                                              const std::vector<std::size_t>& n_list, PRule p_rule,
                                              const HarnessOptions& base = {}) {
  detail::require(!n_list.empty(), "sweep needs a non-empty n list");
  if (th == Theorem::T2) throw Unsupported("no extremal family is constructed for Thm 2");
  if (th == Theorem::T1 && s == 1.0) throw Unsupported("Thm 1 extremal sweep needs s > 1");
  if (th == Theorem::T3 && s == 1.0) throw Unsupported("Thm 3 extremal sweep needs 1 < s < inf");
  detail::require_dq(psi, th == Theorem::T3 || th == Theorem::T4);
  if (th == Theorem::T3) detail::require(std::isfinite(s) && s > 1.0, "Thm 3 needs 1 < s < inf");
  std::vector<SweepEntry> out(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    SweepEntry& e = out[i];
    e.n = n_list[i];
    e.p = p_rule(e.n);
    try {
      detail::check_np(e.n, e.p);
      const std::size_t m = e.n - e.p + 1;
      HarnessOptions opt = base;
      opt.known_E = 1.0;
      switch (th) {
        case Theorem::T1: {
          const auto phi = kernel_extremal(psi, beta, e.n, e.p, s, 1.0);
          const TrigSeries g = reflected_deviation_kernel(psi, beta, e.n, e.p);
          opt.projection_degree = std::max(16 * (e.n + 1), 2 * g.degree());
          e.report = verify_T1(phi, psi, beta, e.n, e.p, s, opt);
          break;
        }
        case Theorem::T3:
          e.report = verify_T3(extremal_phi(m, beta, s, 1.0), psi, beta, e.n, e.p, s, opt);
          break;
        case Theorem::T4:
          e.report = verify_T4(phi_delta(m, beta, delta_for_thm4(psi, e.n, e.p), 1.0), psi, beta,
                               e.n, e.p, opt);
          break;
        case Theorem::T2:
          break;
      }
      e.status = e.report.flagged ? "flagged" : "ok";
    } catch (const std::exception& ex) {
      e.status = std::string("error: ") + ex.what();
      e.report.theorem = th;
      e.report.n = e.n;
      e.report.p = e.p;
      e.report.s = s;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      e.report.lhs = e.report.rhs_leading = e.report.budget1 = e.report.budget2 = e.report.ratio = nan;
    }
  });
  return out;
}

}  // namespace vallee
