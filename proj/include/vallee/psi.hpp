#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "vallee/error.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

namespace psi {

struct Geometric {
  double q;
};
struct GenPoisson {
  double alpha;
  double r;
};
struct Polyharmonic {
  int l;
  double q;
};
struct Heat {
  double q;
};
struct Neumann {
  double q;
};

/// Behaviour past the end of a Custom table: psi(N + j) = psi(N) * ratio^j.
struct TailRule {
  double ratio;
};

/// psi(k) = table[k-1] for k <= table.size().
struct Custom {
  std::vector<double> table;
  std::optional<TailRule> tail;
};

}  // namespace psi

/// A positive multiplier sequence psi(k), k >= 1.
class PsiSequence {
 public:
  using Kind = std::variant<psi::Geometric, psi::GenPoisson, psi::Polyharmonic, psi::Heat,
                            psi::Neumann, psi::Custom>;

  PsiSequence(Kind kind) : kind_(std::move(kind)) { validate(); }  // NOLINT(google-explicit-constructor)

  static PsiSequence geometric(double q) { return Kind{psi::Geometric{q}}; }
  static PsiSequence gen_poisson(double alpha, double r) { return Kind{psi::GenPoisson{alpha, r}}; }
  static PsiSequence polyharmonic(int l, double q) { return Kind{psi::Polyharmonic{l, q}}; }
  static PsiSequence heat(double q) { return Kind{psi::Heat{q}}; }
  static PsiSequence neumann(double q) { return Kind{psi::Neumann{q}}; }
  static PsiSequence custom(std::vector<double> table, std::optional<psi::TailRule> tail = {}) {
    return Kind{psi::Custom{std::move(table), tail}};
  }

  const Kind& kind() const noexcept { return kind_; }

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(kind_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, psi::Geometric>) return "geometric";
          if constexpr (std::is_same_v<T, psi::GenPoisson>) return "genpoisson";
          if constexpr (std::is_same_v<T, psi::Polyharmonic>) return "polyharmonic";
          if constexpr (std::is_same_v<T, psi::Heat>) return "heat";
          if constexpr (std::is_same_v<T, psi::Neumann>) return "neumann";
          return "custom";
        },
        kind_);
  }

  /// log psi(k); never under- or overflows for the analytic kinds.
  double log_value(std::size_t k) const {
    detail::require(k >= 1, "psi is defined for k >= 1");
    const double kk = static_cast<double>(k);
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, psi::Geometric>) {
            return kk * std::log(p.q);
          } else if constexpr (std::is_same_v<T, psi::GenPoisson>) {
            return -p.alpha * std::pow(kk, p.r);
          } else if constexpr (std::is_same_v<T, psi::Polyharmonic>) {
            return kk * std::log(p.q) + polyharmonic_log_factor(p, kk);
          } else if constexpr (std::is_same_v<T, psi::Heat>) {
            // 2 q^k / (1 + q^{2k})
            const double lq = kk * std::log(p.q);
            return std::log(2.0) + lq - std::log1p(std::exp(2.0 * lq));
          } else if constexpr (std::is_same_v<T, psi::Neumann>) {
            return kk * std::log(p.q) - std::log(kk);
          } else {
            if (k <= p.table.size()) return std::log(p.table[k - 1]);
            if (!p.tail) {
              throw Unsupported("custom psi table ends at k = " + std::to_string(p.table.size()) +
                                " and has no tail rule; psi(" + std::to_string(k) + ") requested");
            }
            return std::log(p.table.back()) +
                   static_cast<double>(k - p.table.size()) * std::log(p.tail->ratio);
          }
        },
        kind_);
  }

  /// psi(k); throws NumericError naming k when the value is not representable.
  double value(std::size_t k) const {
    const double lv = log_value(k);
    const double v = std::exp(lv);
    if (!(v > 0.0) || !std::isfinite(v) || v < std::numeric_limits<double>::min()) {
      throw NumericError("psi(" + std::to_string(k) + ") = exp(" + std::to_string(lv) +
                         ") is outside the normal double range");
    }
    return v;
  }

  /// psi(k), flushing underflow to zero.
  double value_or_zero(std::size_t k) const { return std::exp(log_value(k)); }

  /// psi(k+1)/psi(k), in closed form where one exists.
  double ratio(std::size_t k) const {
    detail::require(k >= 1, "psi is defined for k >= 1");
    const double kk = static_cast<double>(k);
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, psi::Geometric>) {
            return p.q;
          } else if constexpr (std::is_same_v<T, psi::Neumann>) {
            return p.q * kk / (kk + 1.0);
          } else if constexpr (std::is_same_v<T, psi::Heat>) {
            const double q2k = std::exp(2.0 * kk * std::log(p.q));
            return p.q * (1.0 + q2k) / (1.0 + q2k * p.q * p.q);
          } else {
            return std::exp(log_value(k + 1) - log_value(k));
          }
        },
        kind_);
  }

  /// An upper bound on psi(k+1)/psi(k) over all k >= K+1. May be >= 1, in
  /// which case no geometric tail bound is available from K.
  double ratio_bound_after(std::size_t K) const {
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, psi::Geometric> || std::is_same_v<T, psi::Neumann>) {
            return p.q;
          } else if constexpr (std::is_same_v<T, psi::Heat>) {
            return ratio(K + 1);  // decreasing towards q
          } else if constexpr (std::is_same_v<T, psi::GenPoisson>) {
            if (p.r < 1.0) {
              throw Unsupported("genpoisson with r < 1 has ratio tending to 1; no tail certificate");
            }
            return ratio(K + 1);  // (k+1)^r - k^r is non-decreasing for r >= 1
          } else if constexpr (std::is_same_v<T, psi::Polyharmonic>) {
            // the bracket is a polynomial of degree l-1 with non-negative coefficients
            const double kk = static_cast<double>(K + 1);
            return p.q * std::pow((kk + 1.0) / kk, p.l - 1);
          } else {
            if (!p.tail) throw Unsupported("custom psi without tail rule has no ratio certificate");
            double rho = p.tail->ratio;
            for (std::size_t k = K + 1; k < p.table.size(); ++k) rho = std::max(rho, ratio(k));
            return rho;
          }
        },
        kind_);
  }

  /// Certified bound on sum_{k > K} psi(k), or +inf when no certificate exists at K.
  double tail_bound(std::size_t K) const {
    const double rho = ratio_bound_after(K);
    if (!(rho < 1.0)) return kInf;
    return value_or_zero(K + 1) / (1.0 - rho);
  }

  /// lim psi(k+1)/psi(k), in closed form.
  double dq_limit() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, psi::GenPoisson>) {
            if (p.r == 1.0) return std::exp(-p.alpha);
            if (p.r > 1.0) return 0.0;
            throw Unsupported("genpoisson with r < 1 does not satisfy a D_q condition with q < 1");
          } else if constexpr (std::is_same_v<T, psi::Custom>) {
            if (!p.tail) throw Unsupported("custom psi without tail rule has no declared q-limit");
            return p.tail->ratio;
          } else {
            return p.q;
          }
        },
        kind_);
  }

 private:
  static double polyharmonic_log_factor(const psi::Polyharmonic& p, double k) {
    // log(1 + sum_{j=1}^{l-1} (1-q^2)^j/(j! 2^j) prod_{nu<j}(k+2nu)) via log-sum-exp
    std::vector<double> terms{0.0};
    double lt = 0.0;
    const double lw = std::log1p(-p.q * p.q) - std::log(2.0);
    for (int j = 1; j < p.l; ++j) {
      lt += lw - std::log(static_cast<double>(j)) + std::log(k + 2.0 * (j - 1));
      terms.push_back(lt);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    return top + std::log(sum);
  }

  void validate() const {
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, psi::GenPoisson>) {
            detail::require(p.alpha > 0.0 && std::isfinite(p.alpha), "genpoisson needs alpha > 0");
            detail::require(p.r > 0.0 && std::isfinite(p.r), "genpoisson needs r > 0");
          } else if constexpr (std::is_same_v<T, psi::Custom>) {
            detail::require(!p.table.empty(), "custom psi needs a non-empty table");
            for (double v : p.table) {
              detail::require(v > 0.0 && std::isfinite(v), "custom psi values must be positive");
            }
            if (p.tail) {
              detail::require(p.tail->ratio > 0.0 && p.tail->ratio < 1.0,
                              "custom tail ratio must lie in (0,1)");
            }
          } else {
            detail::require(p.q > 0.0 && p.q < 1.0, "q must lie in (0,1)");
            if constexpr (std::is_same_v<T, psi::Polyharmonic>) {
              detail::require(p.l >= 1, "polyharmonic needs l >= 1");
            }
          }
        },
        kind_);
  }

  Kind kind_;
};

inline double psi_value(const PsiSequence& psi, std::size_t k) { return psi.value(k); }
inline double dq_limit(const PsiSequence& psi) { return psi.dq_limit(); }

struct EpsilonResult {
  double value = 0.0;
  bool closed_form = false;
  /// Numeric path: sup taken over k in [m, window_end].
  std::size_t window_end = 0;
  /// Numeric path: bound on |ratio - q| for k > window_end.
  double tail_bound = 0.0;
};

/// Numeric sup_{k >= m} |psi(k+1)/psi(k) - q| over k in [m, K_max], with
/// K_max = max(2000, 50 m) unless given.
inline EpsilonResult epsilon_m_numeric(const PsiSequence& psi, std::size_t m,
                                       std::size_t k_max = 0) {
  detail::require(m >= 1, "epsilon_m needs m >= 1");
  const double q = psi.dq_limit();
  if (k_max == 0) k_max = std::max<std::size_t>(2000, 50 * m);
  k_max = std::max(k_max, m);
  EpsilonResult out;
  out.window_end = k_max;
  for (std::size_t k = m; k <= k_max; ++k) {
    const double r = std::exp(psi.log_value(k + 1) - psi.log_value(k));
    out.value = std::max(out.value, std::abs(r - q));
  }
  // every kind here has its ratio on one side of q, moving monotonically towards it
  out.tail_bound = std::abs(psi.ratio(k_max + 1) - q);
  if (psi.is<psi::Polyharmonic>()) {
    out.tail_bound = psi.ratio_bound_after(k_max) - q;
  } else if (psi.is<psi::Custom>()) {
    out.tail_bound = 0.0;
    const auto& c = std::get<psi::Custom>(psi.kind());
    for (std::size_t k = k_max + 1; k < c.table.size(); ++k) {
      out.tail_bound = std::max(out.tail_bound, std::abs(psi.ratio(k) - q));
    }
  }
  return out;
}

/// epsilon_m = sup_{k >= m} |psi(k+1)/psi(k) - q|.
inline EpsilonResult epsilon_m(const PsiSequence& psi, std::size_t m) {
  detail::require(m >= 1, "epsilon_m needs m >= 1");
  const double mm = static_cast<double>(m);
  if (const auto* g = std::get_if<psi::Geometric>(&psi.kind())) {
    (void)g;
    return {0.0, true, 0, 0.0};
  }
  if (const auto* nk = std::get_if<psi::Neumann>(&psi.kind())) {
    return {nk->q / (mm + 1.0), true, 0, 0.0};
  }
  if (const auto* h = std::get_if<psi::Heat>(&psi.kind())) {
    const double q = h->q;
    const double v = std::pow(q, 2.0 * mm + 1.0) * (1.0 - q * q) / (1.0 + std::pow(q, 2.0 * (mm + 1.0)));
    return {v, true, 0, 0.0};
  }
  if (const auto* gp = std::get_if<psi::GenPoisson>(&psi.kind()); gp && gp->r == 1.0) {
    return {0.0, true, 0, 0.0};
  }
  return epsilon_m_numeric(psi, m);
}

/// (2l-3) q / m, an upper bound on epsilon_m for the polyharmonic kind.
inline double epsilon_m_polyharmonic_bound(int l, double q, std::size_t m) {
  detail::require(l >= 2, "polyharmonic bound needs l >= 2");
  detail::require(m >= 1, "polyharmonic bound needs m >= 1");
  return (2.0 * l - 3.0) * q / static_cast<double>(m);
}

/// (psi, beta)-derivative: divide harmonic k by psi(k) and advance its phase by beta*pi/2.
inline TrigSeries psi_derivative(const TrigSeries& f, const PsiSequence& psi, double beta) {
  const Phase ph = Phase::of_beta(beta);
  TrigSeries out(f.degree());
  for (std::size_t k = 1; k <= f.degree(); ++k) {
    const double a = f.a(k);
    const double b = f.b(k);
    if (a == 0.0 && b == 0.0) continue;
    const double w = psi.value(k);
    const double na = (a * ph.c + b * ph.s) / w;
    const double nb = (b * ph.c - a * ph.s) / w;
    if (!std::isfinite(na) || !std::isfinite(nb)) {
      throw NumericError("psi derivative overflows at k = " + std::to_string(k));
    }
    out.set_a(k, na);
    out.set_b(k, nb);
  }
  return out;
}

/// (psi, beta)-integral with constant term a0; inverse of psi_derivative.
inline TrigSeries psi_integral(const TrigSeries& phi, const PsiSequence& psi, double beta,
                               double a0 = 0.0) {
  detail::require(phi.a0() == 0.0, "psi_integral needs a series with zero constant term");
  const Phase ph = Phase::of_beta(beta);
  TrigSeries out(phi.degree());
  out.set_a0(a0);
  for (std::size_t k = 1; k <= phi.degree(); ++k) {
    const double a = phi.a(k);
    const double b = phi.b(k);
    if (a == 0.0 && b == 0.0) continue;
    const double w = psi.value_or_zero(k);
    out.set_a(k, w * (a * ph.c - b * ph.s));
    out.set_b(k, w * (b * ph.c + a * ph.s));
  }
  return out;
}

}  // namespace vallee
