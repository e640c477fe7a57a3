#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "vallee/error.hpp"

namespace vallee {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Reduces t into [-pi, pi).
inline double reduce_angle(double t) {
  double r = std::fmod(t + kPi, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r - kPi;
}

/// cos/sin of beta*pi/2 with beta reduced mod 4; exact for integer beta.
struct Phase {
  double c = 1.0;
  double s = 0.0;

  static Phase of_beta(double beta) {
    double b = std::fmod(beta, 4.0);
    if (b < 0) b += 4.0;
    if (b == std::floor(b)) {
      switch (static_cast<int>(b)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        case 3: return {0.0, -1.0};
        default: break;
      }
    }
    const double phi = b * kPi / 2.0;
    return {std::cos(phi), std::sin(phi)};
  }
};

/// Finite trigonometric series a0/2 + sum_{k=1..N} (a_k cos kt + b_k sin kt).
///
/// Coefficients are stored densely; index 0 of the cosine table holds a0.
/// Trailing zero harmonics are allowed, so size() is a bound and degree()
/// the actual order.
class TrigSeries {
 public:
  TrigSeries() : a_(1, 0.0), b_(1, 0.0) {}

  /// Zero series with room for harmonics 1..n.
  explicit TrigSeries(std::size_t n) : a_(n + 1, 0.0), b_(n + 1, 0.0) {}

  /// a and b hold harmonics 1..N and must have equal length.
  TrigSeries(double a0, const std::vector<double>& a, const std::vector<double>& b) {
    detail::require(a.size() == b.size(), "TrigSeries: cosine and sine tables differ in length");
    a_.assign(a.size() + 1, 0.0);
    b_.assign(a.size() + 1, 0.0);
    a_[0] = a0;
    std::copy(a.begin(), a.end(), a_.begin() + 1);
    std::copy(b.begin(), b.end(), b_.begin() + 1);
    for (std::size_t k = 0; k < a_.size(); ++k) {
      detail::require(std::isfinite(a_[k]) && std::isfinite(b_[k]),
                      "TrigSeries: coefficients must be finite");
    }
  }

  static TrigSeries constant(double c) {
    TrigSeries s;
    s.a_[0] = 2.0 * c;
    return s;
  }
  static TrigSeries cosine(std::size_t k, double amp = 1.0) {
    TrigSeries s(k);
    s.set_a(k, amp);
    return s;
  }
  static TrigSeries sine(std::size_t k, double amp = 1.0) {
    TrigSeries s(k);
    s.set_b(k, amp);
    return s;
  }

  /// Degree bound N.
  std::size_t size() const noexcept { return a_.size() - 1; }

  /// Largest k with (a_k, b_k) != (0, 0), or 0.
  std::size_t degree() const noexcept {
    for (std::size_t k = size(); k > 0; --k) {
      if (a_[k] != 0.0 || b_[k] != 0.0) return k;
    }
    return 0;
  }

  double a0() const noexcept { return a_[0]; }
  double a(std::size_t k) const noexcept { return k < a_.size() ? a_[k] : 0.0; }
  double b(std::size_t k) const noexcept { return (k > 0 && k < b_.size()) ? b_[k] : 0.0; }

  void set_a0(double v) { a_[0] = v; }
  void set_a(std::size_t k, double v) {
    grow(k);
    a_[k] = v;
  }
  void set_b(std::size_t k, double v) {
    detail::require(k > 0, "TrigSeries: b_0 does not exist");
    grow(k);
    b_[k] = v;
  }

  /// Grows (never shrinks) the degree bound.
  void grow(std::size_t n) {
    if (n > size()) {
      a_.resize(n + 1, 0.0);
      b_.resize(n + 1, 0.0);
    }
  }

  /// a0/2 + sum (a_k cos kt + b_k sin kt). The harmonic recurrence is
  /// re-seeded every 32 steps so drift stays at a few ulps for large N.
  double operator()(double t) const {
    const std::size_t n = degree();
    double sum = 0.5 * a_[0];
    if (n == 0) return sum;
    const double c1 = std::cos(t);
    const double s1 = std::sin(t);
    double ck = 1.0;
    double sk = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      if ((k & 31U) == 0) {
        ck = std::cos(static_cast<double>(k) * t);
        sk = std::sin(static_cast<double>(k) * t);
      } else {
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
      }
      sum += a_[k] * ck + b_[k] * sk;
    }
    return sum;
  }

  /// Derivative with respect to t.
  TrigSeries derivative() const {
    TrigSeries d(size());
    for (std::size_t k = 1; k <= size(); ++k) {
      const double kk = static_cast<double>(k);
      d.a_[k] = kk * b_[k];
      d.b_[k] = -kk * a_[k];
    }
    return d;
  }

  TrigSeries& operator+=(const TrigSeries& o) {
    grow(o.size());
    for (std::size_t k = 0; k <= o.size(); ++k) {
      a_[k] += o.a_[k];
      b_[k] += o.b_[k];
    }
    return *this;
  }
  TrigSeries& operator-=(const TrigSeries& o) {
    grow(o.size());
    for (std::size_t k = 0; k <= o.size(); ++k) {
      a_[k] -= o.a_[k];
      b_[k] -= o.b_[k];
    }
    return *this;
  }
  TrigSeries& operator*=(double c) {
    for (auto& v : a_) v *= c;
    for (auto& v : b_) v *= c;
    return *this;
  }

  friend TrigSeries operator+(TrigSeries l, const TrigSeries& r) { return l += r; }
  friend TrigSeries operator-(TrigSeries l, const TrigSeries& r) { return l -= r; }
  friend TrigSeries operator*(TrigSeries l, double c) { return l *= c; }
  friend TrigSeries operator*(double c, TrigSeries r) { return r *= c; }

  /// Largest absolute coefficient difference over all harmonics.
  friend double max_coeff_diff(const TrigSeries& x, const TrigSeries& y) {
    const std::size_t n = std::max(x.size(), y.size());
    double d = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      d = std::max(d, std::abs(x.a(k) - y.a(k)));
      d = std::max(d, std::abs(x.b(k) - y.b(k)));
    }
    return d;
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

inline double evaluate(const TrigSeries& f, double t) { return f(t); }

enum class Smoothness { trig_poly, analytic, piecewise_linear };

/// A 2pi-periodic function known only through point evaluation.
///
/// The evaluator always receives t reduced into [-pi, pi). Breakpoints are
/// points (stored in [0, 2pi)) where the function or its derivative may be
/// non-smooth; quadrature panels are aligned to them.
class SampledFunction {
 public:
  using Evaluator = std::function<double(double)>;

  SampledFunction(Evaluator f, Smoothness hint, std::vector<double> breakpoints = {},
                  std::size_t degree_hint = 0)
      : f_(std::move(f)), hint_(hint), degree_hint_(degree_hint) {
    breakpoints_.reserve(breakpoints.size());
    for (double b : breakpoints) {
      const double r = reduce_angle(b);
      breakpoints_.push_back(r < 0 ? r + kTwoPi : r);
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end(),
                                   [](double x, double y) { return std::abs(x - y) < 1e-15; }),
                       breakpoints_.end());
  }

  /// Wraps a series; the series is copied.
  static SampledFunction from_series(const TrigSeries& s) {
    return SampledFunction([s](double t) { return s(t); }, Smoothness::trig_poly, {}, s.degree());
  }

  double operator()(double t) const { return f_(reduce_angle(t)); }

  Smoothness hint() const noexcept { return hint_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  std::size_t degree_hint() const noexcept { return degree_hint_; }

 private:
  Evaluator f_;
  Smoothness hint_;
  std::vector<double> breakpoints_;
  std::size_t degree_hint_;
};

/// Scalar multiple of a sampled function keeping its metadata.
inline SampledFunction scaled(const SampledFunction& f, double c) {
  return SampledFunction([f, c](double t) { return c * f(t); }, f.hint(), f.breakpoints(),
                         f.degree_hint());
}

}  // namespace vallee
