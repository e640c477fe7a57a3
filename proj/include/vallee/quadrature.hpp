#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vallee/error.hpp"
#include "vallee/trig_series.hpp"

namespace vallee {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussRule(std::size_t n) : nodes(n), weights(n) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
      double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double kk = static_cast<double>(k);
          const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }

  template <class F>
  double apply(const F& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return sum * half;
  }
};

inline const GaussRule& gauss20() {
  static const GaussRule rule(20);
  return rule;
}

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  std::size_t initial_panels = 16;
  std::size_t max_panels = 1U << 17;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

namespace detail {

struct Panel {
  double a;
  double b;
  double value;  // two-half refined estimate
  double error;  // |single - two-half|
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel make_panel(const F& f, double a, double b) {
  const auto& g = gauss20();
  const double mid = 0.5 * (a + b);
  const double whole = g.apply(f, a, b);
  const double halves = g.apply(f, a, mid) + g.apply(f, mid, b);
  return {a, b, halves, std::abs(whole - halves)};
}

}  // namespace detail

/// Globally adaptive composite Gauss-Legendre quadrature on [a, b].
///
/// Panels start aligned to the given breakpoints (which must lie in [a, b]);
/// the panel with the largest local error estimate is halved until the summed
/// estimate drops below max(rel_tol*|I|, abs_tol).
template <class F>
QuadratureResult integrate(const F& f, double a, double b, std::vector<double> breakpoints = {},
                           const QuadratureOptions& opt = {}) {
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts;
  for (double x : breakpoints) {
    if (x < a || x > b) continue;
    if (cuts.empty() || x - cuts.back() > 1e-14 * (b - a)) cuts.push_back(x);
  }
  if (cuts.back() < b) cuts.back() = b;

  std::priority_queue<detail::Panel> heap;
  const std::size_t per_segment =
      std::max<std::size_t>(1, opt.initial_panels / std::max<std::size_t>(1, cuts.size() - 1));
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double h = (cuts[s + 1] - cuts[s]) / static_cast<double>(per_segment);
    for (std::size_t i = 0; i < per_segment; ++i) {
      const double lo = cuts[s] + h * static_cast<double>(i);
      const double hi = (i + 1 == per_segment) ? cuts[s + 1] : lo + h;
      heap.push(detail::make_panel(f, lo, hi));
    }
  }

  auto totals = [&heap]() {
    // priority_queue has no iteration; copy is cheap relative to the integrand work
    auto copy = heap;
    double v = 0.0;
    double e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  std::size_t since_sum = 0;
  while (error > std::max(opt.rel_tol * std::abs(value), opt.abs_tol)) {
    if (heap.size() >= opt.max_panels) {
      throw NumericError("adaptive quadrature did not converge; achieved error " +
                             std::to_string(error) + " on " + std::to_string(heap.size()) +
                             " panels",
                         error);
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::make_panel(f, worst.a, mid);
    const auto right = detail::make_panel(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    // periodic resummation keeps the running totals free of drift
    if (++since_sum >= 256) {
      std::tie(value, error) = totals();
      since_sum = 0;
    }
  }
  std::tie(value, error) = totals();
  return {value, error, heap.size()};
}

/// Nodes and weights of a composite Gauss-Legendre rule on [0, 2pi].
struct NodeSet {
  std::vector<double> x;
  std::vector<double> w;
};

/// Composite rule with panels of width <= max_panel that never straddle a cut.
/// With `graded`, every segment between cuts is refined geometrically towards
/// both ends, which handles algebraic endpoint singularities.
inline NodeSet panel_nodes(std::vector<double> cuts, double max_panel, bool graded,
                           std::size_t order = 16) {
  static const GaussRule rule16(16);
  std::optional<GaussRule> local;
  if (order != 16) local.emplace(order);
  const GaussRule& rule = local ? *local : rule16;
  cuts.push_back(0.0);
  cuts.push_back(kTwoPi);
  std::vector<double> clean;
  for (double c : cuts) {
    if (c >= 0.0 && c <= kTwoPi) clean.push_back(c);
  }
  std::sort(clean.begin(), clean.end());
  clean.erase(std::unique(clean.begin(), clean.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-14; }),
              clean.end());
  NodeSet out;
  auto add_panel = [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      out.x.push_back(mid + half * rule.nodes[i]);
      out.w.push_back(half * rule.weights[i]);
    }
  };
  constexpr int levels = 12;
  for (std::size_t s = 0; s + 1 < clean.size(); ++s) {
    double a = clean[s];
    double b = clean[s + 1];
    if (!(b > a)) continue;
    if (graded) {
      const double inner = 0.25 * (b - a);
      double prev = 0.0;
      for (int l = levels; l >= 1; --l) {
        const double next = inner * std::pow(0.5, l);
        add_panel(a + prev, a + next);
        add_panel(b - next, b - prev);
        prev = next;
      }
      a += prev;
      b -= prev;
    }
    const auto panels =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / max_panel)));
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
      const double lo = a + h * static_cast<double>(i);
      add_panel(lo, i + 1 == panels ? b : lo + h);
    }
  }
  return out;
}

/// Integral over one period [0, 2pi) of a periodic integrand.
template <class F>
QuadratureResult integrate_period(const F& f, std::vector<double> breakpoints = {},
                                  const QuadratureOptions& opt = {}) {
  return integrate(f, 0.0, kTwoPi, std::move(breakpoints), opt);
}

}  // namespace vallee
