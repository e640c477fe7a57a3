#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "vallee/error.hpp"

namespace vallee::lp {

/// maximize c'x subject to A x = b, 0 <= x <= upper (upper may be +inf).
struct Problem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd upper;
};

struct Solution {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Simplex multipliers y with c_B = B'y; the primal of the dual problem.
  Eigen::VectorXd duals;
  std::size_t iterations = 0;
};

namespace detail {

/// Dense bounded-variable simplex tableau, artificial start.
class Tableau {
 public:
  explicit Tableau(const Problem& pr) : m_(pr.A.rows()), n_(pr.A.cols()) {
    const Eigen::Index cols = n_ + m_;
    T_.setZero(m_, cols);
    row_sign_ = Eigen::VectorXd::Ones(m_);
    xb_ = pr.b;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (xb_(i) < 0) {
        row_sign_(i) = -1.0;
        xb_(i) = -xb_(i);
      }
      T_.row(i).head(n_) = row_sign_(i) * pr.A.row(i);
      T_(i, n_ + i) = 1.0;
    }
    upper_ = Eigen::VectorXd::Constant(cols, std::numeric_limits<double>::infinity());
    upper_.head(n_) = pr.upper;
    at_upper_.assign(static_cast<std::size_t>(cols), false);
    basis_.resize(static_cast<std::size_t>(m_));
    basic_.assign(static_cast<std::size_t>(cols), 0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      basic_[static_cast<std::size_t>(n_ + i)] = 1;
    }
    scale_ = std::max(1.0, pr.A.cwiseAbs().maxCoeff());
  }

  /// Runs the simplex for objective `cost` (length n+m). Returns iterations used.
  std::size_t optimize(const Eigen::VectorXd& cost, std::size_t max_iter) {
    cost_ = cost;
    reduced_ = cost;
    for (Eigen::Index i = 0; i < m_; ++i) {
      reduced_ -= cost(basis_[static_cast<std::size_t>(i)]) * T_.row(i).transpose();
    }
    std::size_t degenerate_run = 0;
    const double dtol = 1e-11 * scale_;
    for (std::size_t it = 0; it < max_iter; ++it) {
      const bool bland = degenerate_run > 50;
      Eigen::Index enter = -1;
      double best = 0.0;
      for (Eigen::Index j = 0; j < T_.cols(); ++j) {
        if (in_basis(j) || upper_(j) == 0.0) continue;
        const double d = reduced_(j);
        const bool up = at_upper_[static_cast<std::size_t>(j)];
        const double gain = up ? -d : d;
        if (gain > dtol) {
          if (bland) {
            enter = j;
            break;
          }
          if (gain > best) {
            best = gain;
            enter = j;
          }
        }
      }
      if (enter < 0) return it;
      const double dir = at_upper_[static_cast<std::size_t>(enter)] ? -1.0 : 1.0;
      const Eigen::VectorXd col = T_.col(enter);
      // ratio test: basic i moves by -dir*theta*col(i)
      double theta = upper_(enter);
      Eigen::Index leave = -1;
      bool leave_to_upper = false;
      const double ptol = 1e-10;
      double best_piv = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = dir * col(i);
        const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
        double lim = std::numeric_limits<double>::infinity();
        bool to_upper = false;
        if (a > ptol) {
          lim = std::max(0.0, xb_(i)) / a;
        } else if (a < -ptol && std::isfinite(upper_(bi))) {
          lim = std::max(0.0, upper_(bi) - xb_(i)) / -a;
          to_upper = true;
        } else {
          continue;
        }
        // ties go to the larger pivot for stability
        if (lim < theta - 1e-14 || (lim <= theta + 1e-14 && leave >= 0 && std::abs(a) > best_piv)) {
          theta = lim;
          leave = i;
          leave_to_upper = to_upper;
          best_piv = std::abs(a);
        }
      }
      if (!std::isfinite(theta)) throw NumericError("linear program is unbounded");
      degenerate_run = theta <= 1e-14 ? degenerate_run + 1 : 0;
      xb_ -= dir * theta * col;
      if (leave < 0) {
        at_upper_[static_cast<std::size_t>(enter)] = !at_upper_[static_cast<std::size_t>(enter)];
        continue;
      }
      const double enter_value = dir > 0 ? theta : upper_(enter) - theta;
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      pivot(leave, enter);
      xb_(leave) = enter_value;
      at_upper_[static_cast<std::size_t>(out)] = leave_to_upper;
      at_upper_[static_cast<std::size_t>(enter)] = false;
    }
    throw NumericError("simplex iteration limit " + std::to_string(max_iter) + " reached");
  }

  /// Drives zero-level artificials out of the basis where possible and fixes them at 0.
  void retire_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi < n_) continue;
      Eigen::Index best = -1;
      double piv = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (in_basis(j) || at_upper_[static_cast<std::size_t>(j)]) continue;
        if (std::abs(T_(i, j)) > piv) {
          piv = std::abs(T_(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        // degenerate swap: the artificial sits at zero, so xb_(i) carries over
        pivot(i, best);
        at_upper_[static_cast<std::size_t>(bi)] = false;
      }
    }
    for (Eigen::Index j = n_; j < n_ + m_; ++j) upper_(j) = 0.0;
  }

  double artificial_sum() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= n_) s += xb_(i);
    }
    return s;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (at_upper_[static_cast<std::size_t>(j)]) x(j) = upper_(j);
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi < n_) x(bi) = xb_(i);
    }
    return x;
  }

  /// y with y' A_j = c_j on basic columns; read off the artificial block (= B^{-1}).
  Eigen::VectorXd duals() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost_(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) y += cb * T_.row(i).segment(n_, m_).transpose();
    }
    return y.cwiseProduct(row_sign_);
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return n_; }

 private:
  bool in_basis(Eigen::Index j) const { return basic_[static_cast<std::size_t>(j)] != 0; }

  void pivot(Eigen::Index r, Eigen::Index j) {
    const double p = T_(r, j);
    T_.row(r) /= p;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = T_(i, j);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    const double fr = reduced_(j);
    if (fr != 0.0) reduced_ -= fr * T_.row(r).transpose();
    basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = 0;
    basic_[static_cast<std::size_t>(j)] = 1;
    basis_[static_cast<std::size_t>(r)] = j;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd row_sign_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd reduced_;
  std::vector<bool> at_upper_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> basic_;
  double scale_ = 1.0;
};

}  // namespace detail

/// Two-phase bounded simplex. Throws NumericError if the problem is infeasible.
inline Solution solve(const Problem& pr, std::size_t max_iter = 200000) {
  const Eigen::Index m = pr.A.rows();
  const Eigen::Index n = pr.A.cols();
  vallee::detail::require(pr.b.size() == m && pr.c.size() == n && pr.upper.size() == n,
                          "lp: inconsistent problem dimensions");
  detail::Tableau tab(pr);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  std::size_t iters = tab.optimize(phase1, max_iter);
  const double infeas = tab.artificial_sum();
  if (infeas > 1e-9 * std::max(1.0, pr.b.cwiseAbs().maxCoeff())) {
    throw NumericError("linear program is infeasible; residual " + std::to_string(infeas), infeas);
  }
  tab.retire_artificials();
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = pr.c;
  iters += tab.optimize(phase2, max_iter);
  Solution out;
  out.x = tab.primal();
  out.objective = pr.c.dot(out.x);
  out.duals = tab.duals();
  out.iterations = iters;
  return out;
}

}  // namespace vallee::lp
