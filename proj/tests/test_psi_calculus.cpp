#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vallee/psi.hpp"

using namespace vallee;

namespace {

// sup over a long window, straight from the ratio definition
double brute_epsilon(const PsiSequence& psi, std::size_t m, std::size_t kmax) {
  const double q = psi.dq_limit();
  double e = 0.0;
  // stop before psi(k+1) reaches the subnormal range, where the ratio loses all digits
  for (std::size_t k = m; k <= kmax && psi.value_or_zero(k + 1) > 1e-290; ++k) {
    e = std::max(e, std::abs(psi.value_or_zero(k + 1) / psi.value_or_zero(k) - q));
  }
  return e;
}

// sum_{j<l} (1-q^2)^j/(j! 2^j) prod_{nu<j} (k + 2 nu), times q^k
double polyharmonic_direct(int l, double q, std::size_t k) {
  const double kk = static_cast<double>(k);
  double sum = 1.0;
  double term = 1.0;
  for (int j = 1; j < l; ++j) {
    term *= (1 - q * q) / (2.0 * j) * (kk + 2.0 * (j - 1));
    sum += term;
  }
  return std::pow(q, kk) * sum;
}

}  // namespace

TEST(PsiValue, Examples) {
  EXPECT_DOUBLE_EQ(psi_value(PsiSequence::geometric(0.5), 3), 0.125);
  EXPECT_NEAR(psi_value(PsiSequence::neumann(0.5), 2), 0.125, 1e-16);
  EXPECT_NEAR(psi_value(PsiSequence::heat(0.5), 1), 0.8, 1e-15);
  EXPECT_NEAR(psi_value(PsiSequence::gen_poisson(1.0, 2.0), 3), std::exp(-9.0), 1e-18);
}

TEST(PsiValue, PolyharmonicMatchesDirectFormula) {
  for (int l : {1, 2, 3, 5}) {
    for (double q : {0.2, 0.7}) {
      for (std::size_t k : {1, 2, 7, 40}) {
        const double want = polyharmonic_direct(l, q, k);
        EXPECT_NEAR(psi_value(PsiSequence::polyharmonic(l, q), k), want, 1e-13 * want);
      }
    }
  }
}

TEST(PsiValue, HeatIsOverflowSafe) {
  const auto h = PsiSequence::heat(0.5);
  // q^{-k} alone would overflow at k = 1100
  const double lv = h.log_value(1100);
  EXPECT_NEAR(lv, std::log(2.0) + 1100 * std::log(0.5), 1e-9);
}

TEST(PsiValue, UnderflowNamesIndex) {
  const auto g = PsiSequence::gen_poisson(1.0, 2.0);
  try {
    (void)g.value(40);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("40"), std::string::npos);
  }
  EXPECT_EQ(g.value_or_zero(40), 0.0);
}

TEST(PsiSequenceType, RejectsBadParameters) {
  EXPECT_THROW(PsiSequence::geometric(1.0), DomainError);
  EXPECT_THROW(PsiSequence::geometric(0.0), DomainError);
  EXPECT_THROW(PsiSequence::gen_poisson(-1.0, 2.0), DomainError);
  EXPECT_THROW(PsiSequence::polyharmonic(0, 0.5), DomainError);
  EXPECT_THROW(PsiSequence::custom({1.0, -2.0}), DomainError);
  EXPECT_THROW((void)PsiSequence::geometric(0.5).value(0), DomainError);
}

TEST(DqLimit, PerKind) {
  EXPECT_NEAR(dq_limit(PsiSequence::gen_poisson(std::log(2.0), 1.0)), 0.5, 1e-15);
  EXPECT_EQ(dq_limit(PsiSequence::gen_poisson(1.0, 2.0)), 0.0);
  EXPECT_EQ(dq_limit(PsiSequence::neumann(0.3)), 0.3);
  EXPECT_EQ(dq_limit(PsiSequence::heat(0.4)), 0.4);
  EXPECT_EQ(dq_limit(PsiSequence::polyharmonic(3, 0.6)), 0.6);
  EXPECT_THROW(dq_limit(PsiSequence::custom({1.0, 0.5})), Unsupported);
  EXPECT_EQ(dq_limit(PsiSequence::custom({1.0, 0.5}, psi::TailRule{0.25})), 0.25);
  EXPECT_THROW(dq_limit(PsiSequence::gen_poisson(1.0, 0.5)), Unsupported);
}

TEST(DqLimit, RatioApproachesLimitWithinEpsilon) {
  for (const auto& psi : {PsiSequence::neumann(0.4), PsiSequence::heat(0.7), PsiSequence::polyharmonic(3, 0.5),
                          PsiSequence::gen_poisson(0.3, 1.0), PsiSequence::geometric(0.9)}) {
    const double r = psi.ratio(200);
    EXPECT_LE(std::abs(r - psi.dq_limit()), epsilon_m(psi, 200).value + 1e-12) << psi.name();
  }
}

TEST(Epsilon, ClosedForms) {
  EXPECT_NEAR(epsilon_m(PsiSequence::neumann(0.5), 3).value, 0.125, 1e-16);
  EXPECT_NEAR(epsilon_m(PsiSequence::heat(0.5), 1).value, 0.125 * 0.75 / 1.0625, 1e-15);
  for (double q : {0.1, 0.5, 0.9}) {
    for (std::size_t m : {1, 10, 100}) {
      const auto e = epsilon_m(PsiSequence::geometric(q), m);
      EXPECT_EQ(e.value, 0.0);
      EXPECT_TRUE(e.closed_form);
    }
  }
}

TEST(Epsilon, ClosedFormsMatchNumericSup) {
  for (double q : {0.2, 0.5, 0.8}) {
    for (std::size_t m : {1, 3, 12, 40}) {
      const auto nk = PsiSequence::neumann(q);
      EXPECT_NEAR(epsilon_m(nk, m).value, brute_epsilon(nk, m, 4000), 1e-12);
      const auto h = PsiSequence::heat(q);
      EXPECT_NEAR(epsilon_m(h, m).value, brute_epsilon(h, m, 4000), 1e-12);
    }
  }
}

TEST(Epsilon, PolyharmonicBound) {
  EXPECT_NEAR(epsilon_m_polyharmonic_bound(2, 0.5, 10), 0.05, 1e-16);
  EXPECT_NEAR(epsilon_m_polyharmonic_bound(3, 0.9, 9), 0.3, 1e-15);
  EXPECT_THROW(epsilon_m_polyharmonic_bound(1, 0.5, 10), DomainError);
  for (int l : {2, 3, 4}) {
    for (double q : {0.3, 0.5, 0.9}) {
      for (std::size_t m : {5, 10, 50}) {
        const auto e = epsilon_m(PsiSequence::polyharmonic(l, q), m);
        EXPECT_FALSE(e.closed_form);
        EXPECT_LE(e.value, epsilon_m_polyharmonic_bound(l, q, m)) << l << " " << q << " " << m;
        EXPECT_GE(e.window_end, 2000U);
      }
    }
  }
}

TEST(Epsilon, CustomNeedsTail) {
  EXPECT_THROW(epsilon_m(PsiSequence::custom({1.0, 0.5, 0.2}), 1), Unsupported);
  const auto c = PsiSequence::custom({1.0, 0.5, 0.2}, psi::TailRule{0.3});
  EXPECT_NEAR(epsilon_m(c, 1).value, 0.2, 1e-15);  // |0.5 - 0.3|
}

TEST(PsiDerivative, Examples) {
  const auto g = PsiSequence::geometric(0.5);
  const auto d0 = psi_derivative(TrigSeries::cosine(1, 0.5), g, 0.0);
  EXPECT_NEAR(d0.a(1), 1.0, 1e-15);
  EXPECT_NEAR(d0.b(1), 0.0, 1e-15);
  const auto d1 = psi_derivative(TrigSeries::cosine(1, 0.5), g, 1.0);
  EXPECT_NEAR(d1.a(1), 0.0, 1e-15);
  EXPECT_NEAR(d1.b(1), -1.0, 1e-15);
  const auto one = PsiSequence::custom({1.0, 1.0, 1.0});
  const auto d2 = psi_derivative(TrigSeries::cosine(1), one, 2.0);
  EXPECT_NEAR(d2.a(1), -1.0, 1e-15);
  EXPECT_NEAR(d2.b(1), 0.0, 1e-15);
  // constant term dropped
  TrigSeries f = TrigSeries::cosine(2);
  f.set_a0(5.0);
  EXPECT_EQ(psi_derivative(f, g, 0.3).a0(), 0.0);
}

TEST(PsiDerivative, UnderflowNamesIndex) {
  const auto g = PsiSequence::gen_poisson(1.0, 2.0);
  EXPECT_THROW(psi_derivative(TrigSeries::cosine(40), g, 0.0), NumericError);
}

TEST(PsiIntegral, Examples) {
  const auto a = psi_integral(TrigSeries::cosine(1), PsiSequence::geometric(0.5), 0.0);
  EXPECT_NEAR(a.a(1), 0.5, 1e-16);
  const auto b = psi_integral(TrigSeries::cosine(2), PsiSequence::neumann(0.5), 0.0);
  EXPECT_NEAR(b.a(2), 0.125, 1e-16);
  TrigSeries bad = TrigSeries::cosine(1);
  bad.set_a0(1.0);
  EXPECT_THROW(psi_integral(bad, PsiSequence::geometric(0.5), 0.0), DomainError);
  EXPECT_EQ(psi_integral(TrigSeries::cosine(1), PsiSequence::geometric(0.5), 0.0, 2.0).a0(), 2.0);
}

TEST(PsiIntegral, InversePairAndIsometry) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ub(-3.0, 3.0);
  const std::vector<PsiSequence> kinds{PsiSequence::geometric(0.8), PsiSequence::neumann(0.9), PsiSequence::heat(0.85),
                                       PsiSequence::polyharmonic(2, 0.8), PsiSequence::gen_poisson(0.2, 1.0)};
  for (const auto& psi : kinds) {
    for (int rep = 0; rep < 10; ++rep) {
      TrigSeries phi(50);
      for (std::size_t k = 1; k <= 50; ++k) {
        phi.set_a(k, nd(rng));
        phi.set_b(k, nd(rng));
      }
      const double beta = ub(rng);
      const auto F = psi_integral(phi, psi, beta);
      const auto round = psi_derivative(F, psi, beta);
      for (std::size_t k = 1; k <= 50; ++k) {
        const double scale = std::abs(phi.a(k)) + std::abs(phi.b(k));
        ASSERT_NEAR(round.a(k), phi.a(k), 1e-12 * scale);
        ASSERT_NEAR(round.b(k), phi.b(k), 1e-12 * scale);
      }
      const auto D = psi_derivative(phi, psi, beta);
      const auto back = psi_integral(D, psi, beta);
      for (std::size_t k = 1; k <= 50; ++k) {
        const double scale = std::abs(phi.a(k)) + std::abs(phi.b(k));
        ASSERT_NEAR(back.a(k), phi.a(k), 1e-12 * scale);
        ASSERT_NEAR(back.b(k), phi.b(k), 1e-12 * scale);
        const double w = psi.value(k);
        const double lhs = D.a(k) * D.a(k) + D.b(k) * D.b(k);
        const double rhs = (phi.a(k) * phi.a(k) + phi.b(k) * phi.b(k)) / (w * w);
        ASSERT_NEAR(lhs, rhs, 1e-12 * rhs);
      }
    }
  }
}

TEST(PsiIntegral, BetaIsPeriodicModFour) {
  const auto g = PsiSequence::geometric(0.6);
  TrigSeries phi(0.0, {0.3, -1.0, 2.0}, {1.0, 0.5, -0.2});
  EXPECT_LT(max_coeff_diff(psi_integral(phi, g, 0.7), psi_integral(phi, g, 4.7)), 1e-14);
}

TEST(TailBound, Certified) {
  for (const auto& psi : {PsiSequence::geometric(0.7), PsiSequence::neumann(0.7), PsiSequence::heat(0.7),
                          PsiSequence::polyharmonic(3, 0.7), PsiSequence::gen_poisson(1.0, 2.0)}) {
    for (std::size_t K : {1, 5, 20}) {
      double tail = 0.0;
      for (std::size_t k = K + 1; k < K + 3000; ++k) tail += psi.value_or_zero(k);
      EXPECT_GE(psi.tail_bound(K), tail * (1 - 1e-12)) << psi.name() << " K=" << K;
    }
  }
}
