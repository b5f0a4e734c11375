#include <cmath>

#include <gtest/gtest.h>

#include "semiclass/experiments.hpp"
#include "semiclass/exponents.hpp"
#include "semiclass/scaling.hpp"

using namespace semiclass;

namespace {

void expect_triple(const ExponentTriple& e, double s, double t, double alpha) {
  EXPECT_NEAR(e.s, s, 1e-14);
  EXPECT_NEAR(e.t, t, 1e-14);
  if (std::isinf(alpha))
    EXPECT_TRUE(std::isinf(e.alpha));
  else
    EXPECT_NEAR(e.alpha, alpha, 1e-14);
}

ExponentOptions ext() {
  ExponentOptions o;
  o.one_dimensional_extension = true;
  return o;
}

}  // namespace

TEST(Exponent, SoggeAtInfinityD3) { expect_triple(exponent(Regime::Sogge, kInf, 3), 1.0, 0.0, kInf); }

TEST(Exponent, GeneralAtTwoVanishes) { expect_triple(exponent(Regime::General, 2.0, 5), 0.0, 0.0, 1.0); }

TEST(Exponent, SoggeKinkD3) { expect_triple(exponent(Regime::Sogge, 4.0, 3), 0.25, 0.0, 4.0 / 3.0); }

TEST(Exponent, GeneralAtSoggePointD3) {
  expect_triple(exponent(Regime::General, 4.0, 3), 3.0 / 8.0, 0.25, 4.0 / 3.0);
}

TEST(Exponent, TurningPointLogPointD2) {
  expect_triple(exponent(Regime::TurningPoint, 10.0 / 3.0, 2), 0.1, 0.3, 1.25);
}

TEST(Exponent, EllipticAtTwo) { expect_triple(exponent(Regime::Elliptic, 2.0, 4), -1.0, 0.0, 1.0); }

TEST(Exponent, SobolevTriangleBound) {
  expect_triple(exponent(Regime::Sobolev, 6.0, 3), 3.0 * (0.5 - 1.0 / 6.0), 0.0, 1.0);
}

TEST(Exponent, GeneralTwoDimensionalLogBranch) {
  // t(q, 2) = 1/2 - 1/q for q >= 6 by default, removed by the Smith-Zworski flag at q = inf
  EXPECT_NEAR(exponent(Regime::General, 6.0, 2).t, 0.5 - 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(exponent(Regime::General, kInf, 2).t, 0.5, 1e-14);
  EXPECT_EQ(exponent(Regime::General, 4.0, 2).t, 0.0);
  ExponentOptions sz;
  sz.smith_zworski = true;
  EXPECT_LE(exponent(Regime::General, kInf, 2, sz).t, exponent(Regime::General, kInf, 2).t);
}

TEST(Exponent, OneDimensionalGeneral) {
  // d = 1: s = (1/2)(1/2 - 1/q), alpha = q/2
  expect_triple(exponent(Regime::General, kInf, 1), 0.25, 0.0, kInf);
  expect_triple(exponent(Regime::General, 4.0, 1), 0.125, 0.0, 2.0);
}

TEST(Exponent, OneDimensionalExtension) {
  EXPECT_NEAR(exponent(Regime::TurningPoint, kInf, 1, ext()).s, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(exponent(Regime::TurningPoint, 8.0, 1, ext()).s, 1.0 / 6.0 - 2.0 / 24.0, 1e-14);
  EXPECT_NEAR(exponent(Regime::TurningPoint, 3.0, 1, ext()).s, 0.0, 1e-14);
  EXPECT_NEAR(exponent(Regime::Sogge, 6.0, 1, ext()).s, 0.0, 1e-14);
}

TEST(Exponent, DomainErrors) {
  EXPECT_THROW(exponent(Regime::General, 1.5, 3), DomainError);
  EXPECT_THROW(exponent(Regime::General, 4.0, 0), DomainError);
  EXPECT_THROW(exponent(Regime::Sogge, 4.0, 1), DomainError);
  EXPECT_THROW(exponent(Regime::TurningPoint, 4.0, 1), DomainError);
  EXPECT_THROW(exponent(Regime::General, std::nan(""), 3), DomainError);
}

TEST(Exponent, RegimeNamesRoundTrip) {
  for (Regime r : kAllRegimes) EXPECT_EQ(regime_from_string(to_string(r)), r);
  EXPECT_THROW(regime_from_string("bogus"), DomainError);
}

TEST(Breakpoints, Examples) {
  EXPECT_EQ(breakpoints(Regime::Sogge, 3), std::vector<double>{4.0});
  EXPECT_EQ(breakpoints(Regime::TurningPoint, 3), (std::vector<double>{3.0, 6.0}));
  EXPECT_TRUE(breakpoints(Regime::Elliptic, 7).empty());
  EXPECT_TRUE(breakpoints(Regime::Sobolev, 4).empty());
  EXPECT_THROW(breakpoints(Regime::Sogge, 1), DomainError);
}

TEST(Breakpoints, SortedInsideOpenRange) {
  for (int d = 2; d <= 8; ++d)
    for (Regime r : kAllRegimes) {
      const auto b = breakpoints(r, d);
      EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
      EXPECT_EQ(std::adjacent_find(b.begin(), b.end()), b.end());
      for (double q : b) {
        EXPECT_GT(q, 2.0);
        EXPECT_TRUE(std::isfinite(q));
      }
    }
}

TEST(Mu, Examples) {
  EXPECT_NEAR(mu(2.0, 3), 0.0, 1e-14);
  EXPECT_NEAR(mu(10.0 / 3.0, 2), 0.25, 1e-14);
  EXPECT_NEAR(mu(kInf, 3), 0.0, 1e-14);
  EXPECT_THROW(mu(4.0, 1), DomainError);
}

TEST(Mu, QuarterAtTurningPointLogExponent) {
  for (int d = 2; d <= 9; ++d) EXPECT_NEAR(mu(2.0 * (d + 3) / (d + 1), d), 0.25, 1e-13) << "d=" << d;
}

TEST(ExponentInvariants, ContinuityAtBreakpoints) {
  for (int d = 1; d <= 6; ++d) EXPECT_LE(experiments::continuity_gap(d), 1e-12) << "d=" << d;
}

TEST(ExponentInvariants, OrderingChainsAndEqualitySets) {
  for (int d = 1; d <= 6; ++d) {
    const auto r = experiments::check_orderings(d);
    EXPECT_TRUE(r.s_chain) << r.first_failure;
    EXPECT_TRUE(r.alpha_chain) << r.first_failure;
    EXPECT_TRUE(r.equality_sets) << r.first_failure;
  }
}

TEST(ExponentInvariants, TSupport) {
  for (int d = 3; d <= 6; ++d) {
    std::string why;
    EXPECT_TRUE(experiments::check_t_support(d, &why)) << why;
  }
}

TEST(ExponentInvariants, InvariantsOfTriples) {
  for (int d = 1; d <= 6; ++d)
    for (Regime r : kAllRegimes)
      for (double q : experiments::dense_q_grid(d)) {
        const auto e = exponent(r, q, d, ext());
        EXPECT_GE(e.t, 0.0);
        EXPECT_GE(e.alpha, 1.0);
        if (r != Regime::Elliptic) EXPECT_GE(e.s, -1e-15);
      }
}

TEST(ExponentInvariants, SPiecewiseAffineInInverseQ) {
  // Second differences in 1/q vanish away from breakpoints.
  for (int d = 2; d <= 6; ++d)
    for (Regime r : kAllRegimes) {
      const auto bps = breakpoints(r, d);
      for (int i = 1; i < 99; ++i) {
        const double x = 0.5 * i / 100.0, dx = 1e-3;
        bool near = false;
        for (double qb : bps) near = near || std::abs(1.0 / qb - x) < 2 * dx;
        if (near) continue;
        const double f0 = exponent(r, 1.0 / (x - dx), d).s, f1 = exponent(r, 1.0 / x, d).s,
                     f2 = exponent(r, 1.0 / (x + dx), d).s;
        EXPECT_NEAR(f0 - 2 * f1 + f2, 0.0, 1e-12);
      }
    }
}

TEST(DyadicStrips, RangeAtMilli) {
  const auto r = dyadic_strip_range(1e-3, 1.0, 1.0);
  EXPECT_EQ(r.k_first, 0);
  EXPECT_EQ(r.k_last, 6);
  EXPECT_EQ(r.count(), 7);
  EXPECT_THROW(dyadic_strip_range(0.5, 1.0, 1.0), ConstraintError);
}

TEST(DyadicSumConstant, DirectSummationOracle) {
  // C_h^q = sum_k (h^{-s_Sogge} eps_k^{1/4 - mu})^q with eps_k = 2^k h^{2/3}.
  const double q = 5.0, h = 1e-4;
  const int d = 3;
  const auto range = dyadic_strip_range(h, 1.0, 1.0);
  double acc = 0.0;
  for (int k = range.k_first; k <= range.k_last; ++k) {
    const double eps = std::ldexp(std::pow(h, 2.0 / 3.0), k);
    acc += std::pow(std::pow(h, -exponent(Regime::Sogge, q, d).s) * std::pow(eps, 0.25 - mu(q, d)), q);
  }
  EXPECT_NEAR(dyadic_sum_constant(q, d, h, 1.0, 1.0) / std::pow(acc, 1.0 / q), 1.0, 1e-12);
}

TEST(DyadicSumConstant, MonotoneDecreasingInH) {
  // Above the turning-point log exponent the strip sum is dominated by the smallest
  // strip, and the ceiling in K(h) cannot reverse the trend.
  for (double q : {3.0, 4.0, 6.0, kInf}) {
    double prev = kInf;
    for (double h = 1e-6; h < 1e-2; h *= 1.7) {
      const double v = dyadic_sum_constant(q, 3, h, 1.0, 1.0);
      EXPECT_LE(v, prev * (1 + 1e-12)) << "q=" << q << " h=" << h;
      prev = v;
    }
  }
}

TEST(KernelIntegral, ClosedFormBetaZero) {
  // beta = 0, d = 2: int_{-1}^{1} h^{-1} (h + |t|)^{-1} dt = 2 h^{-1} log(1 + 1/h)
  for (double h : {1e-2, 1e-5}) {
    const double exact = 2.0 / h * std::log1p(1.0 / h);
    EXPECT_NEAR(kernel_integral(h, 0.0, 2, false) / exact, 1.0, 1e-8);
  }
}

TEST(KernelIntegral, ClosedFormSquared) {
  // beta = 0, d = 2 squared: int h^{-2} (h+|t|)^{-2} = 2 h^{-2} (1/h - 1/(1+h))
  const double h = 1e-3;
  const double exact = std::sqrt(2.0 / (h * h) * (1.0 / h - 1.0 / (1.0 + h)));
  EXPECT_NEAR(kernel_integral(h, 0.0, 2, true) / exact, 1.0, 1e-8);
}

TEST(KernelIntegral, MonotoneDecreasingInH) {
  for (double beta : {0.0, 0.5, 1.0})
    for (bool sq : {false, true}) {
      double prev = kInf;
      for (double h = 1e-8; h < 1e-1; h *= 3.0) {
        const double v = kernel_integral(h, beta, 3, sq);
        EXPECT_LT(v, prev);
        prev = v;
      }
    }
}

TEST(KernelIntegral, Errors) {
  EXPECT_THROW(kernel_integral(0.0, 0.0, 3, false), DomainError);
  EXPECT_THROW(kernel_integral(1e-3, -1.0, 3, false), DomainError);
}
