#include <cmath>

#include <gtest/gtest.h>

#include "semiclass/scaling.hpp"

using namespace semiclass;

namespace {

std::vector<Sample> synthetic(double s, double t, int k_lo, int k_hi, double C = 1.0) {
  std::vector<Sample> out;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double h = std::ldexp(1.0, -k);
    out.push_back({h, C * std::pow(h, -s) * std::pow(std::log(1.0 / h), t)});
  }
  return out;
}

ScalingFit fake_fit(double s) {
  ScalingFit f;
  f.s_hat = s;
  return f;
}

}  // namespace

TEST(FitExponent, ExactPowerLaw) {
  const auto f = fit_exponent(synthetic(0.5, 0.0, 2, 12), FitMode::PowerOnly);
  EXPECT_NEAR(f.s_hat, 0.5, 1e-12);
  EXPECT_LE(f.max_rel_residual, 1e-12);
  EXPECT_EQ(f.n_points, 11);
}

TEST(FitExponent, PowerAndLogRecovery) {
  const auto f = fit_exponent(synthetic(1.0, 0.5, 8, 20), FitMode::PowerAndLog);
  EXPECT_NEAR(f.s_hat, 1.0, 1e-6);
  EXPECT_NEAR(f.t_hat, 0.5, 1e-6);
}

TEST(FitExponent, ConstantData) {
  EXPECT_NEAR(fit_exponent(synthetic(0.0, 0.0, 2, 10, 3.7), FitMode::PowerOnly).s_hat, 0.0, 1e-12);
}

TEST(FitExponent, FrozenLogPower) {
  const auto f = fit_exponent_frozen_t(synthetic(0.3, 1.5, 4, 16), 1.5);
  EXPECT_NEAR(f.s_hat, 0.3, 1e-12);
  EXPECT_TRUE(f.t_frozen);
  EXPECT_EQ(f.t_hat, 1.5);
}

TEST(FitExponent, EquivariantUnderRescaling) {
  const auto a = fit_exponent(synthetic(0.7, 0.4, 8, 20), FitMode::PowerAndLog);
  const auto b = fit_exponent(synthetic(0.7, 0.4, 8, 20, 1e5), FitMode::PowerAndLog);
  EXPECT_NEAR(a.s_hat, b.s_hat, 1e-12);
  EXPECT_NEAR(a.t_hat, b.t_hat, 1e-12);
  EXPECT_NEAR(b.intercept - a.intercept, std::log(1e5), 1e-9);
}

TEST(FitExponent, DropOneStability) {
  const auto full = synthetic(0.25, 0.0, 2, 14);
  const double s0 = fit_exponent(full, FitMode::PowerOnly).s_hat;
  for (std::size_t i = 0; i < full.size(); ++i) {
    auto cut = full;
    cut.erase(cut.begin() + static_cast<std::ptrdiff_t>(i));
    EXPECT_NEAR(fit_exponent(cut, FitMode::PowerOnly).s_hat, s0, 1e-10);
  }
}

TEST(FitExponent, Errors) {
  EXPECT_THROW(fit_exponent(synthetic(0.5, 0.0, 2, 4), FitMode::PowerOnly), ConstraintError);
  EXPECT_THROW(fit_exponent(synthetic(0.5, 0.5, 8, 12), FitMode::PowerAndLog), ConstraintError);
  auto bad = synthetic(0.5, 0.0, 2, 8);
  bad[2].y = -1.0;
  EXPECT_THROW(fit_exponent(bad, FitMode::PowerOnly), DomainError);
  // all samples at the same h: collinear with the intercept column
  std::vector<Sample> same(6, Sample{0.01, 2.0});
  EXPECT_THROW(fit_exponent(same, FitMode::PowerOnly), ConstraintError);
  // log(1/h) <= 1 is outside the PowerAndLog model
  EXPECT_THROW(fit_exponent(synthetic(0.5, 0.0, 0, 8), FitMode::PowerAndLog), DomainError);
}

TEST(FitExponent, NarrowRangeWarns) {
  Diagnostics diag;
  std::vector<Sample> s;
  for (double h : {0.01, 0.009, 0.008, 0.007}) s.push_back({h, 1.0 / h});
  fit_exponent(s, FitMode::PowerOnly, &diag);
  EXPECT_TRUE(diag.has_warning("two decades"));
}

TEST(Compare, Examples) {
  const ExponentTriple pred{0.5, 0.0, 1.0};
  EXPECT_TRUE(compare(fake_fit(0.5), pred, 0.05, 0.05).pass());
  const auto v = compare(fake_fit(0.62), pred, 0.05, 0.05, CompareMode::TwoSided);
  EXPECT_FALSE(v.pass());
  EXPECT_NEAR(v.margin_s, 0.07, 1e-12);
  EXPECT_TRUE(compare(fake_fit(0.3), pred, 0.05, 0.05, CompareMode::OneSided).pass());
  EXPECT_FALSE(compare(fake_fit(0.56), pred, 0.05, 0.05, CompareMode::OneSided).pass());
  EXPECT_THROW(compare(fake_fit(0.5), pred, 0.0, 0.05), DomainError);
}

TEST(Compare, LogPowerCheckedOnlyWhenFitted) {
  auto f = fit_exponent(synthetic(1.0, 0.5, 8, 20), FitMode::PowerAndLog);
  EXPECT_TRUE(compare(f, {1.0, 0.5, 1.0}, 0.01, 0.01).pass());
  EXPECT_FALSE(compare(f, {1.0, 0.0, 1.0}, 0.01, 0.01).pass());
  const auto frozen = fit_exponent_frozen_t(synthetic(1.0, 0.5, 8, 20), 0.0);
  EXPECT_FALSE(compare(frozen, {1.0, 0.5, 1.0}, 0.01, 0.01).check_t);
}
