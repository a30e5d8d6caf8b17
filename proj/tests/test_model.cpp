#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wavebif/model.hpp"

using namespace wavebif;

TEST(FluxModel, CubicTaylorPolynomial) {
  const FluxModel f(2.0, 1.0, 6.0);
  // 2(0.5) + 1/2 (0.25) + 6/6 (0.125)
  EXPECT_DOUBLE_EQ(flux_eval(f, 0.5), 1.0 + 0.125 + 0.125);
  EXPECT_DOUBLE_EQ(flux_eval(f, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f.nonlinear_part(-1.0), 0.5 - 1.0);
  EXPECT_FALSE(f.is_linear());
  EXPECT_TRUE(FluxModel(3.0, 0.0, 0.0).is_linear());
}

TEST(FluxModel, PolynomialTailStartsAtQuartic) {
  const auto f = FluxModel::with_polynomial_tail(0.0, 0.0, 0.0, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(f.tail(0.5), 0.0625 + 2.0 * 0.03125);
  EXPECT_DOUBLE_EQ(f.tail(0.0), 0.0);
  EXPECT_TRUE(f.has_polynomial_tail());
  EXPECT_FALSE(f.is_linear());
}

TEST(FluxModel, CallableTail) {
  const auto f = FluxModel::with_tail(1.0, 0.0, 0.0, [](double t) { return std::pow(std::sin(t), 4); });
  EXPECT_NEAR(f.tail(0.3), std::pow(std::sin(0.3), 4), 1e-15);
  EXPECT_TRUE(f.has_tail());
  EXPECT_FALSE(f.has_polynomial_tail());
}

TEST(TailCheck, AcceptsQuarticAndHigher) {
  EXPECT_TRUE(check_tail(FluxModel(1, 2, 3)).ok);
  const auto quartic = check_tail(FluxModel::with_polynomial_tail(0, 0, 0, {3.0}));
  EXPECT_TRUE(quartic.ok);
  EXPECT_NEAR(quartic.bound, 3.0, 1e-12);
  EXPECT_TRUE(check_tail(FluxModel::with_tail(0, 0, 0, [](double t) { return std::pow(std::sin(t), 4); })).ok);
  EXPECT_TRUE(check_tail(FluxModel::with_tail(0, 0, 0, [](double t) { return std::pow(t, 6); })).ok);
}

TEST(TailCheck, RejectsLowOrderRemainder) {
  EXPECT_FALSE(check_tail(FluxModel::with_tail(0, 0, 0, [](double t) { return std::pow(std::abs(t), 3); })).ok);
  EXPECT_FALSE(check_tail(FluxModel::with_tail(0, 0, 0, [](double t) { return 1e-6 * t * t; })).ok);
}

TEST(NormalizeDomain, IdentityOnReferenceDomain) {
  const auto p = normalize_domain({1.5, 0.25, 1.0, std::numbers::pi});
  EXPECT_EQ(p.a(), 1.5);
  EXPECT_EQ(p.delta(), 0.25);
}

TEST(NormalizeDomain, RescalesLengthAndViscosity) {
  // x = (M/pi) y, t = (M/pi)^4 s / eps: a -> a/eps, delta -> (M/pi)^2 delta / eps.
  const auto p = normalize_domain({2.0, 3.0, 2.0, 2.0 * std::numbers::pi});
  EXPECT_DOUBLE_EQ(p.a(), 1.0);
  EXPECT_DOUBLE_EQ(p.delta(), 6.0);
}

TEST(NormalizeDomain, RejectsNonpositiveScales) {
  EXPECT_THROW(normalize_domain({1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(normalize_domain({1.0, 1.0, 1.0, -1.0}), std::invalid_argument);
}
