#include <gtest/gtest.h>

#include <cmath>

#include "lsv/errors.hpp"
#include "lsv/observables.hpp"
#include "lsv/transfer.hpp"

using namespace lsv;

TEST(ItemA, RampValues) {
  const auto f = Observable::item_a(0.25);
  EXPECT_EQ(f(0.1), 0.0);
  EXPECT_EQ(f(0.25), 0.0);
  EXPECT_DOUBLE_EQ(f(0.375), 0.5);
  EXPECT_EQ(f(0.5), 1.0);
  EXPECT_EQ(f(0.9), 1.0);
  EXPECT_DOUBLE_EQ(*f.lipschitz_constant(), 4.0);
  EXPECT_DOUBLE_EQ(*f.bv_norm(), 2.0);
  EXPECT_TRUE(f.bounded());
}

TEST(ItemA, TakesFirstPreimageFromGeometry) {
  const auto g = compute_geometry(MapParams::from_gamma(1.0), 3);
  const auto f = Observable::item_a(g);
  EXPECT_DOUBLE_EQ(f.y1(), 0.25);
  EXPECT_THROW(Observable::item_a(0.5), std::invalid_argument);
}

TEST(LogPower, ValuesAndLimits) {
  const auto f = Observable::log_power(2.0);
  EXPECT_NEAR(f(std::exp(-3.0)), 9.0, 1e-12);
  EXPECT_EQ(f(1.0), 0.0);
  EXPECT_FALSE(f.bounded());
  EXPECT_FALSE(f.lipschitz_constant().has_value());
  EXPECT_NEAR(f(1e-320), std::pow(-std::log(kLogPowerGuard), 2.0), 1e-9);
}

TEST(TruncatedLogPower, CapsBelowCutoff) {
  const auto f = Observable::truncated_log_power(1.0, 1e-3);
  const double cap = -std::log(1e-3);
  EXPECT_DOUBLE_EQ(f(1e-9), cap);
  EXPECT_DOUBLE_EQ(f(1e-3), cap);
  EXPECT_NEAR(f(0.1), -std::log(0.1), 1e-15);
  EXPECT_NEAR(*f.lipschitz_constant(), 1e3, 1e-9);
  EXPECT_DOUBLE_EQ(*f.bv_norm(), 2.0 * cap);
}

TEST(TruncatedLogPower, FractionalPowerIsHolder) {
  const auto f = Observable::truncated_log_power(0.5, 0.01);
  EXPECT_FALSE(f.lipschitz_constant().has_value());
  ASSERT_TRUE(f.holder().has_value());
  EXPECT_DOUBLE_EQ(f.holder()->eta, 0.5);
  EXPECT_DOUBLE_EQ(f.holder()->constant, 10.0);
}

TEST(PiecewiseLinear, InterpolatesAndReportsMetadata) {
  const auto f = Observable::piecewise_linear({{0.0, 0.0}, {0.5, 1.0}, {1.0, -1.0}});
  EXPECT_DOUBLE_EQ(f(0.25), 0.5);
  EXPECT_DOUBLE_EQ(f(0.75), 0.0);
  EXPECT_DOUBLE_EQ(*f.lipschitz_constant(), 4.0);
  EXPECT_DOUBLE_EQ(*f.bv_norm(), 1.0 + 3.0);
  EXPECT_THROW(Observable::piecewise_linear({{0.5, 0.0}, {0.5, 1.0}}), std::invalid_argument);
}

TEST(Observable, EvaluateRejectsOutsideUnitInterval) {
  const auto f = Observable::constant(2.0);
  EXPECT_EQ(evaluate(f, 0.3), 2.0);
  EXPECT_THROW(evaluate(f, 0.0), std::domain_error);
  EXPECT_THROW(evaluate(f, 1.5), std::domain_error);
}

TEST(Observable, NuMeanIsAttachedByCopy) {
  const auto f = Observable::item_a(0.3);
  const auto g = f.with_nu_mean(0.4);
  EXPECT_FALSE(f.nu_mean().has_value());
  EXPECT_DOUBLE_EQ(*g.nu_mean(), 0.4);
}

// Lebesgue measure is invariant for the doubling map, so nu(|log x| > t) = e^{-t}.
TEST(TailMass, DoublingMapIsExponential) {
  const auto grid = make_grid(1024);
  const auto d = invariant_density(build_ulam(MapParams::from_gamma(1.0), grid));
  const auto f = Observable::log_power(1.0);
  for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    EXPECT_NEAR(tail_mass(f, d, t), std::exp(-t), 1e-9 * std::exp(-t)) << t;
  }
}

TEST(TailMass, SquareRootPowerUsesSquaredThreshold) {
  const auto d = invariant_density(build_ulam(MapParams::from_gamma(1.0), make_grid(512)));
  const auto f = Observable::log_power(0.5);
  EXPECT_NEAR(tail_mass(f, d, 2.0), std::exp(-4.0), 1e-10);
}

TEST(TailMass, CutBelowFirstCellIsAResolutionError) {
  const auto d = invariant_density(build_ulam(MapParams::from_gamma(1.0), make_grid(512)));
  EXPECT_THROW(tail_mass(Observable::log_power(1.0), d, 40.0), ResolutionError);
  EXPECT_THROW(tail_mass(Observable::item_a(0.3), d, 1.0), std::invalid_argument);
}
