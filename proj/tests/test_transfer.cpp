#include <gtest/gtest.h>

#include <cmath>

#include "lsv/errors.hpp"
#include "lsv/model.hpp"
#include "lsv/observables.hpp"
#include "lsv/transfer.hpp"

using namespace lsv;

namespace {

Observable identity() { return Observable::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}}); }

const Model& doubling() {
  static const Model m = build_model(MapParams::from_gamma(1.0), 16384, 4, 2);
  return m;
}

const Model& half() {
  static const Model m = build_model(MapParams::from_gamma(0.5), 2048, 4, 2);
  return m;
}

}  // namespace

TEST(Grid, GeometricLeftUniformRight) {
  const auto g = make_grid(512);
  EXPECT_EQ(g.cells(), 512u);
  EXPECT_DOUBLE_EQ(g.breakpoints.front(), 1e-12);
  EXPECT_DOUBLE_EQ(g.breakpoints[256], 0.5);
  EXPECT_DOUBLE_EQ(g.breakpoints.back(), 1.0);
  EXPECT_EQ(g.left(0), 0.0);
  const double r0 = g.breakpoints[2] / g.breakpoints[1];
  EXPECT_NEAR(g.breakpoints[101] / g.breakpoints[100], r0, 1e-12 * r0);
  EXPECT_NEAR(g.width(300), g.width(400), 1e-15);
  EXPECT_EQ(g.locate(0.5), 255u);
  EXPECT_EQ(g.locate(1.0), 511u);
  EXPECT_EQ(g.locate(1e-14), 0u);
}

TEST(Grid, RejectsTooFewCells) {
  EXPECT_THROW(make_grid(100), std::invalid_argument);
  EXPECT_THROW(make_grid(512, 0.6), std::invalid_argument);
}

TEST(Ulam, RowsAreStochastic) {
  for (const Model* m : {&doubling(), &half()}) {
    for (std::size_t i = 0; i < m->grid.cells(); ++i) ASSERT_NEAR(m->op.row_sum(i), 1.0, 1e-12);
  }
}

TEST(Ulam, ThreadCountDoesNotChangeTheMatrix) {
  const auto p = MapParams::from_gamma(0.5);
  const auto g = make_grid(512);
  const auto a = build_ulam(p, g, 1);
  const auto b = build_ulam(p, g, 3);
  ASSERT_EQ(a.nonzeros(), b.nonzeros());
  for (std::size_t i = 0; i < 512; i += 7) {
    for (std::size_t j = 0; j < 512; j += 5) ASSERT_EQ(a.entry(i, j), b.entry(i, j));
  }
}

TEST(Density, DoublingMapIsLebesgue) {
  for (double v : doubling().density.values) ASSERT_NEAR(v, 1.0, 1e-9);
  EXPECT_NEAR(doubling().density.measure(0.2, 0.7), 0.5, 1e-9);
}

TEST(Density, NormalizedAndPositive) {
  const auto& d = half().density;
  EXPECT_NEAR(d.cumulative.back(), 1.0, 1e-12);
  for (double v : d.values) ASSERT_GT(v, 0.0);
}

TEST(Density, DivergesLikeLogAtZero) {
  const auto& m = half();
  const double r1 = m.density.value_at(1e-8) / -std::log(1e-8);
  const double r2 = m.density.value_at(1e-3) / -std::log(1e-3);
  EXPECT_LT(std::max(r1, r2) / std::min(r1, r2), 1.5);
  EXPECT_GT(m.density.value_at(1e-8), 5.0 * m.density.value_at(0.9));
}

TEST(Integrate, DoublingMeans) {
  const auto& d = doubling().density;
  EXPECT_NEAR(integrate(identity(), d), 0.5, 1e-12);
  // Midpoint rule across the kink at 0.25 costs O(width^2 L).
  EXPECT_NEAR(integrate(Observable::item_a(0.25), d), 0.5 + 0.125, 1e-6);
}

TEST(Integrate, SteepObservableOnCoarseGridIsAResolutionError) {
  const auto& d = doubling().density;
  const auto spike = Observable::piecewise_linear({{0.6, 0.0}, {0.60001, 100.0}});
  EXPECT_THROW(integrate(spike, d), ResolutionError);
}

TEST(Correlations, DoublingClosedForm) {
  const auto& m = doubling();
  const auto f = attach_nu_mean(identity(), m.density);
  const auto cov = correlation_series(m.op, m.density, f, 20);
  for (std::size_t n = 0; n <= 20; ++n) EXPECT_NEAR(cov[n], std::ldexp(1.0 / 12.0, -int(n)), 1e-6) << n;
}

TEST(Correlations, DoublingVarianceConstants) {
  const auto& m = doubling();
  const auto vc = variance_constants(m.op, m.density, attach_nu_mean(identity(), m.density));
  EXPECT_NEAR(vc.variance, 1.0 / 12.0, 1e-6);
  EXPECT_NEAR(vc.sigma2, 0.25, 1e-5);
  EXPECT_NEAR(vc.V, 0.25, 1e-5);
}

TEST(Correlations, BoundedByVariance) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  const auto cov = correlation_series(m.op, m.density, f, 500);
  for (double c : cov) ASSERT_LE(std::fabs(c), cov[0]);
  const auto vc = variance_constants(m.op, m.density, f);
  EXPECT_GE(vc.V, vc.sigma2);
  EXPECT_GT(vc.sigma2, 0.0);
  EXPECT_GT(vc.terms, 10u);
}

TEST(Correlations, ConstantObservableHasNoVariance) {
  const auto& m = half();
  const auto vc = variance_constants(m.op, m.density, Observable::constant(3.0));
  EXPECT_EQ(vc.sigma2, 0.0);
  EXPECT_EQ(vc.V, 0.0);
}

TEST(Pairing, OperatorAndQuadratureAgree) {
  const auto& m = half();
  const auto f = Observable::item_a(m.geometry);
  const auto id = identity();
  EXPECT_NEAR(pairing_by_operator(m.op, m.density, f, id), pairing_by_quadrature(m.params, m.density, f, id),
              4.0 / 2048);
}

TEST(Refinement, RampMeanIsStable) {
  const auto p = MapParams::from_gamma(0.5);
  const auto coarse = build_model(p, 4096, 2, 2);
  const auto fine = build_model(p, 8192, 2, 2);
  const double a = integrate(Observable::item_a(coarse.geometry), coarse.density);
  const double b = integrate(Observable::item_a(fine.geometry), fine.density);
  EXPECT_LT(std::fabs(a - b), 1e-4);
}
