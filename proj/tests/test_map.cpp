#include <gtest/gtest.h>

#include <cmath>

#include "lsv/geometry.hpp"
#include "lsv/induced.hpp"
#include "lsv/map.hpp"

using namespace lsv;

TEST(MapParams, DerivedConstants) {
  const auto p = MapParams::from_gamma(0.5);
  EXPECT_DOUBLE_EQ(p.beta, 1.0);
  EXPECT_DOUBLE_EQ(p.c, std::log(2.0));
  EXPECT_TRUE(MapParams::from_gamma(1.0).is_doubling());
  EXPECT_FALSE(p.is_doubling());
}

TEST(MapParams, RejectsGammaOutsideUnitInterval) {
  EXPECT_THROW(MapParams::from_gamma(0.0), std::invalid_argument);
  EXPECT_THROW(MapParams::from_gamma(-0.3), std::invalid_argument);
  EXPECT_THROW(MapParams::from_gamma(1.5), std::invalid_argument);
  EXPECT_THROW(MapParams::from_gamma(std::nan("")), std::invalid_argument);
}

TEST(Map, HalfMapsToOneForEveryGamma) {
  for (double g : {0.2, 0.4, 0.5, 0.7, 0.9, 1.0}) {
    EXPECT_NEAR(apply_map(MapParams::from_gamma(g), 0.5), 1.0, 1e-15) << g;
  }
}

TEST(Map, DoublingBranches) {
  const auto p = MapParams::from_gamma(1.0);
  EXPECT_DOUBLE_EQ(apply_map(p, 0.3), 0.6);
  EXPECT_DOUBLE_EQ(apply_map(p, 0.8), 0.6);
  EXPECT_DOUBLE_EQ(map_derivative(p, 0.1), 2.0);
  EXPECT_DOUBLE_EQ(map_derivative(p, 0.9), 2.0);
}

TEST(Map, LeftBranchValueAtQuarter) {
  // gamma = 1/2: T(x) = x (1 + log 2 / |log x|).
  const auto p = MapParams::from_gamma(0.5);
  const double x = 0.25;
  EXPECT_NEAR(apply_map(p, x), x * (1.0 + std::log(2.0) / std::log(4.0)), 1e-16);
  EXPECT_NEAR(apply_map(p, x), 0.375, 1e-16);
}

TEST(Map, DomainErrors) {
  const auto p = MapParams::from_gamma(0.5);
  EXPECT_THROW(apply_map(p, 0.0), std::domain_error);
  EXPECT_THROW(apply_map(p, 1.0000001), std::domain_error);
  EXPECT_NO_THROW(apply_map(p, 1.0));
}

TEST(Map, DerivativeMatchesFiniteDifference) {
  for (double g : {0.4, 0.5, 0.7}) {
    const auto p = MapParams::from_gamma(g);
    for (double x : {1e-6, 1e-3, 0.1, 0.3, 0.45, 0.7}) {
      const double h = 1e-7 * x;
      const double fd = (apply_map(p, x + h) - apply_map(p, x - h)) / (2 * h);
      EXPECT_NEAR(map_derivative(p, x), fd, 1e-6 * fd) << g << " " << x;
    }
  }
}

TEST(Map, InverseBranchesRoundTrip) {
  for (double g : {0.3, 0.5, 0.8, 1.0}) {
    const auto p = MapParams::from_gamma(g);
    for (double x : {1e-9, 1e-4, 0.01, 0.2, 0.49, 0.5}) {
      EXPECT_NEAR(left_inverse(p, apply_map(p, x)), x, 1e-12 * x) << g << " " << x;
    }
    for (double x : {0.51, 0.75, 0.99, 1.0}) EXPECT_NEAR(right_inverse(apply_map(p, x)), x, 1e-15);
  }
  EXPECT_DOUBLE_EQ(left_inverse(MapParams::from_gamma(0.5), 1.0), 0.5);
}

TEST(Geometry, DoublingBackwardOrbitIsPowersOfTwo) {
  const auto g = compute_geometry(MapParams::from_gamma(1.0), 50);
  for (std::size_t n = 0; n <= 50; ++n) {
    EXPECT_NEAR(g.y(n), std::ldexp(1.0, -int(n) - 1), 1e-12 * std::ldexp(1.0, -int(n) - 1));
  }
}

TEST(Geometry, DoublingReturnTail) {
  const auto g = compute_geometry(MapParams::from_gamma(1.0), 50);
  EXPECT_EQ(return_tail_exact(g, 0), 1.0);
  EXPECT_EQ(return_tail_exact(g, 1), 1.0);
  for (std::size_t n = 2; n <= 52; ++n) EXPECT_EQ(return_tail_exact(g, n), std::ldexp(1.0, 1 - int(n)));
  EXPECT_THROW(return_tail_exact(g, 53), std::out_of_range);
}

TEST(Geometry, LogDomainMatchesIteratedInverse) {
  const auto p = MapParams::from_gamma(0.5);
  const auto g = compute_geometry(p, 60);
  double y = 0.5;
  for (std::size_t n = 1; n <= 60; ++n) {
    y = left_inverse(p, y);
    EXPECT_NEAR(g.y(n), y, 1e-11 * y) << n;
  }
}

TEST(Geometry, StaysRepresentableBeyondUnderflow) {
  const auto g = compute_geometry(MapParams::from_gamma(0.9), 5000);
  EXPECT_GT(g.u.back(), 745.0);
  for (std::size_t n = 1; n < g.u.size(); ++n) ASSERT_GT(g.u[n], g.u[n - 1]);
}

TEST(Geometry, EnvelopeBracketsScaledLogs) {
  const auto p = MapParams::from_gamma(0.5);
  const auto g = compute_geometry(p, 2000);
  const auto env = fit_envelope(g);
  EXPECT_GT(env.lower, 0.0);
  EXPECT_LE(env.lower, env.upper);
  for (std::size_t n = 1; n <= 2000; ++n) {
    const double s = g.u[n] / std::sqrt(double(n));
    EXPECT_GE(s, env.lower - 1e-15);
    EXPECT_LE(s, env.upper + 1e-15);
  }
}

TEST(Geometry, ReturnCellsTileTheBase) {
  const auto g = compute_geometry(MapParams::from_gamma(0.7), 30);
  EXPECT_EQ(return_cell_offsets(g, 1).upper, 1.0);
  EXPECT_EQ(return_cell_offsets(g, 1).lower, 0.5);
  for (std::size_t n = 2; n <= 30; ++n) {
    EXPECT_EQ(return_cell_offsets(g, n).upper, return_cell_offsets(g, n - 1).lower);
  }
}

TEST(ReturnTime, DoublingExamples) {
  const auto p = MapParams::from_gamma(1.0);
  EXPECT_EQ(return_time(p, 0.8).return_time, 1u);
  EXPECT_EQ(return_time(p, 0.6).return_time, 3u);
  EXPECT_NEAR(return_time(p, 0.6).landing, 0.8, 1e-15);
}

TEST(ReturnTime, RejectsFixedPointAndOutsideBase) {
  const auto p = MapParams::from_gamma(0.5);
  EXPECT_THROW(return_time(p, 1.0), std::domain_error);
  EXPECT_THROW(return_time(p, 0.4), std::domain_error);
}

TEST(ReturnTime, AgreesWithCellsOfTheGeometry) {
  const auto p = MapParams::from_gamma(0.5);
  const auto g = compute_geometry(p, 40);
  for (std::size_t n = 1; n <= 30; ++n) {
    const auto cell = return_cell_offsets(g, n);
    const double s = 0.5 * (cell.lower + cell.upper);
    EXPECT_EQ(return_time_from_offset(p, s).return_time, n) << n;
  }
}

TEST(ReturnTime, FirstCellIsNonemptyForEveryGamma) {
  for (double gm : {0.2, 0.5, 0.9, 1.0}) {
    const auto p = MapParams::from_gamma(gm);
    EXPECT_EQ(return_time(p, 0.76).return_time, 1u);
    EXPECT_EQ(return_time(p, 0.99).return_time, 1u);
  }
}

TEST(InducedMap, ExpandsByAtLeastTwo) {
  const auto p = MapParams::from_gamma(0.5);
  const auto g = compute_geometry(p, 200);
  const auto rep = verify_induced_axioms(p, g, 3000, 5);
  EXPECT_TRUE(rep.expansion_ok);
  EXPECT_GE(rep.min_expansion, 2.0 - 1e-9);
  EXPECT_GT(rep.max_distortion, 0.0);
  EXPECT_TRUE(std::isfinite(rep.max_distortion));
}
