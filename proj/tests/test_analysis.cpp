#include <gtest/gtest.h>

#include <cmath>

#include "lsv/analysis.hpp"
#include "lsv/errors.hpp"
#include "lsv/model.hpp"

using namespace lsv;

namespace {

std::vector<RatePoint> synthetic(double a, double b, int lo, int hi) {
  std::vector<RatePoint> pts;
  for (int n = lo; n <= hi; ++n) pts.push_back({double(n), std::exp(-a * std::pow(double(n), b)), std::nullopt});
  return pts;
}

}  // namespace

TEST(Fit, SquareRootSynthetic) {
  const auto fit = fit_stretched_exponent(synthetic(2.0, 0.5, 10, 100));
  EXPECT_NEAR(fit.exponent, 0.5, 1e-12);
  EXPECT_NEAR(fit.log_prefactor, std::log(2.0), 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points_used, 91u);
  EXPECT_EQ(fit.n_min, 10.0);
  EXPECT_EQ(fit.n_max, 100.0);
}

TEST(Fit, ExponentialSynthetic) {
  EXPECT_NEAR(fit_stretched_exponent(synthetic(1.0, 1.0, 10, 300)).exponent, 1.0, 1e-12);
}

TEST(Fit, WindowDropsSmallNAndLowHits) {
  std::vector<RatePoint> pts = synthetic(1.0, 0.5, 1, 30);
  pts[20].hits = 5;
  pts[20].p = 0.999;  // would bias the fit if kept
  const auto fit = fit_stretched_exponent(pts);
  EXPECT_EQ(fit.points_used, 20u);
  EXPECT_NEAR(fit.exponent, 0.5, 1e-12);
}

TEST(Fit, InsufficientPoints) {
  EXPECT_THROW(fit_stretched_exponent(synthetic(1.0, 0.5, 10, 12)), InsufficientPointsError);
  std::vector<RatePoint> zero_hits;
  for (int n = 10; n <= 60; n += 10) zero_hits.push_back({double(n), 0.0, 0});
  EXPECT_THROW(fit_stretched_exponent(zero_hits), InsufficientPointsError);
}

TEST(Fit, RejectsDegenerateProbabilities) {
  auto pts = synthetic(1.0, 0.5, 10, 20);
  pts[3].p = 0.0;
  EXPECT_THROW(fit_stretched_exponent(pts), std::invalid_argument);
  pts[3].p = 1.0;
  EXPECT_THROW(fit_stretched_exponent(pts), std::invalid_argument);
}

TEST(Fit, ExactReturnTailForSquareRootMap) {
  const auto g = compute_geometry(MapParams::from_gamma(0.5), 400);
  std::vector<RatePoint> pts;
  for (std::size_t n = 10; n <= 400; ++n) pts.push_back({double(n), return_tail_exact(g, n), std::nullopt});
  const double e = fit_stretched_exponent(pts).exponent;
  EXPECT_GE(e, 0.4);
  EXPECT_LE(e, 0.6);
}

TEST(Fit, SubsamplingKeepsExponent) {
  for (double b : {0.3, 0.7, 1.2}) {
    auto all = synthetic(0.8, b, 10, 50);
    std::vector<RatePoint> half;
    for (std::size_t i = 0; i < all.size(); i += 2) half.push_back(all[i]);
    EXPECT_NEAR(fit_stretched_exponent(all).exponent, fit_stretched_exponent(half).exponent, 0.02);
  }
}

TEST(OptA, LowerBoundViolationIsFlagged) {
  const auto m = build_model(MapParams::from_gamma(0.5), 1024, 60, 1);
  const double nu = 0.39;
  std::vector<DeviationRecord> recs;
  for (std::size_t n = 10; n <= 40; n += 5) {
    const double nu_j = m.density.measure(kHalf, m.geometry.j_right(n));
    // Far below nu(J_n) with a tiny standard error.
    const std::uint64_t trials = 100'000'000;
    recs.push_back(make_record(n, n * nu / 2, trials, static_cast<std::uint64_t>(0.2 * nu_j * trials)));
  }
  const auto rep = check_thm_opt_a(m.params, m.geometry, m.density, nu, recs);
  EXPECT_FALSE(rep.lower_bound_ok);
  EXPECT_FALSE(rep.pass);
}

TEST(OptA, ExcludesShortOrbits) {
  const auto m = build_model(MapParams::from_gamma(0.5), 1024, 60, 1);
  std::vector<DeviationRecord> recs;
  for (std::size_t n = 2; n <= 40; n += 2) recs.push_back(make_record(n, 1.0, 1000, 500));
  const auto rep = check_thm_opt_a(m.params, m.geometry, m.density, 0.2, recs);
  EXPECT_EQ(rep.excluded, 5u);  // n <= 10
  EXPECT_EQ(rep.rows.size(), 15u);
}

TEST(OptB, ZeroHitsIsInsufficient) {
  const auto m = build_model(MapParams::from_gamma(0.5), 1024, 130, 1);
  std::vector<DeviationRecord> recs;
  for (std::size_t n = 10; n <= 120; n += 10) recs.push_back(make_record(n, double(n), 1000, 0));
  EXPECT_THROW(check_thm_opt_b(m.params, m.geometry, m.density, 1.5, recs, 1.0), InsufficientPointsError);
}

TEST(OptB, TargetExponent) {
  const auto m = build_model(MapParams::from_gamma(0.5), 1024, 130, 1);
  std::vector<DeviationRecord> recs;
  for (std::size_t n = 10; n <= 120; n += 10) {
    const double p = std::exp(-std::pow(double(n), 1.0 / 3.0));
    recs.push_back(make_record(n, double(n), 10'000'000, static_cast<std::uint64_t>(p * 1e7)));
  }
  const auto rep = check_thm_opt_b(m.params, m.geometry, m.density, 1.5, recs, 1.0);
  EXPECT_NEAR(rep.target_exponent, 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(rep.exponent_ok);
  EXPECT_NEAR(rep.fit.exponent, 1.0 / 3.0, 0.01);
}

TEST(Mdp, RejectsNonPositiveInputs) {
  std::vector<DeviationRecord> recs{make_record(10, 1.0, 100, 10)};
  std::vector<MdpQuery> q{{10, 0.5}};
  EXPECT_THROW(check_mdp(recs, q, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(check_mdp(recs, q, 0.25, 0.0), std::invalid_argument);
}

TEST(Mdp, StatusFromFinalRatio) {
  // a_n log p = -2 exactly at every n.
  std::vector<DeviationRecord> recs;
  std::vector<MdpQuery> q;
  for (std::size_t n : {16, 25, 36}) {
    const double a = 1.0 / std::sqrt(double(n));
    const std::uint64_t trials = 1'000'000'000;
    const double p = std::exp(-2.0 / a);
    recs.push_back(make_record(n, 1.0, trials, static_cast<std::uint64_t>(std::llround(p * trials))));
    q.push_back({n, a});
  }
  const auto rep = check_mdp(recs, q, 0.25, 1.0);
  EXPECT_DOUBLE_EQ(rep.target, -2.0);
  EXPECT_EQ(rep.status, MdpStatus::Pass);
  EXPECT_NEAR(rep.final_ratio, 1.0, 0.05);

  const auto far = check_mdp(recs, q, 0.05, 1.0);  // target -10
  EXPECT_EQ(far.status, MdpStatus::AsymptoticsNotReached);
  const auto none = check_mdp(recs, q, 0.25, 1.0, 1'000'000'000);
  EXPECT_EQ(none.status, MdpStatus::InsufficientData);
}

TEST(Concentration, AllCertainEventsAreInsufficient) {
  std::vector<DeviationRecord> recs;
  for (double t : {0.1, 0.2, 0.3, 0.4, 0.5}) recs.push_back(make_record(50, t, 1000, 1000));
  EXPECT_THROW(check_concentration(recs, 50, 2.0, 0.5), InsufficientPointsError);
}

TEST(Concentration, KappaBoundsEveryUsablePoint) {
  std::vector<DeviationRecord> recs;
  for (double t : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
    const double p = 2.0 * std::exp(-t * t / 8.0);
    recs.push_back(make_record(50, t, 1'000'000, static_cast<std::uint64_t>(std::min(p, 0.9) * 1e6)));
  }
  const auto rep = check_concentration(recs, 50, 0.1, 1.0);
  EXPECT_GT(rep.kappa_fit, 0.0);
  EXPECT_TRUE(std::isfinite(rep.kappa_fit));
  EXPECT_EQ(rep.violations, 0u);
  for (const auto& row : rep.rows) EXPECT_LE(row.p_hat, row.bound * (1 + 1e-12));
}

TEST(Concentration, DetectsBending) {
  // log(-log p) slope 2 at small t, 0.5 at large t.
  std::vector<DeviationRecord> recs;
  for (double t : {1.0, 1.2, 1.4, 1.6, 3.0, 6.0, 12.0, 24.0}) {
    const double e = t <= 1.6 ? 0.1 * t * t : 0.1 * 1.6 * 1.6 * std::sqrt(t / 1.6);
    recs.push_back(make_record(50, t, 100'000'000, static_cast<std::uint64_t>(std::exp(-e) * 1e8)));
  }
  const auto rep = check_concentration(recs, 50, 1.0, 0.5);
  EXPECT_TRUE(rep.bending);
  EXPECT_TRUE(rep.shape_ok);
  EXPECT_FALSE(check_concentration(recs, 50, 1.0, 1.0).shape_ok);
}
