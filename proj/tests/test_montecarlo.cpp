#include <gtest/gtest.h>

#include <cmath>

#include "lsv/errors.hpp"
#include "lsv/model.hpp"
#include "lsv/montecarlo.hpp"

using namespace lsv;

namespace {

const Model& half() {
  static const Model m = build_model(MapParams::from_gamma(0.5), 2048, 4, 2);
  return m;
}

const Model& doubling() {
  static const Model m = build_model(MapParams::from_gamma(1.0), 1024, 60, 2);
  return m;
}

SimulationConfig config(const MapParams& p, std::uint64_t trials, unsigned threads = 1) {
  SimulationConfig c;
  c.params = p;
  c.trials = trials;
  c.seed = 99;
  c.threads = threads;
  c.batch_size = 10000;
  return c;
}

}  // namespace

TEST(Wilson, KnownInterval) {
  const auto r = make_record(1, 1.0, 100, 50);
  EXPECT_DOUBLE_EQ(r.p_hat, 0.5);
  EXPECT_NEAR(r.ci_low, 0.40383153, 1e-7);
  EXPECT_NEAR(r.ci_high, 0.59616847, 1e-7);
}

TEST(Wilson, EdgeCountsStayInUnitInterval) {
  const auto zero = make_record(1, 1.0, 1000, 0);
  EXPECT_EQ(zero.ci_low, 0.0);
  EXPECT_GT(zero.ci_high, 0.0);
  EXPECT_LT(zero.ci_high, 0.01);
  const auto all = make_record(1, 1.0, 1000, 1000);
  EXPECT_EQ(all.ci_high, 1.0);
  EXPECT_LT(all.ci_low, 1.0);
  EXPECT_THROW(make_record(1, 1.0, 10, 11), std::invalid_argument);
}

TEST(Wilson, ContainsEstimateAndShrinks) {
  for (std::uint64_t h : {1u, 7u, 50u, 93u}) {
    const auto small = make_record(1, 1.0, 100, h);
    const auto big = make_record(1, 1.0, 10000, h * 100);
    EXPECT_LE(small.ci_low, small.p_hat);
    EXPECT_GE(small.ci_high, small.p_hat);
    EXPECT_LT(big.ci_high - big.ci_low, small.ci_high - small.ci_low);
  }
}

TEST(SimulationConfig, BatchesCoverTrials) {
  auto c = config(MapParams::from_gamma(0.5), 25001);
  EXPECT_EQ(c.num_batches(), 3u);
  EXPECT_EQ(c.batch_trials(0) + c.batch_trials(1) + c.batch_trials(2), 25001u);
}

TEST(SimulationConfig, RejectsUnusableCombinations) {
  auto c = config(MapParams::from_gamma(1.0), 100);
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.trials = 100;
  c.sampling = Sampling::LebesgueWithBurnIn;
  c.burn_in = 60;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Deviation, RejectsNonPositiveThreshold) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  EXPECT_THROW(deviation_cell(config(m.params, 100), &m.density, f, 10, 0.0, DeviationMode::Absolute), ConfigError);
}

TEST(Deviation, RequiresAttachedMean) {
  const auto& m = half();
  EXPECT_THROW(deviation_cell(config(m.params, 100), &m.density, Observable::item_a(m.geometry), 10, 1.0,
                              DeviationMode::Absolute),
               ConfigError);
}

TEST(Mdp, RejectsBadLevelOrSpeed) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  const auto c = config(m.params, 100);
  EXPECT_THROW(mdp_cell(c, &m.density, f, 10, 0.5, 0.0), ConfigError);
  EXPECT_THROW(mdp_cell(c, &m.density, f, 10, 1.5, 1.0), ConfigError);
}

TEST(Determinism, RecordsIndependentOfThreads) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  std::vector<DeviationQuery> q{{10, 1.0}, {20, 2.0}, {40, 3.0}};
  const auto a = deviation_grid(config(m.params, 55555, 1), &m.density, f, q, DeviationMode::Absolute);
  const auto b = deviation_grid(config(m.params, 55555, 4), &m.density, f, q, DeviationMode::Absolute);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(a[i].hits, b[i].hits);
}

TEST(Deviation, GridMatchesSingleCells) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  const auto c = config(m.params, 20000);
  std::vector<DeviationQuery> q{{15, 1.5}, {15, 2.5}};
  const auto grid = deviation_grid(c, &m.density, f, q, DeviationMode::Absolute);
  EXPECT_EQ(grid[0].hits, deviation_cell(c, &m.density, f, 15, 1.5, DeviationMode::Absolute).hits);
  EXPECT_GE(grid[0].hits, grid[1].hits);
}

TEST(Deviation, ModesAreNested) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  const auto c = config(m.params, 20000);
  const auto one = deviation_cell(c, &m.density, f, 20, 2.0, DeviationMode::OneSided);
  const auto abs = deviation_cell(c, &m.density, f, 20, 2.0, DeviationMode::Absolute);
  const auto run = deviation_cell(c, &m.density, f, 20, 2.0, DeviationMode::RunningMax);
  EXPECT_LE(one.hits, abs.hits);
  EXPECT_LE(abs.hits, run.hits);
}

TEST(BirkhoffSum, DoublingOrbitByHand) {
  const auto& m = doubling();
  const auto f = Observable::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}}).with_nu_mean(0.5);
  // 0.3 -> 0.6 -> 0.2 -> 0.4
  EXPECT_NEAR(birkhoff_sum(m.params, f, 0.3, 4), 0.3 + 0.6 + 0.2 + 0.4 - 2.0, 1e-15);
  EXPECT_THROW(birkhoff_sum(m.params, f, 0.5, 3), OrbitError);
  EXPECT_THROW(birkhoff_sum(m.params, f, 1.2, 3), std::domain_error);
}

TEST(StationarySampler, DrawsFollowTheDensity) {
  const auto& m = half();
  const auto c = config(m.params, 1);
  StationarySampler s(c, &m.density);
  RngStream rng(5, 0, 0);
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) below += s.draw(rng) <= 0.1 ? 1 : 0;
  const double expect = m.density.mass_below(0.1);
  EXPECT_NEAR(double(below) / n, expect, 5.0 * std::sqrt(expect * (1 - expect) / n));
}

TEST(ReturnTail, DoublingEmpiricalMatchesExact) {
  const auto& m = doubling();
  const auto r = empirical_return_tail(config(m.params, 400000), 12);
  ASSERT_EQ(r.size(), 12u);
  for (const auto& rec : r) {
    const double exact = return_tail_exact(m.geometry, rec.n);
    const double se = std::sqrt(exact * (1 - exact) / 400000.0);
    EXPECT_NEAR(rec.p_hat, exact, 4.0 * se + 1e-15) << rec.n;
  }
}

TEST(Concentration, QuantileGridIsSortedAndDecreasing) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  const std::vector<double> probs{0.3, 0.1, 0.01};
  const auto res = concentration_quantile_grid(config(m.params, 50000), &m.density, f, 30, probs);
  ASSERT_GE(res.records.size(), 2u);
  EXPECT_GT(res.expected_k, 0.0);
  EXPECT_DOUBLE_EQ(res.lipschitz, *f.lipschitz_constant());
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    EXPECT_GT(res.records[i].threshold, res.records[i - 1].threshold);
    EXPECT_LE(res.records[i].hits, res.records[i - 1].hits);
  }
}

TEST(Concentration, RejectsNonLipschitzObservable) {
  const auto& m = half();
  const auto f = attach_nu_mean(Observable::log_power(1.0), m.density);
  EXPECT_THROW(concentration_cell(config(m.params, 100), &m.density, f, 10, 1.0), ConfigError);
}

TEST(OrbitHistogram, MassesSumToOne) {
  const auto& m = half();
  const auto h = orbit_histogram(m.params, m.grid, 4, 20000, 100, 3, 2);
  double s = 0.0;
  for (double v : h.mass) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(h.samples, 80000u);
}
