#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "critbranch/stats.hpp"

using namespace critbranch;

TEST(Streams, DeterministicAndDistinct) {
  const StreamFamily a(42), b(42);
  Rng x = a.stream(7), y = b.stream(7), z = a.stream(8);
  for (int i = 0; i < 10; ++i) {
    const auto vx = x();
    EXPECT_EQ(vx, y());
    EXPECT_NE(vx, z());
  }
  EXPECT_NE(StreamFamily(1).seed_for(0), StreamFamily(2).seed_for(0));
  EXPECT_NE(a.child(1).seed_for(0), a.child(2).seed_for(0));
}

TEST(Streams, NeighbouringStreamsUncorrelated) {
  const StreamFamily f(3);
  const int n = 20000;
  for (std::uint64_t k = 0; k < 5; ++k) {
    Rng s = f.stream(k), t = f.stream(k + 1);
    double sxy = 0.0;
    for (int i = 0; i < n; ++i) sxy += (uniform01(s) - 0.5) * (uniform01(t) - 0.5);
    const double corr = sxy / n * 12.0;
    EXPECT_LT(std::abs(corr), 5.0 / std::sqrt(n));
  }
}

TEST(Ks, ConstantSampleAtMedian) {
  const std::vector<double> s(50, 0.0);
  EXPECT_NEAR(ks_statistic(s, [](double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }), 0.5, 1e-15);
}

TEST(Ks, SinglePoint) {
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  for (double q : {0.1, 0.5, 0.8}) {
    const std::vector<double> s{q};
    EXPECT_NEAR(ks_statistic(s, cdf), std::max(q, 1.0 - q), 1e-15);
  }
  EXPECT_THROW(ks_statistic(std::vector<double>{}, cdf), std::invalid_argument);
}

TEST(Ks, CalibratedAtOnePercent) {
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const std::size_t n = 10000;
  int passes = 0;
  const int trials = 200;
  const StreamFamily f(99);
  for (int t = 0; t < trials; ++t) {
    Rng rng = f.stream(static_cast<std::uint64_t>(t));
    std::vector<double> s(n);
    for (auto& x : s) x = uniform01(rng);
    passes += ks_statistic(s, cdf) < ks_critical_1pct(n);
  }
  EXPECT_GE(passes, 194);
}

TEST(Ks, EmpiricalSampleWithAtom) {
  EmpiricalSample s;
  s.values = {0.25, 0.75};
  s.atom_count = 2;
  // F = 0.5 atom at 0 plus uniform(0,1) scaled by 0.5
  const auto cdf = [](double x) { return x < 0 ? 0.0 : 0.5 + 0.5 * std::clamp(x, 0.0, 1.0); };
  EXPECT_NEAR(ks_statistic(s, cdf), 0.125, 1e-15);
}

TEST(Ks, TwoSample) {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
  EXPECT_EQ(ks_two_sample(a, b), 0.0);
  const std::vector<double> c{10, 11};
  EXPECT_EQ(ks_two_sample(a, c), 1.0);
}

TEST(ChiSquare, ProportionalObservationsGiveZero) {
  const std::vector<double> obs{250, 500, 250}, p{0.25, 0.5, 0.25};
  const auto r = chi_square(obs, p);
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_EQ(r.dof, 2);
}

TEST(ChiSquare, Errors) {
  EXPECT_THROW(chi_square(std::vector<double>{10}, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(chi_square(std::vector<double>{0, 0}, std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST(ChiSquare, PoolsSmallCategories) {
  // N = 100: expected counts 90, 6, 3, 1 -> 3 and 1 pool to 4, then absorb 6 -> 10
  const std::vector<double> obs{90, 6, 3, 1}, p{0.9, 0.06, 0.03, 0.01};
  const auto r = chi_square(obs, p);
  EXPECT_EQ(r.dof, 1);
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
}

TEST(ChiSquare, KnownStatistic) {
  const std::vector<double> obs{60, 40}, p{0.5, 0.5};
  const auto r = chi_square(obs, p);
  EXPECT_NEAR(r.statistic, 4.0, 1e-12);
  // P(chi2_1 > 4) = 2 (1 - Phi(2))
  const boost::math::normal_distribution<double> n01;
  EXPECT_NEAR(r.p_value, 2.0 * boost::math::cdf(boost::math::complement(n01, 2.0)), 1e-12);
}

TEST(Tv, Examples) {
  const std::vector<double> p{1, 0}, q{0, 1}, a{1.0 / 3, 2.0 / 3}, b{0.5, 0.5};
  EXPECT_EQ(tv_distance(p, p), 0.0);
  EXPECT_EQ(tv_distance(p, q), 1.0);
  EXPECT_NEAR(tv_distance(a, b), 1.0 / 6.0, 1e-15);
  EXPECT_THROW(tv_distance(std::vector<double>{0.5, 0.4}, b), std::invalid_argument);
}

TEST(MonteCarlo, ConstantAggregate) {
  const auto est = mc_mean([](std::size_t, Rng&) { return 3.5; }, 100, StreamFamily(1), 2);
  EXPECT_EQ(est.mean, 3.5);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_EQ(est.count, 100u);
}

TEST(MonteCarlo, ExponentialMean) {
  const auto est = mc_mean([](std::size_t, Rng& rng) { return -std::log1p(-uniform01(rng)); }, 100000,
                           StreamFamily(5));
  EXPECT_NEAR(est.mean, 1.0, 4.0 * est.std_error);
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResults) {
  auto task = [](std::size_t r, Rng& rng) { return static_cast<double>(r) + uniform01(rng); };
  const auto one = mc_collect(task, 5000, StreamFamily(17), 1);
  const auto four = mc_collect(task, 5000, StreamFamily(17), 4);
  EXPECT_EQ(one, four);
  const double s1 = mc_run(task, 5000, StreamFamily(17), 0.0, [](double a, double x) { return a + x; }, 1);
  const double s3 = mc_run(task, 5000, StreamFamily(17), 0.0, [](double a, double x) { return a + x; }, 3);
  EXPECT_EQ(s1, s3);
}

TEST(MonteCarlo, FailureCarriesLowestReplicateIndex) {
  auto task = [](std::size_t r, Rng&) -> double {
    if (r == 37 || r == 80) throw std::runtime_error("boom");
    return 0.0;
  };
  for (int workers : {1, 4}) {
    try {
      mc_collect(task, 100, StreamFamily(1), workers);
      FAIL();
    } catch (const ReplicateError& e) {
      EXPECT_EQ(e.replicate(), 37u);
    }
  }
}

TEST(Wilson, ContainsProportion) {
  const auto [lo, hi] = wilson_interval(30, 100);
  EXPECT_LT(lo, 0.3);
  EXPECT_GT(hi, 0.3);
  const auto [lo0, hi0] = wilson_interval(0, 100);
  EXPECT_EQ(lo0, 0.0);
  EXPECT_GT(hi0, 0.0);
}
