#include <gtest/gtest.h>

#include <cmath>

#include "slowavg/birkhoff.hpp"
#include "slowavg/error.hpp"
#include "slowavg/odometer.hpp"
#include "support.hpp"

using namespace slowavg;
using namespace testing_support;

namespace {

Rational kernel_average(const StepFunction& f, const Dyadic& x, std::uint64_t n) {
  const std::uint64_t a = Odometer::address(x);
  return OrbitKernel(f).average(std::span<const std::uint64_t>(&a, 1), n);
}

/// Deviation set by testing the left endpoint of every rank-r cell with the
/// reference orbit walk.
std::vector<bool> brute_deviation(const StepFunction& f, std::uint64_t n, const Rational& c, const Rational& thr,
                                  unsigned r) {
  std::vector<bool> out(std::size_t{1} << r);
  for (std::uint64_t j = 0; j < out.size(); ++j) {
    out[j] = abs(birkhoff_average(Dyadic::from_u64(j, r), n, f) - c) > thr;
  }
  return out;
}

}  // namespace

TEST(Birkhoff, AverageExamples) {
  auto one = StepFunction::constant(Rational(1));
  for (int n = 1; n < 20; ++n) EXPECT_EQ(birkhoff_average(dy("3/8"), n, one), 1);
  auto half = StepFunction::indicator(iset("[0,1/2)"));
  EXPECT_EQ(birkhoff_average(dy("0"), 2, half), Rational(1, 2));
  auto quarter = StepFunction::indicator(iset("[0,1/4)"));
  EXPECT_EQ(birkhoff_average(dy("5/8"), 4, quarter), Rational(1, 4));
  EXPECT_THROW(birkhoff_average(dy("0"), 0, one), Error);
}

TEST(Birkhoff, ZnExamples) {
  Point o{dy("0"), dy("0")};
  EXPECT_EQ(birkhoff_average_zn(o, 5, StepFunction::constant(Rational(3), 2)), 3);
  BoxSet region(2, {Box{DyadicInterval(dy("0"), dy("1/2")), DyadicInterval(dy("0"), dy("1"))}});
  EXPECT_EQ(birkhoff_average_zn(o, 2, StepFunction::indicator(region)), Rational(1, 2));
  EXPECT_THROW(birkhoff_average_zn(o, 5000, StepFunction::constant(Rational(1), 2), 1000), Error);
}

TEST(Birkhoff, ExactCycleIdentity) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 60; ++t) {
    const unsigned m = 1 + t % 8;
    auto f = random_step(rng, m);
    const auto x = random_point(rng, 40);
    ASSERT_EQ(birkhoff_average(x, std::uint64_t{1} << m, f), integral(f));
    ASSERT_EQ(kernel_average(f, x, std::uint64_t{1} << m), integral(f));
  }
  for (int t = 0; t < 10; ++t) {
    const unsigned m = 1 + t % 3;
    auto f = random_step_2d(rng, m);
    Point x{random_point(rng, 30), random_point(rng, 30)};
    ASSERT_EQ(birkhoff_average_zn(x, std::uint64_t{1} << m, f), integral(f));
  }
}

TEST(Birkhoff, KernelMatchesOrbitWalk) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::uint64_t> steps(1, 300);
  for (int t = 0; t < 200; ++t) {
    auto f = random_step(rng, 1 + t % 9);
    const auto x = random_point(rng, 1 + t % 50);
    const auto n = steps(rng);
    const auto ref = birkhoff_average(x, n, f);
    ASSERT_EQ(kernel_average(f, x, n), ref);
    ASSERT_GE(ref, f.min_value());
    ASSERT_LE(ref, f.max_value());
  }
}

TEST(Birkhoff, KernelMatchesLatticeWalk) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 30; ++t) {
    auto f = random_step_2d(rng, 1 + t % 3);
    Point x{random_point(rng, 20), random_point(rng, 20)};
    const std::uint64_t n = 1 + t % 13;
    std::uint64_t a[2] = {Odometer::address(x[0]), Odometer::address(x[1])};
    ASSERT_EQ(OrbitKernel(f).average(a, n), birkhoff_average_zn(x, n, f));
  }
}

TEST(Birkhoff, KernelHugeWindowUsesPeriodicity) {
  // Rank-m f: A(x, q 2^m + r) = (q 2^m int f + window of r) / N.
  std::mt19937_64 rng(34);
  auto f = random_step(rng, 6);
  const auto x = random_point(rng, 20);
  const std::uint64_t r = 37, q = 1'000'000'007ULL;
  const std::uint64_t n = (q << 6) + r;
  const Rational expect = (Rational(integer_from_u64(q << 6)) * integral(f) +
                           birkhoff_average(x, r, f) * Rational(integer_from_u64(r))) /
                          Rational(integer_from_u64(n));
  EXPECT_EQ(kernel_average(f, x, n), expect);
}

TEST(DeviationExact, Examples) {
  auto one = StepFunction::constant(Rational(1));
  EXPECT_TRUE(deviation_set_exact(10, one, Rational(1), Rational(1, 10)).empty());
  auto half = StepFunction::indicator(iset("[0,1/2)"));
  EXPECT_TRUE(deviation_set_exact(2, half, Rational(1, 2), Rational(2, 5)).empty());
  EXPECT_EQ(deviation_set_exact(1, half, Rational(1, 2), Rational(2, 5)), IntervalSet::full());
  EXPECT_THROW(deviation_set_exact(5000, half, Rational(1, 2), Rational(2, 5)), Error);
}

TEST(DeviationExact, MatchesBruteForce) {
  std::mt19937_64 rng(35);
  std::uniform_int_distribution<std::uint64_t> steps(1, 40);
  for (int t = 0; t < 40; ++t) {
    const unsigned m = 1 + t % 6;
    auto f = random_step(rng, m);
    const auto n = steps(rng);
    const Rational c = integral(f);
    const Rational thr(t % 5, 10);
    auto set = deviation_set_exact(n, f, c, thr);
    auto brute = brute_deviation(f, n, c, thr, m);
    ASSERT_EQ(rasterize(set, m), brute);
    auto est = deviation_exact(n, OrbitKernel(f), c, thr);
    ASSERT_EQ(est.probability, set.measure());
    ASSERT_EQ(est.method, EstimateMethod::Exact);
    ASSERT_EQ(est.confidence_radius, 0.0);
    auto below = deviation_exact(n, OrbitKernel(f), c, thr, {}, Comparison::BelowStrict);
    ASSERT_LE(below.probability + est.probability, 1);
  }
}

TEST(MonteCarlo, Examples) {
  MonteCarloSettings mc;
  mc.samples = 2000;
  auto one = StepFunction::constant(Rational(1));
  EXPECT_EQ(deviation_prob_mc(17, one, Rational(1), Rational(1, 100), mc).probability, 0);
  auto half = StepFunction::indicator(iset("[0,1/2)"));
  for (std::uint64_t seed : {1, 2, 99}) {
    mc.seed = seed;
    EXPECT_EQ(deviation_prob_mc(2, half, Rational(1, 2), Rational(2, 5), mc).probability, 0);
  }
}

TEST(MonteCarlo, HoeffdingRadius) {
  EXPECT_NEAR(hoeffding_radius(10000, Rational(1, 100)), std::sqrt(std::log(200.0) / 20000.0), 1e-15);
  EXPECT_NEAR(hoeffding_radius(1000, Rational(1, 100)) / hoeffding_radius(2000, Rational(1, 100)), std::sqrt(2.0),
              1e-12);
}

TEST(MonteCarlo, DeterministicAcrossWorkers) {
  std::mt19937_64 rng(36);
  auto f = random_step(rng, 7);
  MonteCarloSettings mc;
  mc.samples = 3000;
  mc.seed = 42;
  mc.workers = 1;
  auto a = deviation_prob_mc(50, f, integral(f), Rational(1, 20), mc);
  mc.workers = 7;
  auto b = deviation_prob_mc(50, f, integral(f), Rational(1, 20), mc);
  EXPECT_EQ(a.probability, b.probability);
  EXPECT_EQ(a.sample_count, 3000u);
  EXPECT_EQ(a.seed, 42u);
}

TEST(MonteCarlo, SamplesAreTruncatedDyadics) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto p = sample_point(5, i, 53, 2);
    ASSERT_EQ(p.size(), 2u);
    for (const auto& x : p) {
      ASSERT_LE(x.rank(), 53u);
      ASSERT_LT(x, dy("1"));
    }
  }
  EXPECT_EQ(sample_point(5, 3, 53, 1), sample_point(5, 3, 53, 1));
  EXPECT_NE(sample_point(5, 3, 53, 1), sample_point(6, 3, 53, 1));
}

TEST(MonteCarlo, AgreesWithExact) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::uint64_t> steps(1, 256);
  int agree = 0;
  for (int t = 0; t < 10; ++t) {
    auto f = random_step(rng, 2 + t % 8);
    const auto n = steps(rng);
    const Rational thr(1 + t % 4, 40);
    auto exact = deviation_set_exact(n, f, integral(f), thr).measure();
    MonteCarloSettings mc;
    mc.seed = 1000 + t;
    auto est = deviation_prob_mc(n, f, integral(f), thr, mc);
    if (std::abs(est.probability.get_d() - exact.get_d()) <= est.confidence_radius) ++agree;
  }
  EXPECT_GE(agree, 9);
}

TEST(MonteCarlo, EarlyStopIsConsistent) {
  std::mt19937_64 rng(38);
  auto f = random_step(rng, 5);
  MonteCarloSettings mc;
  mc.samples = 1000;
  auto full = count_samples(9, OrbitKernel(f), integral(f), Rational(1, 10), Comparison::Above, mc);
  ASSERT_TRUE(full.has_value());
  const std::uint64_t misses = 1000 - *full;
  EXPECT_FALSE(count_samples(9, OrbitKernel(f), integral(f), Rational(1, 10), Comparison::Above, mc, misses)
                   .has_value());
  EXPECT_EQ(count_samples(9, OrbitKernel(f), integral(f), Rational(1, 10), Comparison::Above, mc, misses + 1), full);
  EXPECT_FALSE(count_samples(9, OrbitKernel(f), integral(f), Rational(1, 10), Comparison::Above, mc, 0).has_value());
}
