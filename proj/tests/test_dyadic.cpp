#include <gtest/gtest.h>

#include "slowavg/error.hpp"
#include "support.hpp"

using namespace slowavg;
using namespace testing_support;

TEST(Dyadic, CanonicalForm) {
  Dyadic a(Integer(6), 3);
  EXPECT_EQ(a.numerator(), 3);
  EXPECT_EQ(a.exponent(), 2u);
  EXPECT_EQ(Dyadic(Integer(0), 9).exponent(), 0u);
  EXPECT_EQ(a.to_string(), "3/2^2");
  EXPECT_EQ(Dyadic::parse("3/2^4").to_rational(), Rational(3, 16));
  EXPECT_EQ(Dyadic::parse("12/16"), a);
  EXPECT_THROW(Dyadic::parse("1/3"), Error);
}

TEST(Dyadic, RankCap) {
  EXPECT_NO_THROW(Dyadic(Integer(1), 64));
  try {
    Dyadic(Integer(1), 65);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankCapExceeded);
  }
}

TEST(IntervalSetOps, UnionExamples) {
  EXPECT_EQ(set_union(iset("[0,1/4)"), iset("[1/4,1/2)")), iset("[0,1/2)"));
  EXPECT_EQ(set_union(iset("[0,1/2)"), iset("[0,1/2)")), iset("[0,1/2)"));
  auto u = set_union(iset("[0,1/8)"), iset("[1/4,3/8)"));
  EXPECT_EQ(u.size(), 2u);
  EXPECT_EQ(u.measure(), Rational(1, 4));
  std::vector<bool> want(8, false);
  want[0] = want[2] = true;
  EXPECT_EQ(rasterize(u, 3), want);
}

TEST(IntervalSetOps, ComplementExamples) {
  EXPECT_EQ(set_complement(IntervalSet{}), IntervalSet::full());
  EXPECT_EQ(set_complement(iset("[0,1/2)")), iset("[1/2,1)"));
  auto c = set_complement(iset("{[1/8,1/4),[1/2,3/4)}"));
  EXPECT_EQ(c, iset("{[0,1/8),[1/4,1/2),[3/4,1)}"));
  EXPECT_EQ(c.measure(), Rational(5, 8));
  EXPECT_EQ(rasterize(c, 3), (std::vector<bool>{1, 0, 1, 1, 0, 0, 1, 1}));
}

TEST(IntervalSetOps, MeasureExamples) {
  EXPECT_EQ(IntervalSet::full().measure(), 1);
  BoxSet b(2, {Box{DyadicInterval(dy("0"), dy("1/4")), DyadicInterval(dy("0"), dy("1/2"))}});
  EXPECT_EQ(b.measure(), Rational(1, 8));
}

TEST(IntervalSetOps, SerializationRoundTrip) {
  auto a = iset("{[1/8,1/4),[1/2,3/4)}");
  EXPECT_EQ(a.to_string(), "{[1/2^3,1/2^2),[1/2^1,3/2^2)}");
  EXPECT_EQ(IntervalSet::parse(a.to_string()), a);
  EXPECT_TRUE(IntervalSet::parse("{}").empty());
}

TEST(IntervalSetOps, RasterizationOracleRank3) {
  // Every pair of rank-3 sets: 256 x 256 bit-vector comparisons.
  auto from_mask = [](unsigned mask) {
    std::vector<DyadicInterval> parts;
    for (unsigned j = 0; j < 8; ++j) {
      if (mask >> j & 1) parts.emplace_back(Dyadic::from_u64(j, 3), Dyadic::from_u64(j + 1, 3));
    }
    return IntervalSet(std::move(parts));
  };
  auto bits = [](unsigned mask) {
    std::vector<bool> b(8);
    for (unsigned j = 0; j < 8; ++j) b[j] = mask >> j & 1;
    return b;
  };
  for (unsigned x = 0; x < 256; ++x) {
    const auto a = from_mask(x);
    ASSERT_EQ(rasterize(set_complement(a), 3), bits(~x & 255));
    ASSERT_EQ(a.measure(), Rational(__builtin_popcount(x)) / 8);
    for (unsigned y = 0; y < 256; ++y) {
      const auto b = from_mask(y);
      ASSERT_EQ(rasterize(set_union(a, b), 3), bits(x | y));
      ASSERT_EQ(rasterize(set_intersection(a, b), 3), bits(x & y));
      ASSERT_EQ(rasterize(set_difference(a, b), 3), bits(x & ~y & 255));
    }
  }
}

TEST(IntervalSetOps, CanonicalMerging) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    auto a = random_set(rng, 6);
    for (std::size_t i = 1; i < a.intervals().size(); ++i) {
      ASSERT_LT(a.intervals()[i - 1].hi, a.intervals()[i].lo);
    }
  }
}

TEST(IntervalSetOps, AlgebraLaws) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    auto a = random_set(rng, 20), b = random_set(rng, 20), c = random_set(rng, 20);
    ASSERT_EQ(set_union(a, b), set_union(b, a));
    ASSERT_EQ(set_union(set_union(a, b), c), set_union(a, set_union(b, c)));
    ASSERT_EQ(set_union(a, a), a);
    ASSERT_EQ(a.measure() + set_complement(a).measure(), 1);
    ASSERT_TRUE(set_intersection(a, set_complement(a)).empty());
    ASSERT_LE(set_union(a, b).measure(), a.measure() + b.measure());
    if (set_intersection(a, b).empty()) {
      ASSERT_EQ(set_union(a, b).measure(), a.measure() + b.measure());
    }
    ASSERT_EQ(set_union(set_difference(a, b), set_intersection(a, b)), a);
  }
}

TEST(IntervalSetOps, RasterizationOracleRandomRank10) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto a = random_set(rng, 10, 0.3), b = random_set(rng, 10, 0.6);
    auto ra = rasterize(a, 10), rb = rasterize(b, 10);
    std::vector<bool> u(ra.size()), i(ra.size()), d(ra.size());
    for (std::size_t j = 0; j < ra.size(); ++j) {
      u[j] = ra[j] || rb[j];
      i[j] = ra[j] && rb[j];
      d[j] = ra[j] && !rb[j];
    }
    ASSERT_EQ(rasterize(set_union(a, b), 10), u);
    ASSERT_EQ(rasterize(set_intersection(a, b), 10), i);
    ASSERT_EQ(rasterize(set_difference(a, b), 10), d);
  }
}

TEST(BoxSetOps, ComplementAndProduct) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    IntervalSet f[2] = {random_set(rng, 4), random_set(rng, 4)};
    auto p = BoxSet::product(f);
    ASSERT_EQ(p.measure(), f[0].measure() * f[1].measure());
    auto c = set_complement(p);
    ASSERT_EQ(p.measure() + c.measure(), 1);
    ASSERT_TRUE(set_intersection(p, c).empty());
    ASSERT_EQ(set_union(p, c).measure(), 1);
  }
}

TEST(StepFunctions, IntegralExamples) {
  EXPECT_EQ(integral(StepFunction::constant(Rational(2)), IntervalSet::full()), 2);
  auto ind = StepFunction::indicator(iset("[0,1/2)"));
  EXPECT_EQ(integral(ind, iset("[1/4,3/4)")), Rational(1, 4));
  // Complement of a measure-1/16 set: a tower of height 2^10 over [0,2^-14).
  auto tower_like = IntervalSet::single(dy("0"), dy("1/16"));
  EXPECT_EQ(integral(StepFunction::constant(Rational(1)), set_complement(tower_like)), Rational(15, 16));
}

TEST(StepFunctions, RestrictExamples) {
  auto ind = StepFunction::indicator(iset("[0,1/2)"));
  auto r = restrict(ind, IntervalSet::full());
  for (int j = 0; j < 8; ++j) {
    auto x = Dyadic::from_u64(j, 3);
    EXPECT_EQ(r.value_at(x), ind.value_at(x));
  }
  auto z = restrict(ind, IntervalSet{});
  EXPECT_EQ(integral(z), 0);
  EXPECT_EQ(z.max_value(), 0);
  auto s = restrict(ind, iset("[1/4,1)"));
  auto want = StepFunction::indicator(iset("[1/4,1/2)"));
  for (int j = 0; j < 16; ++j) {
    auto x = Dyadic::from_u64(j, 4);
    EXPECT_EQ(s.value_at(x), want.value_at(x));
  }
}

TEST(StepFunctions, RestrictIntegralIdentity) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    auto f = random_step(rng, 5);
    auto c = random_set(rng, 8);
    ASSERT_EQ(integral(restrict(f, c)), integral(f, c));
  }
}

TEST(StepFunctions, RejectsNegativeAndOverlap) {
  EXPECT_THROW(StepFunction::constant(Rational(-1)), Error);
  std::vector<StepFunction::Piece> overlap = {{BoxSet::from_intervals(iset("[0,1/2)")), Rational(1)},
                                              {BoxSet::from_intervals(iset("[1/4,1)")), Rational(1)}};
  EXPECT_THROW(StepFunction(1, overlap), Error);
}

TEST(AlignedCells, CoverIntervalExactly) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    auto a = random_point(rng, 12), b = random_point(rng, 12);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    DyadicInterval iv(a, b);
    Rational total(0);
    Dyadic cursor = a;
    for (const auto& c : aligned_cells(iv)) {
      ASSERT_EQ(Dyadic::from_u64(c.index, c.level), cursor);
      cursor = Dyadic::from_u64(c.index + 1, c.level);
      total += pow2_rational(-static_cast<int>(c.level));
    }
    ASSERT_EQ(cursor, b);
    ASSERT_EQ(total, (b - a).to_rational());
  }
}
