#include <gtest/gtest.h>

#include <algorithm>

#include "slowavg/error.hpp"
#include "slowavg/odometer.hpp"
#include "slowavg/tower.hpp"
#include "support.hpp"

using namespace slowavg;
using namespace testing_support;

namespace {

/// Levels by applying the interval image map i times to the base.
std::vector<IntervalSet> levels_by_image(const Tower& t) {
  std::vector<IntervalSet> out;
  IntervalSet cur = IntervalSet::single(dy("0"), t.width);
  for (std::uint64_t i = 1; i <= t.height; ++i) {
    cur = Odometer::image(cur);
    out.push_back(cur);
  }
  return out;
}

void expect_pairwise_disjoint(const std::vector<IntervalSet>& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      ASSERT_TRUE(set_intersection(levels[i], levels[j]).empty()) << i << " " << j;
    }
  }
}

}  // namespace

TEST(Tower, BuildExamples) {
  auto t1 = build_tower(1, rat("1/2"), 4);
  EXPECT_EQ(t1.width, dy("1/2"));
  EXPECT_EQ(t1.height, 1u);
  EXPECT_EQ(t1.measure(), Rational(1, 2));
  EXPECT_EQ(tower_interval_set(t1), iset("[1/2,1)"));

  auto t4 = build_tower(4, rat("1/4"), 6);
  EXPECT_EQ(t4.width, dy("1/16"));
  EXPECT_EQ(t4.rank_floor, 2u);
  EXPECT_EQ(t4.measure(), Rational(1, 4));
  auto levels = levels_by_image(t4);
  expect_pairwise_disjoint(levels);
  auto set = tower_interval_set(t4);
  EXPECT_EQ(set.size(), 4u);
  for (int q = 0; q < 4; ++q) {
    auto quarter = IntervalSet::single(Dyadic::from_u64(q, 2), Dyadic::from_u64(q + 1, 2));
    EXPECT_EQ(set_intersection(set, quarter).measure(), Rational(1, 16));
  }

  auto t10 = build_tower(1024, rat("1/16"), 14);
  EXPECT_EQ(t10.width, Dyadic::from_u64(1, 14));
  EXPECT_EQ(t10.measure(), Rational(1, 16));
  EXPECT_EQ(tower_interval_set(t10).measure(), Rational(1, 16));
}

TEST(Tower, LevelsMatchImageIteration) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<std::uint64_t> h(1, 200);
    const auto height = h(rng);
    const unsigned p = ceil_log2(height) + 8 + t % 6;
    auto tower = build_tower(height, frac(1 + t % 7, 16), p);
    auto levels = levels_by_image(tower);
    for (std::uint64_t i = 1; i <= height; ++i) ASSERT_EQ(tower_level(tower, i), levels[i - 1]);
    if (height <= 64) expect_pairwise_disjoint(levels);
    ASSERT_EQ(tower_interval_set(tower).measure(), tower.measure());
    ASSERT_EQ(tower.measure(), Rational(integer_from_u64(height)) * tower.width.to_rational());
  }
}

TEST(Tower, MeasureBoundsAndShortfall) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<std::uint64_t> h(1, 1 << 16);
    std::uniform_int_distribution<int> num(1, 999);
    const auto height = h(rng);
    const Rational eps(num(rng), 2000);
    const unsigned m = ceil_log2(height);
    const unsigned p = std::max(m, 20u) + t % 20;
    Tower tower;
    try {
      tower = build_tower(height, eps, p);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::PrecisionTooLow);
      continue;
    }
    ASSERT_LE(tower.measure(), eps);
    ASSERT_LT(eps - tower.measure(), Rational(integer_from_u64(height)) * pow2_rational(-static_cast<int>(p)));
    ASSERT_LE(tower.width.to_rational(), pow2_rational(-static_cast<int>(m)));
    ASSERT_GE((Integer(1) << m), integer_from_u64(height));
  }
}

TEST(Tower, Errors) {
  EXPECT_THROW(build_tower(1024, rat("1/16"), 9), Error);  // p < ceil(log2 h)
  try {
    build_tower(1024, frac(1, 1 << 20), 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PrecisionTooLow);
  }
  EXPECT_THROW(build_tower(4, Rational(0), 10), Error);
  EXPECT_THROW(build_tower(4, Rational(1), 10), Error);
}

TEST(TowerZn, BuildExamples) {
  auto a = build_tower_zn(1, rat("1/4"), 4, 2);
  EXPECT_EQ(a.width, dy("1/2"));
  EXPECT_EQ(a.measure(), Rational(1, 4));

  auto b = build_tower_zn(2, rat("1/4"), 6, 2);
  EXPECT_EQ(b.rank_floor, 1u);
  EXPECT_EQ(b.width, dy("1/4"));
  EXPECT_EQ(b.measure(), Rational(1, 4));
  // The h^2 = 4 levels T^z [0,1/4)^2, z in {1,2}^2, are pairwise disjoint.
  std::vector<BoxSet> levels;
  for (std::uint64_t i = 1; i <= 2; ++i) {
    for (std::uint64_t j = 1; j <= 2; ++j) {
      IntervalSet f[2] = {tower_level(build_tower(2, rat("1/2"), 6), i), tower_level(build_tower(2, rat("1/2"), 6), j)};
      levels.push_back(BoxSet::product(f));
    }
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = i + 1; j < levels.size(); ++j) ASSERT_TRUE(set_intersection(levels[i], levels[j]).empty());
  }
  EXPECT_EQ(tower_set(b).measure(), Rational(1, 4));
}

TEST(TowerZn, MeasureAtMostTarget) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<std::uint64_t> h(1, 150);
    const auto side = h(rng);
    const Rational eps(1 + t % 9, 20);
    auto tower = build_tower_zn(side, eps, 40, 2);
    ASSERT_LE(tower.measure(), eps);
    ASSERT_EQ(tower_set(tower).measure(), tower.measure());
    ASSERT_EQ(tower_cylinders(tower).measure(), tower.measure());
  }
}

TEST(Tower, CylindersAgreeWithIntervalSet) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 40; ++t) {
    std::uniform_int_distribution<std::uint64_t> h(1, 5000);
    const auto height = h(rng);
    auto tower = build_tower(height, frac(1 + t % 5, 12), 30);
    auto set = tower_interval_set(tower);
    auto cyl = tower_cylinders(tower);
    ASSERT_EQ(cyl.measure(), set.measure());
    for (int s = 0; s < 200; ++s) {
      auto x = random_point(rng, 30);
      std::uint64_t time = Odometer::address(x) - 1;
      ASSERT_EQ(cyl.contains_time(std::span<const std::uint64_t>(&time, 1)), set.contains(x));
    }
  }
}

TEST(Tower, SerializationAndValidation) {
  auto t = build_tower(1024, rat("1/16"), 14);
  EXPECT_EQ(t.to_string(), "tower(d=1/2^14, h=1024, m=10, n=1)");
  EXPECT_NO_THROW(validate_tower(t));
  Tower bad = t;
  bad.width = dy("1/2");
  EXPECT_THROW(validate_tower(bad), Error);
}
