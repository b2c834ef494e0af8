#include "slowavg/tower.hpp"

#include "slowavg/odometer.hpp"

namespace slowavg {

unsigned ceil_log2(std::uint64_t h) {
  if (h <= 1) return 0;
  return 64 - static_cast<unsigned>(__builtin_clzll(h - 1));
}

Rational Tower::measure() const {
  Rational side = width.to_rational() * Rational(integer_from_u64(height));
  Rational m(1);
  for (std::size_t j = 0; j < dimension; ++j) m *= side;
  return m;
}

std::string Tower::to_string() const {
  return "tower(d=" + width.to_string() + ", h=" + std::to_string(height) + ", m=" + std::to_string(rank_floor) +
         ", n=" + std::to_string(dimension) + ")";
}

namespace {

void check_build_args(std::uint64_t h, const Rational& eps, unsigned precision) {
  if (h == 0) throw Error(ErrorKind::InvalidArgument, "tower height must be >= 1");
  if (!(eps > 0 && eps < 1)) throw Error(ErrorKind::InvalidArgument, "target measure must lie in (0,1)");
  if (precision > kRankCap) throw Error(ErrorKind::RankCapExceeded, "precision above rank cap");
  if (precision < ceil_log2(h)) {
    throw Error(ErrorKind::PrecisionTooLow, "precision " + std::to_string(precision) + " below ceil(log2 h) = " +
                                                std::to_string(ceil_log2(h)));
  }
}

/// (D h / 2^p)^n <= eps
bool fits(const Integer& d_num, std::uint64_t h, unsigned p, std::size_t n, const Rational& eps) {
  Rational side(d_num * integer_from_u64(h));
  side /= Rational(pow2_rational(static_cast<int>(p)));
  Rational m(1);
  for (std::size_t j = 0; j < n; ++j) m *= side;
  return m <= eps;
}

Tower build(std::uint64_t h, const Rational& eps, unsigned p, std::size_t n) {
  check_build_args(h, eps, p);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  const unsigned m = ceil_log2(h);
  // Largest D in [0, 2^(p-m)] with (D h 2^-p)^n <= eps.
  Integer lo(0), hi(1);
  mpz_mul_2exp(hi.get_mpz_t(), hi.get_mpz_t(), p - m);
  if (!fits(hi, h, p, n, eps)) {
    while (hi - lo > 1) {
      Integer mid = (lo + hi) / 2;
      if (fits(mid, h, p, n, eps)) lo = mid; else hi = mid;
    }
  } else {
    lo = hi;
  }
  if (lo == 0) {
    throw Error(ErrorKind::PrecisionTooLow, "target measure too small for precision " + std::to_string(p));
  }
  return Tower{Dyadic(lo, p), h, m, n};
}

}  // namespace

Tower build_tower(std::uint64_t height, const Rational& target_measure, unsigned precision) {
  return build(height, target_measure, precision, 1);
}

Tower build_tower_zn(std::uint64_t side, const Rational& target_measure, unsigned precision, std::size_t dimension) {
  return build(side, target_measure, precision, dimension);
}

void validate_tower(const Tower& t) {
  if (t.height == 0 || t.dimension == 0) throw Error(ErrorKind::InvalidArgument, "degenerate tower");
  if (t.rank_floor != ceil_log2(t.height)) throw Error(ErrorKind::InvalidArgument, "rank_floor != ceil(log2 h)");
  if (!(Dyadic() < t.width) || Dyadic(1, t.rank_floor) < t.width) {
    throw Error(ErrorKind::InvalidArgument, "tower width must lie in (0, 2^-m]");
  }
}

namespace {

/// T^i([0,d)) for 1 <= i <= h. For i < 2^m only digits 1..m move, so the
/// level is a translate by T^i(0); for i = 2^m the carry reaches digit m+1
/// and the level is 2^-m T([0, d 2^m)).
void append_level(const Tower& t, std::uint64_t i, std::vector<DyadicInterval>& out) {
  if (t.rank_floor == 64 || i < (std::uint64_t{1} << t.rank_floor)) {
    Dyadic shift = Odometer::point_at(i);
    out.emplace_back(shift, shift + t.width);
    return;
  }
  const unsigned m = t.rank_floor;
  Dyadic stretched(t.width.numerator(), t.width.exponent() - m);
  const IntervalSet top = Odometer::image(IntervalSet::single(Dyadic(), stretched));
  for (const auto& iv : top.intervals()) {
    out.emplace_back(Dyadic(iv.lo.numerator(), iv.lo.exponent() + m), Dyadic(iv.hi.numerator(), iv.hi.exponent() + m));
  }
}

}  // namespace

IntervalSet tower_level(const Tower& t, std::uint64_t i) {
  validate_tower(t);
  if (i == 0 || i > t.height) throw Error(ErrorKind::InvalidArgument, "level index out of range");
  std::vector<DyadicInterval> parts;
  append_level(t, i, parts);
  return IntervalSet(std::move(parts));
}

IntervalSet tower_interval_set(const Tower& t) {
  validate_tower(t);
  if (t.height > kMaxMaterializedLevels) {
    throw Error(ErrorKind::MaterializationLimit, "tower with " + std::to_string(t.height) + " levels");
  }
  std::vector<DyadicInterval> parts;
  parts.reserve(t.height + 2);
  for (std::uint64_t i = 1; i <= t.height; ++i) append_level(t, i, parts);
  return IntervalSet(std::move(parts));
}

BoxSet tower_set(const Tower& t) {
  Tower one_d = t;
  one_d.dimension = 1;
  auto factor = tower_interval_set(one_d);
  std::vector<IntervalSet> factors(t.dimension, factor);
  return BoxSet::product(factors);
}

CylinderUnion tower_cylinders(const Tower& t) {
  validate_tower(t);
  const unsigned m = t.rank_floor;
  const unsigned r = std::max(m, t.width.rank());
  const unsigned q = r - m;
  const std::uint64_t h = t.height;
  const u128 d_scaled = [&] {
    Integer z = t.width.scaled(r);
    std::uint64_t words[2] = {0, 0};
    std::size_t count = 0;
    mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, z.get_mpz_t());
    return (static_cast<u128>(words[1]) << 64) | words[0];
  }();

  // Level index i-1 = t mod 2^m must lie in [0,h): aligned blocks on bits [b,m).
  std::vector<Cylinder> height_blocks;
  if (m == 64 || h == (std::uint64_t{1} << m)) {
    height_blocks.push_back(Cylinder{});
  } else {
    std::uint64_t prefix = 0;
    for (int b = static_cast<int>(m) - 1; b >= 0; --b) {
      if ((h >> b) & 1) {
        std::uint64_t mask = ((m == 64 ? ~0ULL : ((1ULL << m) - 1))) & ~((1ULL << b) - 1);
        height_blocks.push_back(Cylinder{mask, prefix});
        prefix |= 1ULL << b;
      }
    }
  }
  // Base membership: reverse_q((t >> m) mod 2^q) < D, i.e. digits m+1..r of x below D.
  std::vector<Cylinder> base_blocks;
  if (d_scaled == (static_cast<u128>(1) << q)) {
    base_blocks.push_back(Cylinder{});
  } else {
    std::uint64_t prefix = 0;
    for (int j = static_cast<int>(q) - 1; j >= 0; --j) {
      if ((d_scaled >> j) & 1) {
        const unsigned width = q - static_cast<unsigned>(j);
        const std::uint64_t low = width == 64 ? ~0ULL : ((1ULL << width) - 1);
        const std::uint64_t pattern = reverse_bits(prefix >> j, width);
        base_blocks.push_back(Cylinder{low << m, pattern << m});
        prefix |= 1ULL << j;
      }
    }
  }
  // Height and base conditions sit on disjoint bit ranges, so all products are disjoint.
  CylinderUnion one(1);
  for (const auto& hb : height_blocks)
    for (const auto& bb : base_blocks) one.add_disjoint(ProductCylinder{Cylinder{hb.mask | bb.mask, hb.value | bb.value}});

  if (t.dimension == 1) return one;
  std::vector<ProductCylinder> acc{ProductCylinder{}};
  for (std::size_t j = 0; j < t.dimension; ++j) {
    std::vector<ProductCylinder> next;
    for (const auto& prefix : acc)
      for (const auto& c : one.parts()) {
        auto pc = prefix;
        pc.push_back(c[0]);
        next.push_back(std::move(pc));
      }
    acc = std::move(next);
  }
  CylinderUnion out(t.dimension);
  for (auto& c : acc) out.add_disjoint(std::move(c));
  return out;
}

}  // namespace slowavg
