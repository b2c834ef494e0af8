#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "slowavg/dyadic.hpp"

namespace testing_support {

using namespace slowavg;

/// Canonical a/b (mpq_class(a, b) is not reduced on construction).
inline Rational frac(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

inline Dyadic dy(const std::string& s) { return Dyadic::parse(s); }
inline Rational rat(const std::string& s) { return parse_rational(s); }
inline IntervalSet iset(const std::string& s) { return IntervalSet::parse(s); }

/// Cells j/2^r covered by `a`, read directly off the endpoints.
inline std::vector<bool> rasterize(const IntervalSet& a, unsigned r) {
  std::vector<bool> bits(std::size_t{1} << r, false);
  for (const auto& iv : a.intervals()) {
    const auto lo = iv.lo.scaled(r).get_ui();
    const auto hi = iv.hi.scaled(r).get_ui();
    for (auto j = lo; j < hi; ++j) bits[j] = true;
  }
  return bits;
}

/// Random set whose endpoints all have rank <= r, built from cell bits.
inline IntervalSet random_set(std::mt19937_64& rng, unsigned r, double density = 0.5) {
  std::bernoulli_distribution coin(density);
  std::vector<DyadicInterval> parts;
  const std::uint64_t cells = std::uint64_t{1} << r;
  // Runs of cells; for large r use a handful of random runs instead.
  if (r <= 12) {
    for (std::uint64_t j = 0; j < cells; ++j) {
      if (coin(rng)) parts.emplace_back(Dyadic::from_u64(j, r), Dyadic::from_u64(j + 1, r));
    }
  } else {
    std::uniform_int_distribution<std::uint64_t> pick(0, cells);
    std::uniform_int_distribution<int> count(0, 12);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      auto a = pick(rng), b = pick(rng);
      if (a > b) std::swap(a, b);
      if (a < b) parts.emplace_back(Dyadic::from_u64(a, r), Dyadic::from_u64(b, r));
    }
  }
  return IntervalSet(std::move(parts));
}

/// Random step function of rank <= r: each rank-r cell gets a value in {0..4}/den.
inline StepFunction random_step(std::mt19937_64& rng, unsigned r, unsigned den = 3) {
  std::uniform_int_distribution<int> val(0, 4);
  std::vector<StepFunction::Piece> pieces;
  const std::uint64_t cells = std::uint64_t{1} << r;
  for (std::uint64_t j = 0; j < cells; ++j) {
    const int v = val(rng);
    if (v == 0) continue;
    pieces.push_back({BoxSet::from_intervals(IntervalSet::single(Dyadic::from_u64(j, r), Dyadic::from_u64(j + 1, r))),
                      frac(v, den)});
  }
  return StepFunction(1, std::move(pieces));
}

/// Random 2-d step function, constant on rank-r grid squares.
inline StepFunction random_step_2d(std::mt19937_64& rng, unsigned r) {
  std::uniform_int_distribution<int> val(0, 3);
  std::vector<StepFunction::Piece> pieces;
  const std::uint64_t cells = std::uint64_t{1} << r;
  for (std::uint64_t i = 0; i < cells; ++i) {
    for (std::uint64_t j = 0; j < cells; ++j) {
      const int v = val(rng);
      if (v == 0) continue;
      Box b{DyadicInterval(Dyadic::from_u64(i, r), Dyadic::from_u64(i + 1, r)),
            DyadicInterval(Dyadic::from_u64(j, r), Dyadic::from_u64(j + 1, r))};
      pieces.push_back({BoxSet(2, {b}), frac(v, 2)});
    }
  }
  return StepFunction(2, std::move(pieces));
}

/// Uniform random dyadic point of rank <= r in [0,1).
inline Dyadic random_point(std::mt19937_64& rng, unsigned r) {
  std::uniform_int_distribution<std::uint64_t> pick(0, r >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1);
  return Dyadic::from_u64(pick(rng), r);
}

/// Binary digits d_1..d_L of x (x must have rank <= L).
inline std::vector<int> digits(const Dyadic& x, unsigned len) {
  const Integer v = x.scaled(len);
  std::vector<int> d(len);
  for (unsigned i = 0; i < len; ++i) d[i] = mpz_tstbit(v.get_mpz_t(), len - 1 - i);
  return d;
}

inline Dyadic from_digits(const std::vector<int>& d) {
  Integer v(0);
  for (int b : d) v = 2 * v + b;
  return Dyadic(v, static_cast<unsigned>(d.size()));
}

/// Adding machine on digit strings: add 1 at digit 1, carry to the right.
inline Dyadic carry_step(const Dyadic& x) {
  auto d = digits(x, x.rank() + 1);
  for (auto& b : d) {
    if (b == 0) {
      b = 1;
      break;
    }
    b = 0;
  }
  return from_digits(d);
}

}  // namespace testing_support
