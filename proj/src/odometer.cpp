#include "slowavg/odometer.hpp"

namespace slowavg {

namespace {

const Dyadic& one() {
  static const Dyadic v(1, 0);
  return v;
}

Dyadic pow2_neg(unsigned k) { return Dyadic(1, k); }

void require_unit(const Dyadic& x) {
  if (x < Dyadic() || !(x < one())) throw Error(ErrorKind::InvalidArgument, "point outside [0,1): " + x.to_string());
}

}  // namespace

Dyadic Odometer::step(const Dyadic& x) {
  require_unit(x);
  // k leading ones: x in [1 - 2^-k, 1 - 2^-(k+1)).
  unsigned k = 0;
  while (!(x < one() - pow2_neg(k + 1))) {
    ++k;
    if (k + 1 > kRankCap) throw Error(ErrorKind::RankCapExceeded, "carry runs past digit 64");
  }
  return x - (one() - pow2_neg(k)) + pow2_neg(k + 1);
}

std::uint64_t Odometer::address(const Dyadic& x) {
  require_unit(x);
  return reverse_bits(integer_to_u64(x.scaled(64)));
}

Dyadic Odometer::point_at(std::uint64_t address) { return Dyadic::from_u64(reverse_bits(address), 64); }

Dyadic Odometer::iterate(const Dyadic& x, std::int64_t k) {
  __int128 a = static_cast<__int128>(address(x)) + k;
  if (a < 0) {
    throw Error(ErrorKind::RankCapExceeded, "backward orbit of 0 leaves the dyadic points");
  }
  if (a > static_cast<__int128>(UINT64_MAX)) {
    throw Error(ErrorKind::RankCapExceeded, "carry runs past digit 64");
  }
  return point_at(static_cast<std::uint64_t>(a));
}

IntervalSet Odometer::preimage(const IntervalSet& a) {
  // T maps J_k = [1-2^-k, 1-2^-(k+1)) onto [2^-(k+1), 2^-k) by translation.
  unsigned r = a.rank();
  std::vector<DyadicInterval> parts;
  for (unsigned k = 0; k < r; ++k) {
    auto image = IntervalSet::single(pow2_neg(k + 1), pow2_neg(k));
    Dyadic shift = (one() - pow2_neg(k)) - pow2_neg(k + 1);
    const IntervalSet hit = set_intersection(a, image);
    for (const auto& iv : hit.intervals()) {
      parts.emplace_back(iv.lo + shift, iv.hi + shift);
    }
  }
  // Below 2^-r the set is all-or-nothing; its preimage is the tail of the J_k.
  if (a.contains(Dyadic())) parts.emplace_back(one() - pow2_neg(r), one());
  return IntervalSet(std::move(parts));
}

IntervalSet Odometer::image(const IntervalSet& a) {
  unsigned r = a.rank();
  std::vector<DyadicInterval> parts;
  for (unsigned k = 0; k < r; ++k) {
    auto piece = IntervalSet::single(one() - pow2_neg(k), one() - pow2_neg(k + 1));
    Dyadic shift = (one() - pow2_neg(k)) - pow2_neg(k + 1);
    const IntervalSet hit = set_intersection(a, piece);
    for (const auto& iv : hit.intervals()) {
      parts.emplace_back(iv.lo - shift, iv.hi - shift);
    }
  }
  if (r == 0 ? !a.empty() : a.contains(one() - pow2_neg(r))) parts.emplace_back(Dyadic(), pow2_neg(r));
  return IntervalSet(std::move(parts));
}

OdometerZn::OdometerZn(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
}

Point OdometerZn::step(std::span<const Dyadic> x, std::span<const std::int64_t> z) const {
  if (x.size() != dim_ || z.size() != dim_) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  Point out;
  out.reserve(dim_);
  for (std::size_t j = 0; j < dim_; ++j) out.push_back(Odometer::iterate(x[j], z[j]));
  return out;
}

}  // namespace slowavg
