#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slowavg/dyadic.hpp"

namespace slowavg {

/// The dyadic adding machine on [0,1): add 1/2 to the binary expansion with
/// the carry running toward less significant digits. On
/// [1-2^-k, 1-2^-(k+1)) it translates by 2^-(k+1) - (1-2^-k).
///
/// Every point of rank <= 64 has an *address*: its first 64 binary digits
/// read in reverse (digit 1 is bit 0). The odometer is +1 on addresses, and
/// T^u(0) is the point with address u.
class Odometer {
 public:
  static Dyadic step(const Dyadic& x);
  /// T^k x for any integer k. Throws RankCapExceeded when the carry runs past
  /// digit 64, or when k < 0 walks off the backward orbit of 0 (whose
  /// preimages are not dyadic).
  static Dyadic iterate(const Dyadic& x, std::int64_t k);
  /// T^{-1}(a), exactly.
  static IntervalSet preimage(const IntervalSet& a);
  /// T(a), exactly (up to the single point 0, which has no dyadic preimage).
  static IntervalSet image(const IntervalSet& a);

  static std::uint64_t address(const Dyadic& x);
  static Dyadic point_at(std::uint64_t address);
};

/// Coordinatewise product of n odometers as a Z^n action.
class OdometerZn {
 public:
  explicit OdometerZn(std::size_t dimension);
  std::size_t dimension() const { return dim_; }
  Point step(std::span<const Dyadic> x, std::span<const std::int64_t> z) const;

 private:
  std::size_t dim_;
};

inline Point step_zn(std::span<const Dyadic> x, std::span<const std::int64_t> z) {
  return OdometerZn(x.size()).step(x, z);
}

inline std::uint64_t reverse_bits(std::uint64_t v) {
  v = ((v >> 1) & 0x5555555555555555ULL) | ((v & 0x5555555555555555ULL) << 1);
  v = ((v >> 2) & 0x3333333333333333ULL) | ((v & 0x3333333333333333ULL) << 2);
  v = ((v >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((v & 0x0F0F0F0F0F0F0F0FULL) << 4);
  v = ((v >> 8) & 0x00FF00FF00FF00FFULL) | ((v & 0x00FF00FF00FF00FFULL) << 8);
  v = ((v >> 16) & 0x0000FFFF0000FFFFULL) | ((v & 0x0000FFFF0000FFFFULL) << 16);
  return (v >> 32) | (v << 32);
}

/// Reverse of the low `bits` bits of v.
inline std::uint64_t reverse_bits(std::uint64_t v, unsigned bits) {
  return bits == 0 ? 0 : reverse_bits(v) >> (64 - bits);
}

}  // namespace slowavg
