#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "slowavg/dyadic.hpp"

namespace slowavg {

using u128 = unsigned __int128;

/// A 2-adic cylinder in orbit-time coordinates: {t : t & mask == value}.
///
/// Orbit time t stands for the point T^{t+1}(0), i.e. the point whose
/// address is t + 1. With that shift, for a point x of address n,
///   #{1 <= i <= N : T^i x in S} = #{t in [n, n+N) : t in cyl(S)},
/// and every dyadic interval cell as well as every tower level union is a
/// finite disjoint union of cylinders. Masks only use bits < 64, so counts
/// are periodic with period 2^64.
struct Cylinder {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;

  unsigned fixed_bits() const { return static_cast<unsigned>(__builtin_popcountll(mask)); }
  /// Index of the highest fixed bit plus one.
  unsigned rank() const { return mask == 0 ? 0 : 64 - static_cast<unsigned>(__builtin_clzll(mask)); }
  bool matches(std::uint64_t t) const { return (t & mask) == value; }
  Rational measure() const { return pow2_rational(-static_cast<int>(fixed_bits())); }

  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

/// Cylinder of points lying in the aligned cell [index/2^level, (index+1)/2^level).
Cylinder cell_cylinder(std::uint64_t index, unsigned level);

bool intersect(const Cylinder& a, const Cylinder& b, Cylinder& out);
/// a \ b as pairwise-disjoint cylinders.
void subtract(const Cylinder& a, const Cylinder& b, std::vector<Cylinder>& out);

/// #{t in [0, U) : c.matches(t mod 2^64)}.
u128 count_below(const Cylinder& c, u128 upper);
/// #{t in [start, start + length)}.
inline u128 count_window(const Cylinder& c, std::uint64_t start, u128 length) {
  return count_below(c, static_cast<u128>(start) + length) - count_below(c, start);
}

/// One cylinder per coordinate; the product set in [0,1)^n.
using ProductCylinder = std::vector<Cylinder>;

bool intersect(const ProductCylinder& a, const ProductCylinder& b, ProductCylinder& out);
void subtract(const ProductCylinder& a, const ProductCylinder& b, std::vector<ProductCylinder>& out);
Rational measure(const ProductCylinder& c);

/// Disjoint union of product cylinders.
class CylinderUnion {
 public:
  explicit CylinderUnion(std::size_t dimension = 1) : dim_(dimension) {}
  std::size_t dimension() const { return dim_; }
  const std::vector<ProductCylinder>& parts() const { return parts_; }

  /// Adds `c`, keeping the parts disjoint.
  void add(const ProductCylinder& c);
  void add(const CylinderUnion& other);
  /// Appends `c` without the disjointness pass; the caller guarantees it.
  void add_disjoint(ProductCylinder c);
  Rational measure() const;
  bool contains_time(std::span<const std::uint64_t> t) const;

 private:
  std::size_t dim_;
  std::vector<ProductCylinder> parts_;
};

/// Cylinder decomposition of a box set / interval set.
CylinderUnion cylinders_of(const BoxSet& set);
CylinderUnion cylinders_of(const IntervalSet& set);

/// A nonnegative step function written as sum_j coef_j * 1[cylinder_j],
/// with closed-form orbit sums.
class OrbitKernel {
 public:
  struct Term {
    Rational coef;
    ProductCylinder cylinder;
  };

  explicit OrbitKernel(std::size_t dimension = 1);
  /// f0 restricted to the complement of `removed`.
  OrbitKernel(const StepFunction& f0, const CylinderUnion& removed);
  explicit OrbitKernel(const StepFunction& f);

  std::size_t dimension() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  /// Addresses modulo 2^rank determine every value and window sum.
  unsigned rank() const;

  Rational integral() const;
  /// Integral over a disjoint cylinder union.
  Rational integral_over(const CylinderUnion& region) const;
  Rational value_at_time(std::span<const std::uint64_t> t) const;
  /// f at the point with the given coordinate addresses.
  Rational value_at_address(std::span<const std::uint64_t> address) const;

  /// sum over z in {1..N}^n of f(T^z x), as an integer multiple of 1/denominator().
  Integer scaled_window_sum(std::span<const std::uint64_t> address, std::uint64_t n_steps) const;
  const Integer& denominator() const { return denom_; }
  /// The Birkhoff average (1/N^n) sum_{z in Q_N} f(T^z x).
  Rational average(std::span<const std::uint64_t> address, std::uint64_t n_steps) const;

 private:
  void finalize();

  std::size_t dim_;
  std::vector<Term> terms_;
  Integer denom_{1};
  std::vector<Integer> scaled_coef_;
  std::vector<std::int64_t> small_coef_;
  bool small_ = false;
};

}  // namespace slowavg
