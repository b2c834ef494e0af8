#pragma once

#include <cstdint>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slowavg/error.hpp"
#include "slowavg/rational.hpp"

namespace slowavg {

/// Deepest binary digit any endpoint or point may carry.
inline constexpr unsigned kRankCap = 64;

/// Exact dyadic rational numerator / 2^exponent, kept canonical
/// (exponent == 0 or numerator odd).
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(Integer numerator, unsigned exponent);
  static Dyadic from_u64(std::uint64_t numerator, unsigned exponent);
  static Dyadic parse(std::string_view text);

  const Integer& numerator() const { return num_; }
  unsigned exponent() const { return exp_; }
  /// Smallest r with value * 2^r integral.
  unsigned rank() const { return exp_; }

  Rational to_rational() const;
  double to_double() const;
  std::string to_string() const;  // "3/2^4"

  /// value * 2^bits as an integer; requires bits >= exponent.
  Integer scaled(unsigned bits) const;

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);
  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exp_ == b.exp_ && a.num_ == b.num_;
  }

 private:
  void canonicalize();
  Integer num_{0};
  unsigned exp_ = 0;
};

/// Half-open [lo, hi) inside [0, 1].
struct DyadicInterval {
  Dyadic lo;
  Dyadic hi;

  DyadicInterval() = default;
  DyadicInterval(Dyadic lo_, Dyadic hi_);

  Dyadic length() const { return hi - lo; }
  bool contains(const Dyadic& x) const { return lo <= x && x < hi; }
  unsigned rank() const { return std::max(lo.rank(), hi.rank()); }
  std::string to_string() const;  // "[lo,hi)"
  static DyadicInterval parse(std::string_view text);

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

/// Canonical finite union of half-open dyadic intervals of [0,1):
/// sorted, disjoint, and maximally merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<DyadicInterval> intervals);  // canonicalizes
  static IntervalSet full();
  static IntervalSet single(Dyadic lo, Dyadic hi);
  static IntervalSet parse(std::string_view text);

  const std::vector<DyadicInterval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }

  Rational measure() const;
  bool contains(const Dyadic& x) const;
  unsigned rank() const;
  std::string to_string() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<DyadicInterval> parts_;
};

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_complement(const IntervalSet& a);
inline Rational measure(const IntervalSet& a) { return a.measure(); }

using Point = std::vector<Dyadic>;
using Box = std::vector<DyadicInterval>;

/// Pairwise-disjoint boxes in [0,1)^n.
class BoxSet {
 public:
  struct Unchecked {};

  explicit BoxSet(std::size_t dimension = 1) : dim_(dimension) {}
  /// Caller guarantees disjointness (used by the set algebra itself).
  BoxSet(Unchecked, std::size_t dimension, std::vector<Box> boxes)
      : dim_(dimension), boxes_(std::move(boxes)) {}
  /// Boxes must already be pairwise disjoint; checked.
  BoxSet(std::size_t dimension, std::vector<Box> boxes);
  static BoxSet full(std::size_t dimension);
  static BoxSet from_intervals(const IntervalSet& set);
  static BoxSet product(std::span<const IntervalSet> factors);

  std::size_t dimension() const { return dim_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  bool empty() const { return boxes_.empty(); }

  Rational measure() const;
  bool contains(std::span<const Dyadic> x) const;
  unsigned rank() const;
  /// Exact union as an IntervalSet; dimension must be 1.
  IntervalSet to_interval_set() const;
  std::string to_string() const;

 private:
  std::size_t dim_;
  std::vector<Box> boxes_;
};

BoxSet set_union(const BoxSet& a, const BoxSet& b);
BoxSet set_intersection(const BoxSet& a, const BoxSet& b);
BoxSet set_difference(const BoxSet& a, const BoxSet& b);
BoxSet set_complement(const BoxSet& a);
inline Rational measure(const BoxSet& a) { return a.measure(); }

Rational box_measure(const Box& box);
std::string box_to_string(const Box& box);  // "[a,b)x[c,d)"
Box parse_box(std::string_view text);

/// Nonnegative piecewise-constant function on [0,1)^n with dyadic breakpoints.
/// Regions are disjoint and cover [0,1)^n; the uncovered remainder is given
/// value 0 on construction.
class StepFunction {
 public:
  struct Piece {
    BoxSet region;
    Rational value;
  };

  explicit StepFunction(std::size_t dimension = 1);
  StepFunction(std::size_t dimension, std::vector<Piece> pieces);
  static StepFunction constant(Rational value, std::size_t dimension = 1);
  static StepFunction indicator(const IntervalSet& set);
  static StepFunction indicator(const BoxSet& set);

  std::size_t dimension() const { return dim_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  Rational value_at(std::span<const Dyadic> x) const;
  Rational value_at(const Dyadic& x) const { return value_at(std::span<const Dyadic>(&x, 1)); }
  Rational max_value() const;
  Rational min_value() const;
  unsigned rank() const;
  bool is_constant() const;

 private:
  std::size_t dim_;
  std::vector<Piece> pieces_;
};

Rational integral(const StepFunction& f, const BoxSet& over);
Rational integral(const StepFunction& f, const IntervalSet& over);
Rational integral(const StepFunction& f);
StepFunction restrict(const StepFunction& f, const BoxSet& region);
StepFunction restrict(const StepFunction& f, const IntervalSet& region);

/// Splits [lo,hi) into maximal aligned dyadic cells [j/2^L,(j+1)/2^L).
struct DyadicCell {
  std::uint64_t index;
  unsigned level;
};
std::vector<DyadicCell> aligned_cells(const DyadicInterval& interval);

}  // namespace slowavg
