#pragma once

#include <cstdint>
#include <string>

#include "slowavg/cylinder.hpp"
#include "slowavg/dyadic.hpp"

namespace slowavg {

/// A Rokhlin tower for the (product) odometer: base [0,d)^n and levels
/// T^z(base) for z in {1..h}^n. With h <= 2^m and d <= 2^-m the levels are
/// pairwise disjoint, because T cyclically permutes the rank-m cells.
struct Tower {
  Dyadic width;             // d
  std::uint64_t height = 1; // h
  unsigned rank_floor = 0;  // m, smallest with 2^m >= h
  std::size_t dimension = 1;

  Rational measure() const;  // (h d)^n
  std::string to_string() const;
  friend bool operator==(const Tower&, const Tower&) = default;
};

/// ceil(log2 h) for h >= 1.
unsigned ceil_log2(std::uint64_t h);

Tower build_tower(std::uint64_t height, const Rational& target_measure, unsigned precision);
Tower build_tower_zn(std::uint64_t side, const Rational& target_measure, unsigned precision, std::size_t dimension);

/// Throws unless the tower satisfies its structural invariants.
void validate_tower(const Tower& t);

/// Levels beyond which tower_set refuses to materialize.
inline constexpr std::uint64_t kMaxMaterializedLevels = std::uint64_t{1} << 20;

/// The i-th level T^i([0,d)), 1 <= i <= h, for a one-dimensional tower.
IntervalSet tower_level(const Tower& t, std::uint64_t i);
/// Union of the levels as an explicit set. Dimension 1 only.
IntervalSet tower_interval_set(const Tower& t);
/// Union of the levels as a box set (product of the 1-d tower sets).
BoxSet tower_set(const Tower& t);
/// Exact cylinder decomposition of the union of levels; works for any height.
CylinderUnion tower_cylinders(const Tower& t);

}  // namespace slowavg
