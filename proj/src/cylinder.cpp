#include "slowavg/cylinder.hpp"

#include "slowavg/odometer.hpp"

namespace slowavg {

namespace {

std::uint64_t low_mask(unsigned bits) { return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1); }

std::uint64_t pext(std::uint64_t src, std::uint64_t mask) {
#if defined(__BMI2__)
  return __builtin_ia32_pext_di(src, mask);
#else
  std::uint64_t out = 0;
  for (std::uint64_t bit = 1; mask != 0; bit <<= 1) {
    std::uint64_t lowest = mask & (~mask + 1);
    if (src & lowest) out |= bit;
    mask &= mask - 1;
  }
  return out;
#endif
}

/// #{t in [0,U) : t & mask == value} for U < 2^64.
u128 count_below_64(const Cylinder& c, std::uint64_t upper) {
  const std::uint64_t free = ~c.mask;
  const std::uint64_t diff = (upper ^ c.value) & c.mask;
  if (diff == 0) return pext(upper, free);
  const unsigned b = 63 - static_cast<unsigned>(__builtin_clzll(diff));
  const std::uint64_t hi = b == 63 ? 0 : pext(upper >> (b + 1), free >> (b + 1));
  const unsigned low_free = static_cast<unsigned>(__builtin_popcountll(free & low_mask(b)));
  const u128 above = static_cast<u128>(hi) + ((upper >> b) & 1);
  return above << low_free;
}

}  // namespace

Cylinder cell_cylinder(std::uint64_t index, unsigned level) {
  if (level > 64) throw Error(ErrorKind::RankCapExceeded, "cell level above 64");
  const std::uint64_t m = low_mask(level);
  // Address bits 0..level-1 are the cell's digits reversed; orbit time is address - 1.
  return Cylinder{m, (reverse_bits(index, level) - 1) & m};
}

bool intersect(const Cylinder& a, const Cylinder& b, Cylinder& out) {
  if ((a.value ^ b.value) & a.mask & b.mask) return false;
  out = Cylinder{a.mask | b.mask, a.value | b.value};
  return true;
}

void subtract(const Cylinder& a, const Cylinder& b, std::vector<Cylinder>& out) {
  Cylinder scratch;
  if (!intersect(a, b, scratch)) {
    out.push_back(a);
    return;
  }
  Cylinder cur = a;
  std::uint64_t bits = b.mask & ~a.mask;
  while (bits) {
    const std::uint64_t bit = bits & (~bits + 1);
    bits &= bits - 1;
    out.push_back(Cylinder{cur.mask | bit, cur.value | ((b.value & bit) ^ bit)});
    cur = Cylinder{cur.mask | bit, cur.value | (b.value & bit)};
  }
}

u128 count_below(const Cylinder& c, u128 upper) {
  const u128 periods = upper >> 64;
  const u128 per_period = static_cast<u128>(1) << (64 - c.fixed_bits());
  return periods * per_period + count_below_64(c, static_cast<std::uint64_t>(upper));
}

bool intersect(const ProductCylinder& a, const ProductCylinder& b, ProductCylinder& out) {
  out.resize(a.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    if (!intersect(a[j], b[j], out[j])) return false;
  return true;
}

void subtract(const ProductCylinder& a, const ProductCylinder& b, std::vector<ProductCylinder>& out) {
  ProductCylinder common;
  if (!intersect(a, b, common)) {
    out.push_back(a);
    return;
  }
  std::vector<Cylinder> pieces;
  for (std::size_t j = 0; j < a.size(); ++j) {
    pieces.clear();
    subtract(a[j], b[j], pieces);
    for (const auto& p : pieces) {
      ProductCylinder piece(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) piece[i] = i < j ? common[i] : (i == j ? p : a[i]);
      out.push_back(std::move(piece));
    }
  }
}

Rational measure(const ProductCylinder& c) {
  int bits = 0;
  for (const auto& f : c) bits += static_cast<int>(f.fixed_bits());
  return pow2_rational(-bits);
}

void CylinderUnion::add(const ProductCylinder& c) {
  if (c.size() != dim_) throw Error(ErrorKind::InvalidArgument, "cylinder dimension mismatch");
  std::vector<ProductCylinder> fresh{c};
  for (const auto& existing : parts_) {
    std::vector<ProductCylinder> next;
    for (const auto& piece : fresh) subtract(piece, existing, next);
    fresh = std::move(next);
    if (fresh.empty()) return;
  }
  parts_.insert(parts_.end(), fresh.begin(), fresh.end());
}

void CylinderUnion::add_disjoint(ProductCylinder c) {
  if (c.size() != dim_) throw Error(ErrorKind::InvalidArgument, "cylinder dimension mismatch");
  parts_.push_back(std::move(c));
}

void CylinderUnion::add(const CylinderUnion& other) {
  for (const auto& c : other.parts()) add(c);
}

Rational CylinderUnion::measure() const {
  Rational total(0);
  for (const auto& c : parts_) total += slowavg::measure(c);
  return total;
}

bool CylinderUnion::contains_time(std::span<const std::uint64_t> t) const {
  for (const auto& c : parts_) {
    bool in = true;
    for (std::size_t j = 0; j < dim_ && in; ++j) in = c[j].matches(t[j]);
    if (in) return true;
  }
  return false;
}

namespace {

void box_cylinders(const Box& box, std::vector<ProductCylinder>& out) {
  std::vector<ProductCylinder> acc{ProductCylinder{}};
  for (const auto& iv : box) {
    std::vector<ProductCylinder> next;
    for (const auto& cell : aligned_cells(iv)) {
      Cylinder c = cell_cylinder(cell.index, cell.level);
      for (const auto& prefix : acc) {
        auto pc = prefix;
        pc.push_back(c);
        next.push_back(std::move(pc));
      }
    }
    acc = std::move(next);
  }
  out.insert(out.end(), acc.begin(), acc.end());
}

}  // namespace

CylinderUnion cylinders_of(const BoxSet& set) {
  CylinderUnion u(set.dimension());
  std::vector<ProductCylinder> cells;
  for (const auto& b : set.boxes()) box_cylinders(b, cells);
  // Boxes are disjoint and aligned cells of one box are disjoint.
  for (auto& c : cells) u.add(c);
  return u;
}

CylinderUnion cylinders_of(const IntervalSet& set) { return cylinders_of(BoxSet::from_intervals(set)); }

// ---------------------------------------------------------- OrbitKernel

OrbitKernel::OrbitKernel(std::size_t dimension) : dim_(dimension) { finalize(); }

OrbitKernel::OrbitKernel(const StepFunction& f) : OrbitKernel(f, CylinderUnion(f.dimension())) {}

OrbitKernel::OrbitKernel(const StepFunction& f0, const CylinderUnion& removed) : dim_(f0.dimension()) {
  if (removed.dimension() != dim_) throw Error(ErrorKind::InvalidArgument, "kernel dimension mismatch");
  std::vector<ProductCylinder> cells;
  ProductCylinder common;
  for (const auto& piece : f0.pieces()) {
    if (piece.value == 0) continue;
    for (const auto& box : piece.region.boxes()) {
      cells.clear();
      box_cylinders(box, cells);
      for (const auto& c : cells) {
        terms_.push_back({piece.value, c});
        for (const auto& z : removed.parts())
          if (intersect(c, z, common)) terms_.push_back({-piece.value, common});
      }
    }
  }
  finalize();
}

void OrbitKernel::finalize() {
  denom_ = 1;
  for (const auto& t : terms_) mpz_lcm(denom_.get_mpz_t(), denom_.get_mpz_t(), t.coef.get_den_mpz_t());
  scaled_coef_.clear();
  small_coef_.clear();
  small_ = dim_ == 1;
  for (const auto& t : terms_) {
    Integer c = t.coef.get_num() * (denom_ / t.coef.get_den());
    if (!mpz_fits_slong_p(c.get_mpz_t()) || abs(c) >= (Integer(1) << 40)) small_ = false;
    small_coef_.push_back(mpz_fits_slong_p(c.get_mpz_t()) ? c.get_si() : 0);
    scaled_coef_.push_back(std::move(c));
  }
  if (terms_.size() > (1u << 20)) small_ = false;
}

unsigned OrbitKernel::rank() const {
  unsigned r = 0;
  for (const auto& t : terms_)
    for (const auto& c : t.cylinder) r = std::max(r, c.rank());
  return r;
}

Rational OrbitKernel::integral() const {
  Rational total(0);
  for (const auto& t : terms_) total += t.coef * measure(t.cylinder);
  return total;
}

Rational OrbitKernel::integral_over(const CylinderUnion& region) const {
  Rational total(0);
  ProductCylinder common;
  for (const auto& t : terms_)
    for (const auto& z : region.parts())
      if (intersect(t.cylinder, z, common)) total += t.coef * measure(common);
  return total;
}

Rational OrbitKernel::value_at_time(std::span<const std::uint64_t> time) const {
  Rational total(0);
  for (const auto& t : terms_) {
    bool in = true;
    for (std::size_t j = 0; j < dim_ && in; ++j) in = t.cylinder[j].matches(time[j]);
    if (in) total += t.coef;
  }
  return total;
}

Rational OrbitKernel::value_at_address(std::span<const std::uint64_t> address) const {
  std::vector<std::uint64_t> time(address.begin(), address.end());
  for (auto& v : time) v -= 1;  // 2-adic: address 0 is time -1
  return value_at_time(time);
}

Integer OrbitKernel::scaled_window_sum(std::span<const std::uint64_t> address, std::uint64_t n_steps) const {
  if (address.size() != dim_) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  if (small_) {
    // |coef| < 2^40, counts <= 2^64, at most 2^20 terms: fits in 125 bits.
    __int128 acc = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      u128 c = count_window(terms_[i].cylinder[0], address[0], n_steps);
      acc += static_cast<__int128>(c) * small_coef_[i];
    }
    const bool neg = acc < 0;
    u128 mag = neg ? static_cast<u128>(-acc) : static_cast<u128>(acc);
    std::uint64_t words[2] = {static_cast<std::uint64_t>(mag), static_cast<std::uint64_t>(mag >> 64)};
    Integer out;
    mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
    return neg ? Integer(-out) : out;
  }
  Integer acc(0), prod, piece;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    prod = scaled_coef_[i];
    for (std::size_t j = 0; j < dim_ && prod != 0; ++j) {
      u128 c = count_window(terms_[i].cylinder[j], address[j], n_steps);
      std::uint64_t words[2] = {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(c >> 64)};
      mpz_import(piece.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
      prod *= piece;
    }
    acc += prod;
  }
  return acc;
}

Rational OrbitKernel::average(std::span<const std::uint64_t> address, std::uint64_t n_steps) const {
  if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  Integer volume(1);
  for (std::size_t j = 0; j < dim_; ++j) volume *= integer_from_u64(n_steps);
  Rational avg(scaled_window_sum(address, n_steps), denom_ * volume);
  avg.canonicalize();
  return avg;
}

}  // namespace slowavg
