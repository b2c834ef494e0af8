#include "slowavg/dyadic.hpp"

#include <algorithm>
#include <cctype>

namespace slowavg {

static_assert(GMP_LIMB_BITS == 64, "Dyadic comparison reads single 64-bit limbs");

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

using u128 = unsigned __int128;

u128 to_u128(const Integer& z) {
  u128 v = 0;
  std::size_t count = 0;
  std::uint64_t words[2] = {0, 0};
  if (mpz_sizeinbase(z.get_mpz_t(), 2) > 128) throw Error(ErrorKind::RankCapExceeded, "integer too wide");
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, z.get_mpz_t());
  v = (static_cast<u128>(words[1]) << 64) | words[0];
  return v;
}

}  // namespace

// ---------------------------------------------------------------- Dyadic

Dyadic::Dyadic(Integer numerator, unsigned exponent) : num_(std::move(numerator)), exp_(exponent) {
  canonicalize();
}

Dyadic Dyadic::from_u64(std::uint64_t numerator, unsigned exponent) {
  return Dyadic(integer_from_u64(numerator), exponent);
}

void Dyadic::canonicalize() {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  if (exp_ > 0) {
    auto zeros = static_cast<unsigned>(mpz_scan1(num_.get_mpz_t(), 0));
    auto shift = std::min(zeros, exp_);
    if (shift > 0) {
      mpz_tdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), shift);
      exp_ -= shift;
    }
  }
  if (exp_ > kRankCap) {
    throw Error(ErrorKind::RankCapExceeded, "dyadic of rank " + std::to_string(exp_) + " exceeds cap " +
                                                std::to_string(kRankCap));
  }
}

Dyadic Dyadic::parse(std::string_view text) {
  Rational r = parse_rational(text);
  const Integer& den = r.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) {
    throw Error(ErrorKind::Parse, "'" + std::string(text) + "' is not dyadic");
  }
  auto exp = static_cast<unsigned>(mpz_scan1(den.get_mpz_t(), 0));
  return Dyadic(r.get_num(), exp);
}

Rational Dyadic::to_rational() const {
  Rational r(num_);
  mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), exp_);
  r.canonicalize();
  return r;
}

double Dyadic::to_double() const { return to_rational().get_d(); }

std::string Dyadic::to_string() const { return num_.get_str() + "/2^" + std::to_string(exp_); }

Integer Dyadic::scaled(unsigned bits) const {
  if (bits < exp_) throw Error(ErrorKind::InvalidArgument, "scaled(): too few bits");
  Integer out;
  mpz_mul_2exp(out.get_mpz_t(), num_.get_mpz_t(), bits - exp_);
  return out;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exp_, b.exp_);
  return Dyadic(a.scaled(e) + b.scaled(e), e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
  unsigned e = std::max(a.exp_, b.exp_);
  return Dyadic(a.scaled(e) - b.scaled(e), e);
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  if (a.exp_ == b.exp_) {
    int c = cmp(a.num_, b.num_);
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }
  // Points of [0,1] at rank <= 64: compare value * 2^64 as 128-bit integers.
  if (a.exp_ <= 64 && b.exp_ <= 64 && sgn(a.num_) >= 0 && sgn(b.num_) >= 0 && mpz_sizeinbase(a.num_.get_mpz_t(), 2) <= 64 &&
      mpz_sizeinbase(b.num_.get_mpz_t(), 2) <= 64) {
    auto low = [](const Integer& z) -> u128 { return mpz_size(z.get_mpz_t()) == 0 ? 0 : mpz_getlimbn(z.get_mpz_t(), 0); };
    const u128 x = low(a.num_) << (64 - a.exp_);
    const u128 y = low(b.num_) << (64 - b.exp_);
    return x <=> y;
  }
  unsigned e = std::max(a.exp_, b.exp_);
  int c = cmp(a.scaled(e), b.scaled(e));
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// -------------------------------------------------------- DyadicInterval

DyadicInterval::DyadicInterval(Dyadic lo_, Dyadic hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  static const Dyadic zero;
  static const Dyadic one(1, 0);
  if (!(lo < hi) || lo < zero || one < hi) {
    throw Error(ErrorKind::InvalidArgument, "interval [" + lo.to_string() + "," + hi.to_string() +
                                                ") is empty or leaves [0,1]");
  }
}

std::string DyadicInterval::to_string() const { return "[" + lo.to_string() + "," + hi.to_string() + ")"; }

DyadicInterval DyadicInterval::parse(std::string_view text) {
  text = trim(text);
  if (text.size() < 4 || text.front() != '[' || text.back() != ')') {
    throw Error(ErrorKind::Parse, "interval must look like [lo,hi): '" + std::string(text) + "'");
  }
  auto body = text.substr(1, text.size() - 2);
  auto comma = body.find(',');
  if (comma == std::string_view::npos) throw Error(ErrorKind::Parse, "missing ',' in '" + std::string(text) + "'");
  try {
    return DyadicInterval(Dyadic::parse(body.substr(0, comma)), Dyadic::parse(body.substr(comma + 1)));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::Parse, e.what());
    throw;
  }
}

// ----------------------------------------------------------- IntervalSet

IntervalSet::IntervalSet(std::vector<DyadicInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const DyadicInterval& a, const DyadicInterval& b) { return a.lo < b.lo; });
  for (auto& iv : intervals) {
    if (!parts_.empty() && iv.lo <= parts_.back().hi) {
      if (parts_.back().hi < iv.hi) parts_.back().hi = std::move(iv.hi);
    } else {
      parts_.push_back(std::move(iv));
    }
  }
}

IntervalSet IntervalSet::full() { return single(Dyadic(0, 0), Dyadic(1, 0)); }

IntervalSet IntervalSet::single(Dyadic lo, Dyadic hi) {
  return IntervalSet(std::vector<DyadicInterval>{DyadicInterval(std::move(lo), std::move(hi))});
}

IntervalSet IntervalSet::parse(std::string_view text) {
  text = trim(text);
  if (text == "{}" || text == "\xE2\x88\x85") return {};
  if (text.size() >= 2 && text.front() == '{' && text.back() == '}') text = text.substr(1, text.size() - 2);
  std::vector<DyadicInterval> parts;
  while (!(text = trim(text)).empty()) {
    auto close = text.find(')');
    if (close == std::string_view::npos) throw Error(ErrorKind::Parse, "unterminated interval");
    parts.push_back(DyadicInterval::parse(text.substr(0, close + 1)));
    text.remove_prefix(close + 1);
    text = trim(text);
    if (!text.empty()) {
      if (text.front() != ',') throw Error(ErrorKind::Parse, "expected ',' between intervals");
      text.remove_prefix(1);
    }
  }
  return IntervalSet(std::move(parts));
}

Rational IntervalSet::measure() const {
  Rational total(0);
  for (const auto& iv : parts_) total += iv.length().to_rational();
  return total;
}

bool IntervalSet::contains(const Dyadic& x) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](const Dyadic& v, const DyadicInterval& iv) { return v < iv.lo; });
  if (it == parts_.begin()) return false;
  return std::prev(it)->contains(x);
}

unsigned IntervalSet::rank() const {
  unsigned r = 0;
  for (const auto& iv : parts_) r = std::max(r, iv.rank());
  return r;
}

std::string IntervalSet::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ",";
    out += parts_[i].to_string();
  }
  return out + "}";
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
  std::vector<DyadicInterval> all(a.intervals());
  all.insert(all.end(), b.intervals().begin(), b.intervals().end());
  return IntervalSet(std::move(all));
}

IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
  std::vector<DyadicInterval> out;
  const auto& x = a.intervals();
  const auto& y = b.intervals();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const Dyadic& lo = std::max(x[i].lo, y[j].lo);
    const Dyadic& hi = std::min(x[i].hi, y[j].hi);
    if (lo < hi) out.emplace_back(lo, hi);
    if (x[i].hi < y[j].hi) ++i; else ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet set_complement(const IntervalSet& a) {
  std::vector<DyadicInterval> out;
  Dyadic cursor(0, 0);
  for (const auto& iv : a.intervals()) {
    if (cursor < iv.lo) out.emplace_back(cursor, iv.lo);
    cursor = iv.hi;
  }
  Dyadic one(1, 0);
  if (cursor < one) out.emplace_back(cursor, one);
  return IntervalSet(std::move(out));
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
  return set_intersection(a, set_complement(b));
}

// ---------------------------------------------------------------- Boxes

namespace {

bool intersect_box(const Box& a, const Box& b, Box& out) {
  out.clear();
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Dyadic& lo = std::max(a[j].lo, b[j].lo);
    const Dyadic& hi = std::min(a[j].hi, b[j].hi);
    if (!(lo < hi)) return false;
    out.emplace_back(lo, hi);
  }
  return true;
}

/// a \ b as disjoint boxes.
void subtract_box(const Box& a, const Box& b, std::vector<Box>& out) {
  Box common;
  if (!intersect_box(a, b, common)) {
    out.push_back(a);
    return;
  }
  Box rest = a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (rest[j].lo < common[j].lo) {
      Box piece = rest;
      piece[j] = DyadicInterval(rest[j].lo, common[j].lo);
      out.push_back(std::move(piece));
    }
    if (common[j].hi < rest[j].hi) {
      Box piece = rest;
      piece[j] = DyadicInterval(common[j].hi, rest[j].hi);
      out.push_back(std::move(piece));
    }
    rest[j] = common[j];
  }
}

BoxSet make_unchecked(std::size_t dim, std::vector<Box> boxes) {
  return BoxSet(BoxSet::Unchecked{}, dim, std::move(boxes));
}

}  // namespace

Rational box_measure(const Box& box) {
  Rational m(1);
  for (const auto& iv : box) m *= iv.length().to_rational();
  return m;
}

std::string box_to_string(const Box& box) {
  std::string out;
  for (std::size_t j = 0; j < box.size(); ++j) {
    if (j) out += "x";
    out += box[j].to_string();
  }
  return out;
}

Box parse_box(std::string_view text) {
  Box box;
  text = trim(text);
  while (!text.empty()) {
    auto close = text.find(')');
    if (close == std::string_view::npos) throw Error(ErrorKind::Parse, "unterminated box factor");
    box.push_back(DyadicInterval::parse(text.substr(0, close + 1)));
    text = trim(text.substr(close + 1));
    if (!text.empty()) {
      if (text.front() != 'x') throw Error(ErrorKind::Parse, "box factors are joined by 'x'");
      text = trim(text.substr(1));
    }
  }
  if (box.empty()) throw Error(ErrorKind::Parse, "empty box");
  return box;
}

BoxSet::BoxSet(std::size_t dimension, std::vector<Box> boxes) : dim_(dimension), boxes_(std::move(boxes)) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  Box scratch;
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].size() != dim_) throw Error(ErrorKind::InvalidArgument, "box dimension mismatch");
    for (std::size_t j = 0; j < i; ++j) {
      if (intersect_box(boxes_[i], boxes_[j], scratch)) {
        throw Error(ErrorKind::InvalidArgument, "boxes overlap: " + box_to_string(boxes_[i]) + " and " +
                                                    box_to_string(boxes_[j]));
      }
    }
  }
}

BoxSet BoxSet::full(std::size_t dimension) {
  Box b(dimension, DyadicInterval(Dyadic(0, 0), Dyadic(1, 0)));
  return make_unchecked(dimension, {b});
}

BoxSet BoxSet::from_intervals(const IntervalSet& set) {
  std::vector<Box> boxes;
  for (const auto& iv : set.intervals()) boxes.push_back(Box{iv});
  return make_unchecked(1, std::move(boxes));
}

BoxSet BoxSet::product(std::span<const IntervalSet> factors) {
  std::vector<Box> boxes{Box{}};
  for (const auto& f : factors) {
    std::vector<Box> next;
    for (const auto& b : boxes) {
      for (const auto& iv : f.intervals()) {
        Box nb = b;
        nb.push_back(iv);
        next.push_back(std::move(nb));
      }
    }
    boxes = std::move(next);
  }
  return make_unchecked(factors.size(), std::move(boxes));
}

Rational BoxSet::measure() const {
  Rational total(0);
  for (const auto& b : boxes_) total += box_measure(b);
  return total;
}

bool BoxSet::contains(std::span<const Dyadic> x) const {
  for (const auto& b : boxes_) {
    bool inside = true;
    for (std::size_t j = 0; j < dim_ && inside; ++j) inside = b[j].contains(x[j]);
    if (inside) return true;
  }
  return false;
}

unsigned BoxSet::rank() const {
  unsigned r = 0;
  for (const auto& b : boxes_)
    for (const auto& iv : b) r = std::max(r, iv.rank());
  return r;
}

IntervalSet BoxSet::to_interval_set() const {
  if (dim_ != 1) throw Error(ErrorKind::InvalidArgument, "to_interval_set needs dimension 1");
  std::vector<DyadicInterval> parts;
  for (const auto& b : boxes_) parts.push_back(b[0]);
  return IntervalSet(std::move(parts));
}

std::string BoxSet::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (i) out += ",";
    out += box_to_string(boxes_[i]);
  }
  return out + "}";
}

BoxSet set_intersection(const BoxSet& a, const BoxSet& b) {
  if (a.dimension() != b.dimension()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  std::vector<Box> out;
  Box scratch;
  for (const auto& x : a.boxes())
    for (const auto& y : b.boxes())
      if (intersect_box(x, y, scratch)) out.push_back(scratch);
  return make_unchecked(a.dimension(), std::move(out));
}

BoxSet set_difference(const BoxSet& a, const BoxSet& b) {
  if (a.dimension() != b.dimension()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  std::vector<Box> current = a.boxes();
  for (const auto& cut : b.boxes()) {
    std::vector<Box> next;
    for (const auto& piece : current) subtract_box(piece, cut, next);
    current = std::move(next);
  }
  return make_unchecked(a.dimension(), std::move(current));
}

BoxSet set_union(const BoxSet& a, const BoxSet& b) {
  auto extra = set_difference(b, a);
  std::vector<Box> out = a.boxes();
  out.insert(out.end(), extra.boxes().begin(), extra.boxes().end());
  return make_unchecked(a.dimension(), std::move(out));
}

BoxSet set_complement(const BoxSet& a) { return set_difference(BoxSet::full(a.dimension()), a); }

// --------------------------------------------------------- StepFunction

StepFunction::StepFunction(std::size_t dimension) : StepFunction(dimension, {}) {}

StepFunction::StepFunction(std::size_t dimension, std::vector<Piece> pieces) : dim_(dimension) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  for (auto& p : pieces) {
    p.value.canonicalize();
    if (p.region.dimension() != dim_) throw Error(ErrorKind::InvalidArgument, "piece dimension mismatch");
    if (p.value < 0) throw Error(ErrorKind::InvalidArgument, "step function values must be >= 0");
    if (!p.region.empty()) pieces_.push_back(std::move(p));
  }
  BoxSet covered(dim_);
  if (dim_ == 1) {
    // Sort every interval once; overlap shows up between neighbours.
    std::vector<DyadicInterval> all;
    for (const auto& p : pieces_) {
      for (const auto& b : p.region.boxes()) all.push_back(b[0]);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < all.size(); ++i) {
      if (all[i].lo < all[i - 1].hi) throw Error(ErrorKind::InvalidArgument, "step function regions overlap");
    }
    covered = BoxSet::from_intervals(IntervalSet(std::move(all)));
  } else {
    for (const auto& p : pieces_) {
      if (!set_intersection(covered, p.region).empty()) {
        throw Error(ErrorKind::InvalidArgument, "step function regions overlap");
      }
      covered = set_union(covered, p.region);
    }
  }
  auto rest = set_complement(covered);
  if (!rest.empty()) pieces_.push_back(Piece{std::move(rest), Rational(0)});
}

StepFunction StepFunction::constant(Rational value, std::size_t dimension) {
  return StepFunction(dimension, {Piece{BoxSet::full(dimension), std::move(value)}});
}

StepFunction StepFunction::indicator(const IntervalSet& set) { return indicator(BoxSet::from_intervals(set)); }

StepFunction StepFunction::indicator(const BoxSet& set) {
  return StepFunction(set.dimension(), {Piece{set, Rational(1)}});
}

Rational StepFunction::value_at(std::span<const Dyadic> x) const {
  if (x.size() != dim_) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  for (const auto& p : pieces_)
    if (p.region.contains(x)) return p.value;
  return Rational(0);
}

Rational StepFunction::max_value() const {
  Rational m(0);
  for (const auto& p : pieces_) m = std::max(m, p.value);
  return m;
}

Rational StepFunction::min_value() const {
  if (pieces_.empty()) return Rational(0);
  Rational m = pieces_.front().value;
  for (const auto& p : pieces_) m = std::min(m, p.value);
  return m;
}

unsigned StepFunction::rank() const {
  unsigned r = 0;
  for (const auto& p : pieces_) r = std::max(r, p.region.rank());
  return r;
}

bool StepFunction::is_constant() const {
  for (const auto& p : pieces_)
    if (p.value != pieces_.front().value) return false;
  return true;
}

Rational integral(const StepFunction& f, const BoxSet& over) {
  Rational total(0);
  for (const auto& p : f.pieces()) {
    if (p.value == 0) continue;
    total += p.value * set_intersection(p.region, over).measure();
  }
  return total;
}

Rational integral(const StepFunction& f, const IntervalSet& over) {
  return integral(f, BoxSet::from_intervals(over));
}

Rational integral(const StepFunction& f) {
  Rational total(0);
  for (const auto& p : f.pieces()) total += p.value * p.region.measure();
  return total;
}

StepFunction restrict(const StepFunction& f, const BoxSet& region) {
  std::vector<StepFunction::Piece> pieces;
  for (const auto& p : f.pieces()) {
    if (p.value == 0) continue;
    auto r = set_intersection(p.region, region);
    if (!r.empty()) pieces.push_back({std::move(r), p.value});
  }
  return StepFunction(f.dimension(), std::move(pieces));
}

StepFunction restrict(const StepFunction& f, const IntervalSet& region) {
  return restrict(f, BoxSet::from_intervals(region));
}

std::vector<DyadicCell> aligned_cells(const DyadicInterval& interval) {
  unsigned r = interval.rank();
  u128 a = to_u128(interval.lo.scaled(r));
  u128 b = to_u128(interval.hi.scaled(r));
  std::vector<DyadicCell> cells;
  while (a < b) {
    unsigned k = 0;
    while (k < r && ((a >> k) & 1) == 0 && a + (u128(1) << (k + 1)) <= b) ++k;
    cells.push_back({static_cast<std::uint64_t>(a >> k), r - k});
    a += u128(1) << k;
  }
  return cells;
}

}  // namespace slowavg
