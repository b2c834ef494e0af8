#include "slowavg/birkhoff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "slowavg/odometer.hpp"

namespace slowavg {

const char* to_string(EstimateMethod m) { return m == EstimateMethod::Exact ? "exact" : "monte-carlo"; }

namespace {

std::uint64_t checked_address(std::uint64_t base, std::uint64_t i) {
  if (i > UINT64_MAX - base) throw Error(ErrorKind::RankCapExceeded, "orbit carries past digit 64");
  return base + i;
}

/// |A - center| against threshold, where A = S / (denominator * volume).
class DeviationTest {
 public:
  DeviationTest(const Integer& denominator, const Integer& volume, const Rational& center,
                const Rational& threshold) {
    const Integer qv = denominator * volume;
    scale_ = center.get_den() * threshold.get_den();
    offset_ = qv * center.get_num() * threshold.get_den();
    bound_ = qv * threshold.get_num() * center.get_den();
  }

  /// Sign of |A - center| - threshold.
  int compare(const Integer& scaled_sum) {
    diff_ = scaled_sum * scale_ - offset_;
    mpz_abs(diff_.get_mpz_t(), diff_.get_mpz_t());
    return cmp(diff_, bound_);
  }

  bool matches(const Integer& scaled_sum, Comparison c) {
    int s = compare(scaled_sum);
    return c == Comparison::Above ? s > 0 : s < 0;
  }

 private:
  Integer scale_, offset_, bound_, diff_;
};

Integer common_denominator(const std::vector<Rational>& values) {
  Integer q(1);
  for (const auto& v : values) mpz_lcm(q.get_mpz_t(), q.get_mpz_t(), v.get_den_mpz_t());
  return q;
}

/// Deviation flags for every address residue modulo 2^rank; value(t) is f at
/// orbit time t (the point with address t+1).
std::vector<bool> exact_deviation_residues(unsigned rank, std::uint64_t n_steps,
                                           const std::function<Rational(std::uint64_t)>& value,
                                           const Rational& center, const Rational& threshold,
                                           Comparison cmp = Comparison::Above) {
  const std::uint64_t period = std::uint64_t{1} << rank;
  std::vector<Rational> table(period);
  for (std::uint64_t t = 0; t < period; ++t) table[t] = value(t);
  const Integer q = common_denominator(table);
  std::vector<Integer> prefix(period + 1);
  prefix[0] = 0;
  for (std::uint64_t t = 0; t < period; ++t) {
    prefix[t + 1] = prefix[t] + table[t].get_num() * (q / table[t].get_den());
  }
  const Integer full_cycles = integer_from_u64(n_steps >> rank);
  const std::uint64_t rem = n_steps & (period - 1);
  const Integer cycle_part = full_cycles * prefix[period];
  DeviationTest test(q, integer_from_u64(n_steps), center, threshold);
  std::vector<bool> flags(period);
  Integer sum;
  for (std::uint64_t n = 0; n < period; ++n) {
    if (n + rem <= period) {
      sum = prefix[n + rem] - prefix[n];
    } else {
      sum = prefix[period] - prefix[n] + prefix[n + rem - period];
    }
    sum += cycle_part;
    flags[n] = test.matches(sum, cmp);
  }
  return flags;
}

void check_exact_limits(std::uint64_t n_steps, unsigned rank, const ExactLimits& limits) {
  if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (n_steps > limits.exact_threshold) {
    throw Error(ErrorKind::ExactThresholdExceeded, "N = " + std::to_string(n_steps) + " above exact threshold " +
                                                       std::to_string(limits.exact_threshold));
  }
  if (rank > limits.rank_limit) {
    throw Error(ErrorKind::ExactThresholdExceeded, "rank " + std::to_string(rank) + " above exact rank limit " +
                                                       std::to_string(limits.rank_limit));
  }
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rational birkhoff_average(const Dyadic& x, std::uint64_t n_steps, const StepFunction& f) {
  if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (f.dimension() != 1) throw Error(ErrorKind::InvalidArgument, "birkhoff_average needs a 1-d function");
  const std::uint64_t a = Odometer::address(x);
  Rational sum(0);
  for (std::uint64_t i = 1; i <= n_steps; ++i) sum += f.value_at(Odometer::point_at(checked_address(a, i)));
  return sum / Rational(integer_from_u64(n_steps));
}

Rational birkhoff_average_zn(std::span<const Dyadic> x, std::uint64_t n_steps, const StepFunction& f,
                             std::uint64_t eval_budget) {
  const std::size_t n = x.size();
  if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (f.dimension() != n) throw Error(ErrorKind::InvalidArgument, "point/function dimension mismatch");
  u128 volume = 1;
  for (std::size_t j = 0; j < n; ++j) {
    volume *= n_steps;
    if (volume > eval_budget) {
      throw Error(ErrorKind::EvaluationBudget, "N^n exceeds evaluation budget " + std::to_string(eval_budget));
    }
  }
  std::vector<std::uint64_t> base(n);
  for (std::size_t j = 0; j < n; ++j) base[j] = Odometer::address(x[j]);
  std::vector<std::uint64_t> z(n, 1);
  Point p(n);
  Rational sum(0);
  while (true) {
    for (std::size_t j = 0; j < n; ++j) p[j] = Odometer::point_at(checked_address(base[j], z[j]));
    sum += f.value_at(p);
    std::size_t j = 0;
    while (j < n && z[j] == n_steps) z[j++] = 1;
    if (j == n) break;
    ++z[j];
  }
  std::uint64_t vol = static_cast<std::uint64_t>(volume);
  return sum / Rational(integer_from_u64(vol));
}

IntervalSet deviation_set_exact(std::uint64_t n_steps, const StepFunction& f, const Rational& center,
                                const Rational& threshold, const ExactLimits& limits) {
  if (f.dimension() != 1) throw Error(ErrorKind::InvalidArgument, "exact deviation sets are Z-action only");
  const unsigned rank = f.rank();
  check_exact_limits(n_steps, rank, limits);
  const std::uint64_t period = std::uint64_t{1} << rank;
  auto value = [&](std::uint64_t t) {
    std::uint64_t address = (t + 1) & (period - 1);
    return f.value_at(Dyadic::from_u64(reverse_bits(address, rank), rank));
  };
  auto flags = exact_deviation_residues(rank, n_steps, value, center, threshold);
  std::vector<std::uint64_t> cells;
  for (std::uint64_t n = 0; n < period; ++n)
    if (flags[n]) cells.push_back(reverse_bits(n, rank));
  std::sort(cells.begin(), cells.end());
  std::vector<DyadicInterval> parts;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    while (j + 1 < cells.size() && cells[j + 1] == cells[j] + 1) ++j;
    parts.emplace_back(Dyadic::from_u64(cells[i], rank), Dyadic(integer_from_u64(cells[j]) + 1, rank));
    i = j + 1;
  }
  return IntervalSet(std::move(parts));
}

bool exact_feasible(std::uint64_t n_steps, const OrbitKernel& f, const ExactLimits& limits) {
  return f.dimension() == 1 && n_steps >= 1 && n_steps <= limits.exact_threshold && f.rank() <= limits.rank_limit;
}

DeviationEstimate deviation_exact(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                  const Rational& threshold, const ExactLimits& limits, Comparison cmp) {
  if (f.dimension() != 1) throw Error(ErrorKind::InvalidArgument, "exact deviation sets are Z-action only");
  const unsigned rank = f.rank();
  check_exact_limits(n_steps, rank, limits);
  auto value = [&](std::uint64_t t) {
    std::uint64_t time = t;
    return f.value_at_time(std::span<const std::uint64_t>(&time, 1));
  };
  auto flags = exact_deviation_residues(rank, n_steps, value, center, threshold, cmp);
  const auto hits = static_cast<std::uint64_t>(std::count(flags.begin(), flags.end(), true));
  DeviationEstimate est;
  est.probability = Rational(integer_from_u64(hits), integer_from_u64(std::uint64_t{1} << rank));
  est.probability.canonicalize();
  est.method = EstimateMethod::Exact;
  return est;
}

double hoeffding_radius(std::uint64_t samples, const Rational& alpha) {
  if (samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  return std::sqrt(std::log(2.0 / alpha.get_d()) / (2.0 * static_cast<double>(samples)));
}

void sample_addresses(std::uint64_t seed, std::uint64_t index, unsigned truncation_rank,
                      std::span<std::uint64_t> out) {
  if (truncation_rank == 0 || truncation_rank > 64) {
    throw Error(ErrorKind::InvalidArgument, "truncation rank must lie in [1,64]");
  }
  const std::uint64_t key = splitmix(seed);
  const std::uint64_t keep = truncation_rank == 64 ? ~0ULL : ~((1ULL << (64 - truncation_rank)) - 1);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::uint64_t counter = index * out.size() + j;
    const std::uint64_t digits = splitmix(key ^ splitmix(counter)) & keep;  // x * 2^64
    out[j] = reverse_bits(digits);
  }
}

Point sample_point(std::uint64_t seed, std::uint64_t index, unsigned truncation_rank, std::size_t dimension) {
  std::vector<std::uint64_t> addr(dimension);
  sample_addresses(seed, index, truncation_rank, addr);
  Point p;
  for (auto a : addr) p.push_back(Odometer::point_at(a));
  return p;
}

std::optional<std::uint64_t> count_samples(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                           const Rational& threshold, Comparison cmp, const MonteCarloSettings& mc,
                                           std::optional<std::uint64_t> stop_at) {
  if (n_steps == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (mc.samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  if (threshold < 0) throw Error(ErrorKind::InvalidArgument, "threshold must be >= 0");
  if (stop_at && *stop_at == 0) return std::nullopt;
  const std::size_t dim = f.dimension();
  Integer volume(1);
  for (std::size_t j = 0; j < dim; ++j) volume *= integer_from_u64(n_steps);

  unsigned workers = mc.workers != 0 ? mc.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, mc.samples));
  std::vector<std::uint64_t> matched(workers, 0);
  std::atomic<std::uint64_t> missed{0};
  std::atomic<bool> abort{false};

  auto run = [&](unsigned w) {
    const std::uint64_t begin = mc.samples * w / workers;
    const std::uint64_t end = mc.samples * (w + 1) / workers;
    DeviationTest test(f.denominator(), volume, center, threshold);
    std::vector<std::uint64_t> addr(dim);
    std::uint64_t local = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      if (stop_at && (i & 63) == 0 && abort.load(std::memory_order_relaxed)) return;
      sample_addresses(mc.seed, i, mc.truncation_rank, addr);
      if (test.matches(f.scaled_window_sum(addr, n_steps), cmp)) {
        ++local;
      } else if (stop_at) {
        if (missed.fetch_add(1, std::memory_order_relaxed) + 1 >= *stop_at) {
          abort.store(true);
          return;
        }
      }
    }
    matched[w] = local;
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  if (stop_at && missed.load() >= *stop_at) return std::nullopt;
  std::uint64_t total = 0;
  for (auto m : matched) total += m;
  return total;
}

DeviationEstimate deviation_prob_mc(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                    const Rational& threshold, const MonteCarloSettings& mc) {
  auto hits = count_samples(n_steps, f, center, threshold, Comparison::Above, mc);
  DeviationEstimate est;
  est.probability = Rational(integer_from_u64(*hits), integer_from_u64(mc.samples));
  est.probability.canonicalize();
  est.method = EstimateMethod::MonteCarlo;
  est.sample_count = mc.samples;
  est.confidence_radius = hoeffding_radius(mc.samples, mc.alpha);
  est.seed = mc.seed;
  return est;
}

}  // namespace slowavg
