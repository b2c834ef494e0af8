#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "slowavg/cylinder.hpp"
#include "slowavg/dyadic.hpp"

namespace slowavg {

// Birkhoff sums run over i = 1..N (and z in {1..N}^n), matching
// A(x,N,f) = (1/N) sum_{i=1}^{N} f(T^i x). The point x itself is not sampled.

/// Reference evaluation by walking the orbit point by point.
Rational birkhoff_average(const Dyadic& x, std::uint64_t n_steps, const StepFunction& f);

inline constexpr std::uint64_t kDefaultEvalBudget = std::uint64_t{1} << 24;

/// Reference Z^n square average over Q_N; N^n must not exceed eval_budget.
Rational birkhoff_average_zn(std::span<const Dyadic> x, std::uint64_t n_steps, const StepFunction& f,
                             std::uint64_t eval_budget = kDefaultEvalBudget);

enum class EstimateMethod { Exact, MonteCarlo };
const char* to_string(EstimateMethod m);

struct DeviationEstimate {
  Rational probability;
  EstimateMethod method = EstimateMethod::Exact;
  std::uint64_t sample_count = 0;
  double confidence_radius = 0.0;
  std::uint64_t seed = 0;
};

struct ExactLimits {
  std::uint64_t exact_threshold = 4096;  // largest N handled exactly
  unsigned rank_limit = 20;              // largest rank enumerated cell by cell
};

enum class Comparison { Above, BelowStrict };

/// {x : |A(x,N,f) - center| > threshold}, exactly, for the Z-action.
/// A(.,N,f) is constant on the rank-R cells of f (digits 1..R of T^i x
/// depend only on digits 1..R of x), so every cell is tested once.
IntervalSet deviation_set_exact(std::uint64_t n_steps, const StepFunction& f, const Rational& center,
                                const Rational& threshold, const ExactLimits& limits = {});


/// Measure of {x : |A(x,N,f) - center| > threshold} (or < threshold with
/// BelowStrict) for a one-dimensional kernel.
DeviationEstimate deviation_exact(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                  const Rational& threshold, const ExactLimits& limits = {},
                                  Comparison cmp = Comparison::Above);

bool exact_feasible(std::uint64_t n_steps, const OrbitKernel& f, const ExactLimits& limits);

struct MonteCarloSettings {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  Rational alpha{1, 100};
  unsigned truncation_rank = 53;
  unsigned workers = 0;  // 0: hardware concurrency
};

/// Hoeffding radius sqrt(ln(2/alpha) / (2 samples)).
double hoeffding_radius(std::uint64_t samples, const Rational& alpha);

/// Coordinate addresses of sample `index`; a pure function of (seed, index).
void sample_addresses(std::uint64_t seed, std::uint64_t index, unsigned truncation_rank,
                      std::span<std::uint64_t> out);
Point sample_point(std::uint64_t seed, std::uint64_t index, unsigned truncation_rank, std::size_t dimension);

DeviationEstimate deviation_prob_mc(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                    const Rational& threshold, const MonteCarloSettings& mc);

inline DeviationEstimate deviation_prob_mc(std::uint64_t n_steps, const StepFunction& f, const Rational& center,
                                           const Rational& threshold, const MonteCarloSettings& mc) {
  return deviation_prob_mc(n_steps, OrbitKernel(f), center, threshold, mc);
}


/// Counts samples whose deviation |A - center| compares to `threshold` as
/// requested, over sample indices [0, samples). If `stop_at` is set, workers
/// stop as soon as the number of non-matching samples reaches it and the
/// result is nullopt. The pass/fail outcome does not depend on scheduling.
std::optional<std::uint64_t> count_samples(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                           const Rational& threshold, Comparison cmp, const MonteCarloSettings& mc,
                                           std::optional<std::uint64_t> stop_at = std::nullopt);

}  // namespace slowavg
