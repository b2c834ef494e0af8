#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slowavg/birkhoff.hpp"
#include "slowavg/cylinder.hpp"
#include "slowavg/dyadic.hpp"
#include "slowavg/tower.hpp"

namespace slowavg {

/// Inputs of the slow-convergence construction. Stage k (1-based) removes a
/// tower of measure eps_k = 2 a_k so that the forced deviation eps_k/2 is
/// the requested a_k, with failure budget delta_k = delta0 2^-k.
struct ConstructionParams {
  std::size_t dimension = 1;
  StepFunction f0 = StepFunction::constant(Rational(2));
  std::vector<Rational> deviations;          // a_1..a_K
  std::vector<std::uint64_t> lower_scales;   // M_1..M_K
  Rational budget{1, 4};                     // upper bound on 1 - m(C)
  Rational delta0{1, 10};
  MonteCarloSettings mc;
  unsigned precision = 60;
  ExactLimits exact;
  Rational safety{4};
  std::uint64_t scale_cap = std::uint64_t{1} << 40;
  unsigned max_retries = 6;

  std::size_t stages() const { return deviations.size(); }
  Rational epsilon(std::size_t k) const { return 2 * deviations.at(k - 1); }
  Rational delta(std::size_t k) const { return delta0 * pow2_rational(-static_cast<int>(k)); }

  /// Throws InvalidArgument / PreconditionViolated naming the broken invariant.
  void validate() const;
};

struct ScheduleEntry {
  std::size_t k = 0;
  std::uint64_t scale = 0;  // N_k
  Rational deviation;       // a_k
  Rational epsilon;         // eps_k
  Rational delta;           // delta_k
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Everything needed to rebuild f = f0 1_C and re-check it.
struct FunctionSpec {
  std::size_t dimension = 1;
  StepFunction f0 = StepFunction::constant(Rational(2));
  std::vector<Tower> towers;
  std::vector<ScheduleEntry> schedule;
  MonteCarloSettings mc;
  ExactLimits exact;
  Rational budget{1, 4};

  CylinderUnion removed() const;
  OrbitKernel kernel() const;
};

struct StageRecord {
  std::size_t k = 0;
  std::uint64_t scale = 0;   // N_k
  std::uint64_t height = 0;  // h_k
  Rational deviation, epsilon, delta;
  Tower tower;
  Rational integral_before;  // int f_{k-1}
  Rational integral_after;   // int f_k
  DeviationEstimate stage_estimate;
  bool stage_certified = false;
  unsigned retries = 0;
  // Paper-side bookkeeping, reported but not enforced.
  Rational integral_drop;
  Rational drop_bound;       // 0.9 eps_k int f_{k-1}
  bool drop_ok = false;
  Rational near_invariance_gap;
  bool near_invariance_ok = false;
  // Filled by the final verification of the finished function.
  std::optional<DeviationEstimate> final_estimate;
  Rational floor;            // 1 - 2 sum_{i>=k} delta_i
  bool final_passed = false;
};

struct DeviationReport {
  std::vector<StageRecord> stages;
  Rational integral_f;
  Rational measure_c;
  bool stages_certified = true;
  bool finals_passed = true;
  bool budget_respected = true;
  std::string failure;

  bool ok() const { return stages_certified && finals_passed && budget_respected; }
};

struct ConstructionState {
  std::size_t stage = 0;
  std::vector<Tower> towers;
  CylinderUnion removed;
  OrbitKernel f;
  Rational integral_f;
  Rational integral_f0;
  std::uint64_t last_scale = 0;
  std::vector<StageRecord> history;
};

ConstructionState initial_state(const ConstructionParams& params);

struct ScaleSearch {
  MonteCarloSettings mc;
  ExactLimits exact;
  std::uint64_t scale_cap = std::uint64_t{1} << 40;
};

/// Smallest N in M+1, 2(M+1), 4(M+1), ... with
/// m(x : |A(x,N,f) - int f| < eps/10) > 1 - delta, decided exactly when
/// feasible and otherwise by Monte Carlo with the Hoeffding radius as margin.
std::uint64_t find_scale(const OrbitKernel& f, const Rational& integral_f, const Rational& eps, const Rational& delta,
                         std::uint64_t lower, const ScaleSearch& search);

/// h = 2^ceil(log2(s N / delta)), so N/h <= delta/s.
std::uint64_t choose_height(std::uint64_t scale, const Rational& delta, const Rational& safety);

/// Runs stage state.stage + 1. Throws CertificationFailed after max_retries
/// height doublings.
ConstructionState run_stage(const ConstructionState& state, const ConstructionParams& params);

struct ConstructionResult {
  FunctionSpec spec;
  DeviationReport report;
};

/// Runs every configured stage, then verifies the final function at every scale.
ConstructionResult run_construction(const ConstructionParams& params);

/// Independent recomputation of int f, m(C), and the final deviation
/// probabilities for every scheduled scale.
DeviationReport verify(const FunctionSpec& spec, const MonteCarloSettings& mc);

/// 1 - 2 sum_{i=k..K} delta_i.
Rational deviation_floor(const std::vector<ScheduleEntry>& schedule, std::size_t k);

}  // namespace slowavg
