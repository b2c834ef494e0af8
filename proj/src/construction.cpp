#include "slowavg/construction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slowavg/error.hpp"

namespace slowavg {

namespace {

std::string str(const Rational& q) { return format_rational(q); }

CylinderUnion tower_union(const std::vector<Tower>& towers, std::size_t dim) {
  CylinderUnion u(dim);
  for (const auto& t : towers) u.add(tower_cylinders(t));
  return u;
}

/// Samples needed for a Hoeffding radius of at most delta/2.
std::uint64_t samples_for_margin(const MonteCarloSettings& mc, const Rational& delta) {
  const double half = delta.get_d() / 2.0;
  const double need = std::ceil(std::log(2.0 / mc.alpha.get_d()) / (2.0 * half * half));
  const auto n = static_cast<std::uint64_t>(std::min(need, 1e12));
  return std::max(mc.samples, n);
}

/// m(x : |A(x,N,f) - c| < eps/10) > 1 - delta.
bool scale_is_good(const OrbitKernel& f, const Rational& c, const Rational& eps, const Rational& delta,
                   std::uint64_t n_steps, const ScaleSearch& search) {
  const Rational thr = eps / 10;
  if (exact_feasible(n_steps, f, search.exact)) {
    auto est = deviation_exact(n_steps, f, c, thr, search.exact, Comparison::BelowStrict);
    return est.probability > 1 - delta;
  }
  MonteCarloSettings mc = search.mc;
  mc.samples = samples_for_margin(search.mc, delta);
  const double radius = hoeffding_radius(mc.samples, mc.alpha);
  // Pass iff good/n - radius > 1 - delta, i.e. misses < n (delta - radius).
  const double limit = static_cast<double>(mc.samples) * (delta.get_d() - radius);
  if (limit <= 0) return false;
  const auto stop_at = static_cast<std::uint64_t>(std::ceil(limit));
  return count_samples(n_steps, f, c, thr, Comparison::BelowStrict, mc, stop_at).has_value();
}

DeviationEstimate estimate_deviation(std::uint64_t n_steps, const OrbitKernel& f, const Rational& center,
                                     const Rational& threshold, const MonteCarloSettings& mc,
                                     const ExactLimits& exact) {
  if (exact_feasible(n_steps, f, exact)) return deviation_exact(n_steps, f, center, threshold, exact);
  return deviation_prob_mc(n_steps, f, center, threshold, mc);
}

Tower make_tower(std::uint64_t height, const Rational& eps, const ConstructionParams& p) {
  if (p.dimension == 1) return build_tower(height, eps, p.precision);
  return build_tower_zn(height, eps, p.precision, p.dimension);
}

}  // namespace

void ConstructionParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (dimension == 0) fail("dimension must be >= 1");
  if (f0.dimension() != dimension) fail("f0 dimension does not match dimension");
  if (deviations.size() != lower_scales.size()) fail("deviations and lower_scales must have the same length");
  if (budget <= 0 || budget >= 1) fail("budget must lie in (0,1)");
  if (delta0 <= 0 || delta0 >= 1) fail("delta0 must lie in (0,1)");
  if (safety < 1) fail("safety must be >= 1");
  if (precision == 0 || precision > kRankCap) fail("precision must lie in [1,64]");
  if (mc.samples == 0) fail("mc.samples must be >= 1");
  if (mc.alpha <= 0 || mc.alpha >= 1) fail("mc.alpha must lie in (0,1)");
  if (mc.truncation_rank == 0 || mc.truncation_rank > kRankCap) fail("mc.truncation_rank must lie in [1,64]");
  if (scale_cap == 0) fail("scale_cap must be >= 1");
  const Rational total = integral(f0);
  if (total <= 0) fail("integral of f0 must be > 0");
  Rational sum(0);
  for (std::size_t k = 0; k < deviations.size(); ++k) {
    if (deviations[k] <= 0) fail("deviation a_" + std::to_string(k + 1) + " must be > 0");
    if (k > 0 && lower_scales[k] <= lower_scales[k - 1]) fail("lower_scales must be strictly increasing");
    sum += 2 * deviations[k];
  }
  if (!deviations.empty() && deviations[0] >= total * (1 - budget)) {
    throw Error(ErrorKind::PreconditionViolated, "a_1 = " + str(deviations[0]) + " is not below int f0 * (1 - budget) = " +
                                                     str(total * (1 - budget)));
  }
  if (sum > budget) {
    fail("sum of 2 a_k = " + str(sum) + " exceeds budget " + str(budget));
  }
}

CylinderUnion FunctionSpec::removed() const { return tower_union(towers, dimension); }

OrbitKernel FunctionSpec::kernel() const { return OrbitKernel(f0, removed()); }

Rational deviation_floor(const std::vector<ScheduleEntry>& schedule, std::size_t k) {
  Rational tail(0);
  for (const auto& e : schedule) {
    if (e.k >= k) tail += e.delta;
  }
  return 1 - 2 * tail;
}

ConstructionState initial_state(const ConstructionParams& params) {
  ConstructionState s;
  s.removed = CylinderUnion(params.dimension);
  s.f = OrbitKernel(params.f0, s.removed);
  s.integral_f0 = integral(params.f0);
  s.integral_f = s.integral_f0;
  return s;
}

std::uint64_t find_scale(const OrbitKernel& f, const Rational& integral_f, const Rational& eps, const Rational& delta,
                         std::uint64_t lower, const ScaleSearch& search) {
  if (integral_f <= 0) throw Error(ErrorKind::PreconditionViolated, "find_scale needs f not a.e. 0");
  if (delta <= 0 || delta >= 1) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0,1)");
  if (eps <= 0) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  std::uint64_t n = lower + 1;
  while (true) {
    if (n > search.scale_cap || n == 0) {
      throw Error(ErrorKind::ScaleSearchExhausted, "no good scale up to cap " + std::to_string(search.scale_cap) +
                                                       " for eps = " + str(eps) + ", delta = " + str(delta));
    }
    if (scale_is_good(f, integral_f, eps, delta, n, search)) return n;
    if (n > (~std::uint64_t{0}) / 2) n = 0;
    else n *= 2;
  }
}

std::uint64_t choose_height(std::uint64_t scale, const Rational& delta, const Rational& safety) {
  if (scale == 0) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (delta <= 0 || delta >= 1) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0,1)");
  if (safety < 1) throw Error(ErrorKind::InvalidArgument, "safety must be >= 1");
  const Rational target = safety * Rational(integer_from_u64(scale)) / delta;
  unsigned e = 0;
  Integer h(1);
  while (Rational(h) < target) {
    h *= 2;
    ++e;
  }
  if (e > 63) throw Error(ErrorKind::RankCapExceeded, "tower height 2^" + std::to_string(e) + " exceeds 2^63");
  return std::uint64_t{1} << e;
}

ConstructionState run_stage(const ConstructionState& state, const ConstructionParams& params) {
  const std::size_t k = state.stage + 1;
  if (k > params.stages()) throw Error(ErrorKind::InvalidArgument, "no stage " + std::to_string(k) + " configured");
  const Rational a = params.deviations[k - 1];
  const Rational eps = params.epsilon(k);
  const Rational delta = params.delta(k);
  const Rational sup_f0 = params.f0.max_value();

  if (state.integral_f - eps * sup_f0 <= eps / 2) {
    throw Error(ErrorKind::PreconditionViolated,
                "stage " + std::to_string(k) + ": int f_{k-1} - eps_k sup f0 = " + str(state.integral_f - eps * sup_f0) +
                    " is not above eps_k/2 = " + str(eps / 2));
  }
  const Rational used = state.removed.measure();
  if (used + eps > params.budget) {
    throw Error(ErrorKind::BudgetExhausted, "stage " + std::to_string(k) + ": removed measure " + str(used) +
                                                " plus eps_k = " + str(eps) + " exceeds budget " + str(params.budget));
  }

  ScaleSearch search{params.mc, params.exact, params.scale_cap};
  const std::uint64_t lower = std::max(params.lower_scales[k - 1], state.last_scale);
  const std::uint64_t scale = find_scale(state.f, state.integral_f, eps, delta, lower, search);
  std::uint64_t height = choose_height(scale, delta, params.safety);

  StageRecord rec;
  rec.k = k;
  rec.scale = scale;
  rec.deviation = a;
  rec.epsilon = eps;
  rec.delta = delta;
  rec.integral_before = state.integral_f;

  ConstructionState next;
  for (unsigned attempt = 0;; ++attempt) {
    Tower tower = make_tower(height, eps, params);
    CylinderUnion cyl = tower_cylinders(tower);
    CylinderUnion removed = state.removed;
    removed.add(cyl);
    OrbitKernel fk(params.f0, removed);
    const Rational ik = fk.integral();
    auto est = estimate_deviation(scale, fk, ik, eps / 2, params.mc, params.exact);
    const bool certified = est.probability > 1 - delta;
    if (certified || attempt >= params.max_retries) {
      rec.height = height;
      rec.tower = tower;
      rec.integral_after = ik;
      rec.stage_estimate = est;
      rec.stage_certified = certified;
      rec.retries = attempt;
      rec.integral_drop = state.integral_f - ik;
      rec.drop_bound = Rational(9, 10) * eps * state.integral_f;
      rec.drop_ok = rec.integral_drop > rec.drop_bound;
      rec.near_invariance_gap = abs(ik - (1 - cyl.measure()) * state.integral_f);
      rec.near_invariance_ok = rec.near_invariance_gap < delta;
      next.stage = k;
      next.towers = state.towers;
      next.towers.push_back(tower);
      next.removed = std::move(removed);
      next.f = std::move(fk);
      next.integral_f = ik;
      next.integral_f0 = state.integral_f0;
      next.last_scale = scale;
      next.history = state.history;
      next.history.push_back(rec);
      if (!certified) {
        throw Error(ErrorKind::CertificationFailed,
                    "stage " + std::to_string(k) + ": deviation probability " + str(est.probability) +
                        " not above 1 - delta_k after " + std::to_string(attempt) + " height doublings");
      }
      return next;
    }
    height *= 2;
  }
}

namespace {

void final_pass(const FunctionSpec& spec, const MonteCarloSettings& mc, DeviationReport& report) {
  const CylinderUnion removed = spec.removed();
  const OrbitKernel f(spec.f0, removed);
  report.integral_f = f.integral();
  report.measure_c = 1 - removed.measure();
  report.budget_respected = report.measure_c >= 1 - spec.budget;
  report.finals_passed = true;
  for (const auto& e : spec.schedule) {
    auto it = std::find_if(report.stages.begin(), report.stages.end(), [&](const StageRecord& r) { return r.k == e.k; });
    if (it == report.stages.end()) {
      StageRecord r;
      r.k = e.k;
      r.scale = e.scale;
      r.deviation = e.deviation;
      r.epsilon = e.epsilon;
      r.delta = e.delta;
      if (e.k - 1 < spec.towers.size()) {
        r.tower = spec.towers[e.k - 1];
        r.height = r.tower.height;
      }
      report.stages.push_back(r);
      it = std::prev(report.stages.end());
    }
    auto est = estimate_deviation(e.scale, f, report.integral_f, e.deviation, mc, spec.exact);
    it->floor = deviation_floor(spec.schedule, e.k);
    it->final_passed = est.probability.get_d() > it->floor.get_d() - est.confidence_radius;
    if (est.method == EstimateMethod::Exact) it->final_passed = est.probability > it->floor;
    it->final_estimate = est;
    if (!it->final_passed) {
      report.finals_passed = false;
      if (report.failure.empty()) {
        report.failure = "k = " + std::to_string(e.k) + ": final probability " + str(est.probability) +
                         " below floor " + str(it->floor);
      }
    }
  }
  if (!report.budget_respected && report.failure.empty()) {
    report.failure = "measure(C) = " + str(report.measure_c) + " below 1 - budget";
  }
}

}  // namespace

ConstructionResult run_construction(const ConstructionParams& params) {
  params.validate();
  ConstructionState state = initial_state(params);
  DeviationReport report;
  for (std::size_t k = 1; k <= params.stages(); ++k) {
    try {
      state = run_stage(state, params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CertificationFailed) throw;
      report.stages_certified = false;
      report.failure = e.what();
      break;
    }
  }
  report.stages = state.history;

  FunctionSpec spec;
  spec.dimension = params.dimension;
  spec.f0 = params.f0;
  spec.towers = state.towers;
  spec.mc = params.mc;
  spec.exact = params.exact;
  spec.budget = params.budget;
  for (const auto& r : state.history) spec.schedule.push_back({r.k, r.scale, r.deviation, r.epsilon, r.delta});

  final_pass(spec, params.mc, report);
  return {std::move(spec), std::move(report)};
}

DeviationReport verify(const FunctionSpec& spec, const MonteCarloSettings& mc) {
  for (const auto& t : spec.towers) {
    validate_tower(t);
    if (t.dimension != spec.dimension) throw Error(ErrorKind::Parse, "tower dimension does not match spec");
  }
  if (spec.f0.dimension() != spec.dimension) throw Error(ErrorKind::Parse, "f0 dimension does not match spec");
  for (const auto& e : spec.schedule) {
    if (e.k == 0 || e.scale == 0) throw Error(ErrorKind::Parse, "schedule entries need k >= 1 and N >= 1");
  }
  DeviationReport report;
  final_pass(spec, mc, report);
  return report;
}

}  // namespace slowavg
