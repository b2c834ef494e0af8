#include "slowavg/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "slowavg/config.hpp"
#include "slowavg/error.hpp"
#include "slowavg/odometer.hpp"
#include "slowavg/spec_io.hpp"

namespace slowavg {

namespace {

std::string q(const Rational& r) { return format_rational(r); }

std::string radius(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", r);
  return buf;
}

std::string method_of(const StageRecord& r) {
  const bool has_stage = r.stage_estimate.probability != 0 || r.height != 0;
  std::set<std::string> names;
  if (has_stage) names.insert(to_string(r.stage_estimate.method));
  if (r.final_estimate) names.insert(to_string(r.final_estimate->method));
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : "+") + n;
  return out;
}

constexpr std::uint64_t kTraceRowBudget = 10'000'000;
constexpr std::uint64_t kTraceDenseLimit = 10'000;

std::vector<std::uint64_t> trace_scales(std::uint64_t nmax) {
  std::vector<std::uint64_t> out;
  if (nmax <= kTraceDenseLimit) {
    for (std::uint64_t n = 1; n <= nmax; ++n) out.push_back(n);
    return out;
  }
  // About 64 points per octave, always including every power of two and nmax.
  std::set<std::uint64_t> s;
  for (std::uint64_t p = 1; p <= nmax && p != 0; p <<= 1) {
    for (std::uint64_t j = 0; j < 64; ++j) {
      const std::uint64_t n = p + (p >= 64 ? (p / 64) * j : j);
      if (n <= nmax && n >= p) s.insert(n);
    }
    if (p > nmax / 2) break;
  }
  s.insert(nmax);
  return {s.begin(), s.end()};
}

std::vector<std::vector<std::uint64_t>> trace_points(const std::string& points, const FunctionSpec& spec) {
  std::vector<std::vector<std::uint64_t>> out;
  const bool is_count = !points.empty() && points.find_first_not_of("0123456789") == std::string::npos;
  if (is_count) {
    const std::uint64_t count = std::stoull(points);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::vector<std::uint64_t> a(spec.dimension);
      sample_addresses(spec.mc.seed, i, spec.mc.truncation_rank, a);
      out.push_back(std::move(a));
    }
    return out;
  }
  std::istringstream in(points);
  std::string item;
  while (std::getline(in, item, ';')) {
    std::istringstream coords(item);
    std::string c;
    std::vector<std::uint64_t> a;
    while (std::getline(coords, c, ',')) {
      Dyadic x = Dyadic::parse(c);
      if (x < Dyadic::from_u64(0, 0) || !(x < Dyadic::from_u64(1, 0))) {
        throw Error(ErrorKind::InvalidArgument, "point coordinate " + c + " outside [0,1)");
      }
      a.push_back(Odometer::address(x));
    }
    if (a.size() != spec.dimension) throw Error(ErrorKind::InvalidArgument, "point '" + item + "' has the wrong dimension");
    out.push_back(std::move(a));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no trace points given");
  return out;
}

}  // namespace

std::string report_csv(const DeviationReport& report, std::uint64_t seed) {
  std::string out = "k,N_k,h_k,eps_k,delta_k,integral_fk,stage_prob,stage_radius,final_prob,final_radius,floor,method,seed\n";
  for (const auto& r : report.stages) {
    const bool fin = r.final_estimate.has_value();
    out += std::to_string(r.k) + "," + std::to_string(r.scale) + "," + std::to_string(r.height) + "," + q(r.epsilon) +
           "," + q(r.delta) + "," + q(r.integral_after) + "," + q(r.stage_estimate.probability) + "," +
           radius(r.stage_estimate.confidence_radius) + "," + (fin ? q(r.final_estimate->probability) : "") + "," +
           (fin ? radius(r.final_estimate->confidence_radius) : "") + "," + q(r.floor) + "," + method_of(r) + "," +
           std::to_string(seed) + "\n";
  }
  return out;
}

std::string diagnostics_csv(const DeviationReport& report) {
  std::string out =
      "k,integral_before,integral_after,drop,drop_bound,drop_ok,near_invariance_gap,delta_k,near_invariance_ok,"
      "stage_certified,retries,tower\n";
  for (const auto& r : report.stages) {
    out += std::to_string(r.k) + "," + q(r.integral_before) + "," + q(r.integral_after) + "," + q(r.integral_drop) +
           "," + q(r.drop_bound) + "," + (r.drop_ok ? "1" : "0") + "," + q(r.near_invariance_gap) + "," + q(r.delta) +
           "," + (r.near_invariance_ok ? "1" : "0") + "," + (r.stage_certified ? "1" : "0") + "," +
           std::to_string(r.retries) + ",\"" + r.tower.to_string() + "\"\n";
  }
  return out;
}

std::string verify_csv(const DeviationReport& report) {
  std::string out = "k,N_k,a_k,floor,final_prob,final_radius,method,seed,pass\n";
  for (const auto& r : report.stages) {
    const auto& e = *r.final_estimate;
    out += std::to_string(r.k) + "," + std::to_string(r.scale) + "," + q(r.deviation) + "," + q(r.floor) + "," +
           q(e.probability) + "," + radius(e.confidence_radius) + "," + to_string(e.method) + "," +
           std::to_string(e.seed) + "," + (r.final_passed ? "1" : "0") + "\n";
  }
  return out;
}

int cmd_construct(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log) {
  ConstructionParams params;
  ConstructionResult result;
  try {
    params = load_config(config);
    result = run_construction(params);
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "spec.json", serialize_spec(result.spec));
    write_file_atomic(out_dir / "report.csv", report_csv(result.report, params.mc.seed));
    write_file_atomic(out_dir / "diagnostics.csv", diagnostics_csv(result.report));
  } catch (const std::exception& e) {
    log << "construct: " << e.what() << "\n";
    return kExitInput;
  }
  if (!result.report.ok()) {
    log << "construct: certification failed: " << result.report.failure << "\n";
    return kExitCertified;
  }
  return kExitOk;
}

int cmd_verify(const std::filesystem::path& spec_path, std::optional<std::uint64_t> samples,
               std::optional<std::uint64_t> seed, std::ostream& log) {
  DeviationReport report;
  try {
    const FunctionSpec spec = load_spec(spec_path);
    MonteCarloSettings mc = spec.mc;
    if (samples) mc.samples = *samples;
    if (seed) mc.seed = *seed;
    if (mc.samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
    report = verify(spec, mc);
    write_file_atomic(spec_path.parent_path() / "verify.csv", verify_csv(report));
  } catch (const std::exception& e) {
    log << "verify: " << e.what() << "\n";
    return kExitInput;
  }
  if (!report.ok()) {
    log << "verify: " << report.failure << "\n";
    return kExitCertified;
  }
  return kExitOk;
}

int cmd_trace(const std::filesystem::path& spec_path, const std::string& points, std::uint64_t nmax,
              std::ostream& log) {
  try {
    if (nmax == 0) throw Error(ErrorKind::InvalidArgument, "nmax must be >= 1");
    const FunctionSpec spec = load_spec(spec_path);
    const OrbitKernel f = spec.kernel();
    const Rational integral_f = f.integral();
    const auto xs = trace_points(points, spec);
    const auto scales = trace_scales(nmax);
    if (xs.size() * scales.size() > kTraceRowBudget) {
      throw Error(ErrorKind::EvaluationBudget, "trace would write more than " + std::to_string(kTraceRowBudget) + " rows");
    }
    std::string out = "x_id,N,average,integral,abs_deviation\n";
    auto row = [&](std::size_t id, std::uint64_t n, const Rational& avg) {
      out += std::to_string(id) + "," + std::to_string(n) + "," + q(avg) + "," + q(integral_f) + "," +
             q(abs(avg - integral_f)) + "\n";
    };
    const bool dense = nmax <= kTraceDenseLimit && spec.dimension == 1;
    for (std::size_t id = 0; id < xs.size(); ++id) {
      if (dense) {
        // Running sum: one evaluation of f per step.
        Rational sum(0);
        for (std::uint64_t n = 1; n <= nmax; ++n) {
          const std::uint64_t a = xs[id][0] + n;
          sum += f.value_at_address(std::span<const std::uint64_t>(&a, 1));
          Rational avg = sum / Rational(integer_from_u64(n));
          row(id, n, avg);
        }
      } else {
        for (auto n : scales) row(id, n, f.average(xs[id], n));
      }
    }
    write_file_atomic(spec_path.parent_path() / "trace.csv", out);
  } catch (const std::exception& e) {
    log << "trace: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace slowavg
