#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "slowavg/construction.hpp"

namespace slowavg {

// Exit codes shared by the batch commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;      // bad config, malformed spec, budget
inline constexpr int kExitCertified = 2;  // a certification or floor check failed

std::string report_csv(const DeviationReport& report, std::uint64_t seed);
std::string diagnostics_csv(const DeviationReport& report);
std::string verify_csv(const DeviationReport& report);

/// Writes spec.json, report.csv and diagnostics.csv into `out_dir`.
int cmd_construct(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Writes verify.csv next to the spec file.
int cmd_verify(const std::filesystem::path& spec, std::optional<std::uint64_t> samples,
               std::optional<std::uint64_t> seed, std::ostream& log);

/// `points` is a sample count or a ';' separated list of points, each a
/// ',' separated list of dyadic coordinates. Writes trace.csv next to the spec file.
int cmd_trace(const std::filesystem::path& spec, const std::string& points, std::uint64_t nmax, std::ostream& log);

}  // namespace slowavg
