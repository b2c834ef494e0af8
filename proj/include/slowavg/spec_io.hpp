#pragma once

#include <filesystem>
#include <string>

#include "slowavg/construction.hpp"

namespace slowavg {

inline constexpr int kSpecVersion = 1;

/// JSON text of a function spec; parse(serialize(s)) == s.
std::string serialize_spec(const FunctionSpec& spec);
/// Throws Error(Parse) on any malformed or inconsistent input.
FunctionSpec parse_spec(const std::string& text);

FunctionSpec load_spec(const std::filesystem::path& path);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace slowavg
