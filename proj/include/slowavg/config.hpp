#pragma once

#include <filesystem>
#include <string>

#include "slowavg/construction.hpp"

namespace slowavg {

/// Parses the flat `key = value` run configuration ('#' starts a comment).
/// Unknown or repeated keys and bad values throw Error(Parse) naming the
/// line and key; the result is validated.
ConstructionParams parse_config(const std::string& text);
ConstructionParams load_config(const std::filesystem::path& path);

/// "constant:<r>" or "<box>:<value>; <box>:<value>; ...".
StepFunction parse_f0(const std::string& text, std::size_t dimension);

}  // namespace slowavg
