#include "slowavg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "slowavg/error.hpp"

namespace slowavg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(ErrorKind::Parse, "'" + s + "' is not an unsigned integer");
  return v;
}

/// "geometric:<first>,<ratio>,<count>" or a comma separated list.
std::vector<Rational> parse_sequence(const std::string& s) {
  std::vector<Rational> out;
  if (s.starts_with("geometric:")) {
    auto parts = split(s.substr(10), ',');
    if (parts.size() != 3) throw Error(ErrorKind::Parse, "geometric needs <first>,<ratio>,<count>");
    Rational term = parse_rational(parts[0]);
    const Rational ratio = parse_rational(parts[1]);
    const auto count = parse_u64(parts[2]);
    for (std::uint64_t i = 0; i < count; ++i, term *= ratio) out.push_back(term);
    return out;
  }
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(parse_rational(item));
  return out;
}

std::vector<std::uint64_t> parse_scales(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& q : parse_sequence(s)) {
    if (q.get_den() != 1 || q < 0 || !q.get_num().fits_ulong_p()) {
      throw Error(ErrorKind::Parse, "lower scale " + format_rational(q) + " is not a nonnegative integer");
    }
    out.push_back(q.get_num().get_ui());
  }
  return out;
}

}  // namespace

StepFunction parse_f0(const std::string& text, std::size_t dimension) {
  const std::string s = trim(text);
  if (s.starts_with("constant:")) return StepFunction::constant(parse_rational(trim(s.substr(9))), dimension);
  std::vector<StepFunction::Piece> pieces;
  for (const auto& item : split(s, ';')) {
    if (item.empty()) continue;
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Parse, "f0 piece '" + item + "' needs <box>:<value>");
    Box box = parse_box(trim(item.substr(0, colon)));
    if (box.size() != dimension) throw Error(ErrorKind::Parse, "f0 piece '" + item + "' has the wrong dimension");
    pieces.push_back({BoxSet(dimension, {std::move(box)}), parse_rational(trim(item.substr(colon + 1)))});
  }
  return StepFunction(dimension, std::move(pieces));
}

ConstructionParams parse_config(const std::string& text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (entries.contains(key)) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": key '" + key + "' repeated");
    }
    entries[key] = {trim(line.substr(eq + 1)), line_no};
  }

  ConstructionParams p;
  std::string f0_text;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"dimension", [&](const std::string& v) { p.dimension = parse_u64(v); }},
      {"f0", [&](const std::string& v) { f0_text = v; }},
      {"deviations", [&](const std::string& v) { p.deviations = parse_sequence(v); }},
      {"lower_scales", [&](const std::string& v) { p.lower_scales = parse_scales(v); }},
      {"budget", [&](const std::string& v) { p.budget = parse_rational(v); }},
      {"delta0", [&](const std::string& v) { p.delta0 = parse_rational(v); }},
      {"mc.samples", [&](const std::string& v) { p.mc.samples = parse_u64(v); }},
      {"mc.seed", [&](const std::string& v) { p.mc.seed = parse_u64(v); }},
      {"mc.alpha", [&](const std::string& v) { p.mc.alpha = parse_rational(v); }},
      {"mc.truncation_rank", [&](const std::string& v) { p.mc.truncation_rank = static_cast<unsigned>(parse_u64(v)); }},
      {"mc.workers", [&](const std::string& v) { p.mc.workers = static_cast<unsigned>(parse_u64(v)); }},
      {"precision", [&](const std::string& v) { p.precision = static_cast<unsigned>(parse_u64(v)); }},
      {"exact_threshold", [&](const std::string& v) { p.exact.exact_threshold = parse_u64(v); }},
      {"exact_rank_limit", [&](const std::string& v) { p.exact.rank_limit = static_cast<unsigned>(parse_u64(v)); }},
      {"safety", [&](const std::string& v) { p.safety = parse_rational(v); }},
      {"scale_cap", [&](const std::string& v) { p.scale_cap = parse_u64(v); }},
      {"max_retries", [&](const std::string& v) { p.max_retries = static_cast<unsigned>(parse_u64(v)); }},
  };

  for (const auto& [key, entry] : entries) {
    auto it = setters.find(key);
    const std::string where = "line " + std::to_string(entry.line) + ": key '" + key + "'";
    if (it == setters.end()) throw Error(ErrorKind::Parse, where + " is unknown");
    try {
      it->second(entry.value);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, where + ": " + e.what());
    }
  }
  if (!f0_text.empty()) {
    try {
      p.f0 = parse_f0(f0_text, p.dimension);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(entries.at("f0").line) + ": key 'f0': " + e.what());
    }
  } else {
    p.f0 = StepFunction::constant(Rational(2), p.dimension);
  }
  p.validate();
  return p;
}

ConstructionParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace slowavg
