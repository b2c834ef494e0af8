#include "slowavg/spec_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slowavg/error.hpp"

namespace slowavg {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "slowavg-function-spec";

json mc_json(const MonteCarloSettings& mc) {
  return {{"samples", mc.samples},
          {"seed", mc.seed},
          {"alpha", format_rational(mc.alpha)},
          {"truncation_rank", mc.truncation_rank}};
}

Rational rational_field(const json& j, const char* key) { return parse_rational(j.at(key).get<std::string>()); }

FunctionSpec from_json(const json& j) {
  if (j.at("format").get<std::string>() != kFormat) throw Error(ErrorKind::Parse, "not a function spec");
  const int version = j.at("version").get<int>();
  if (version != kSpecVersion) throw Error(ErrorKind::Parse, "unsupported spec version " + std::to_string(version));

  FunctionSpec spec;
  spec.dimension = j.at("dimension").get<std::size_t>();
  if (spec.dimension == 0) throw Error(ErrorKind::Parse, "dimension must be >= 1");

  std::vector<StepFunction::Piece> pieces;
  for (const auto& p : j.at("f0")) {
    std::vector<Box> boxes;
    for (const auto& b : p.at("region")) {
      Box box = parse_box(b.get<std::string>());
      if (box.size() != spec.dimension) throw Error(ErrorKind::Parse, "f0 box dimension mismatch");
      boxes.push_back(std::move(box));
    }
    pieces.push_back({BoxSet(spec.dimension, std::move(boxes)), rational_field(p, "value")});
  }
  spec.f0 = StepFunction(spec.dimension, std::move(pieces));

  for (const auto& t : j.at("towers")) {
    Tower tower;
    tower.width = Dyadic::parse(t.at("d").get<std::string>());
    tower.height = t.at("h").get<std::uint64_t>();
    tower.rank_floor = t.at("m").get<unsigned>();
    tower.dimension = spec.dimension;
    validate_tower(tower);
    spec.towers.push_back(tower);
  }
  for (const auto& e : j.at("schedule")) {
    ScheduleEntry s;
    s.k = e.at("k").get<std::size_t>();
    s.scale = e.at("N").get<std::uint64_t>();
    s.deviation = rational_field(e, "a");
    s.epsilon = rational_field(e, "eps");
    s.delta = rational_field(e, "delta");
    if (s.k == 0 || s.scale == 0) throw Error(ErrorKind::Parse, "schedule entries need k >= 1 and N >= 1");
    spec.schedule.push_back(s);
  }
  spec.budget = rational_field(j, "budget");
  const auto& mc = j.at("mc");
  spec.mc.samples = mc.at("samples").get<std::uint64_t>();
  spec.mc.seed = mc.at("seed").get<std::uint64_t>();
  spec.mc.alpha = rational_field(mc, "alpha");
  spec.mc.truncation_rank = mc.at("truncation_rank").get<unsigned>();
  const auto& ex = j.at("exact");
  spec.exact.exact_threshold = ex.at("threshold").get<std::uint64_t>();
  spec.exact.rank_limit = ex.at("rank_limit").get<unsigned>();
  return spec;
}

}  // namespace

std::string serialize_spec(const FunctionSpec& spec) {
  json f0 = json::array();
  for (const auto& p : spec.f0.pieces()) {
    json region = json::array();
    for (const auto& b : p.region.boxes()) region.push_back(box_to_string(b));
    f0.push_back({{"region", region}, {"value", format_rational(p.value)}});
  }
  json towers = json::array();
  for (const auto& t : spec.towers) {
    towers.push_back({{"d", t.width.to_string()}, {"h", t.height}, {"m", t.rank_floor}});
  }
  json schedule = json::array();
  for (const auto& e : spec.schedule) {
    schedule.push_back({{"k", e.k},
                        {"N", e.scale},
                        {"a", format_rational(e.deviation)},
                        {"eps", format_rational(e.epsilon)},
                        {"delta", format_rational(e.delta)}});
  }
  json j = {{"format", kFormat},
            {"version", kSpecVersion},
            {"dimension", spec.dimension},
            {"f0", f0},
            {"towers", towers},
            {"schedule", schedule},
            {"budget", format_rational(spec.budget)},
            {"mc", mc_json(spec.mc)},
            {"exact", {{"threshold", spec.exact.exact_threshold}, {"rank_limit", spec.exact.rank_limit}}}};
  return j.dump(2) + "\n";
}

FunctionSpec parse_spec(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed spec: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    throw Error(ErrorKind::Parse, std::string("invalid spec: ") + e.what());
  }
}

FunctionSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot read spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace slowavg
