#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slowavg/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Slowly converging Birkhoff averages on the dyadic odometer"};
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* construct = app.add_subcommand("construct", "Run the construction and write spec.json and report.csv");
  construct->add_option("--config", config, "Run configuration")->required();
  construct->add_option("--out", out_dir, "Output directory")->required();

  std::string spec;
  std::optional<std::uint64_t> samples, seed;
  auto* verify = app.add_subcommand("verify", "Recheck a saved function and write verify.csv");
  verify->add_option("--spec", spec, "Function spec")->required();
  verify->add_option("--samples", samples, "Monte Carlo samples");
  verify->add_option("--seed", seed, "Monte Carlo seed");

  std::string points;
  std::uint64_t nmax = 0;
  auto* trace = app.add_subcommand("trace", "Write A(x,N,f) for N up to nmax to trace.csv");
  trace->add_option("--spec", spec, "Function spec")->required();
  trace->add_option("--points", points, "Sample count, or points such as 1/4;3/8")->required();
  trace->add_option("--nmax", nmax, "Largest N")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : slowavg::kExitInput;
  }

  if (*construct) return slowavg::cmd_construct(config, out_dir, std::cerr);
  if (*verify) return slowavg::cmd_verify(spec, samples, seed, std::cerr);
  return slowavg::cmd_trace(spec, points, nmax, std::cerr);
}
