#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "otcal/commands.hpp"
#include "otcal/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Transport-induced metric and calibration verifier"};
  app.require_subcommand(1);

  otcal::CliOptions options;
  std::uint64_t seed = 0;
  int grid = 0;

  for (const char* name :
       {"verify-map", "comass", "mass-compare", "curvature", "suite"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "configuration file")
        ->required();
    sub->add_option("--out", options.out_dir, "output directory");
    sub->add_option("--seed", seed, "root seed for randomized sweeps");
    sub->add_option("--grid", grid, "override domain grid resolution");
    sub->callback([&options, sub, &seed, &grid, name]() {
      options.command = name;
      if (sub->count("--seed")) options.seed = seed;
      if (sub->count("--grid")) options.grid = grid;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return otcal::run_command(options);
  } catch (const otcal::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
