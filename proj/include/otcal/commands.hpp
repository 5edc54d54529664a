#pragma once

#include <optional>
#include <string>

#include "otcal/config.hpp"
#include "otcal/report.hpp"

namespace otcal {

struct CliOptions {
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
};

// Verification pipelines behind the CLI subcommands. Module errors raised by
// individual checks are contained as failed records; ConfigError propagates.
VerificationReport cmd_verify_map(const RunConfig& config,
                                  const std::string& out_dir);
VerificationReport cmd_comass(const RunConfig& config,
                              const std::string& out_dir);
VerificationReport cmd_mass_compare(const RunConfig& config,
                                    const std::string& out_dir);
VerificationReport cmd_curvature(const RunConfig& config,
                                 const std::string& out_dir);

// Full battery over built-in configurations; consolidated report.
VerificationReport cmd_suite(const RunConfig& config,
                             const std::string& out_dir);

// Dispatch; returns the process exit code (0 pass, 1 check failure).
// Throws ConfigError for invalid options or configs (exit code 2 in main).
int run_command(const CliOptions& options);

}  // namespace otcal
