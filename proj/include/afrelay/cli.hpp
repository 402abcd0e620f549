#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afrelay/config.hpp"

namespace afrelay {

enum class Subcommand { downlink_sweep, uplink_sweep, convergence, compare_baselines, selftest };

const char* to_string(Subcommand c);
/// Throws InvalidInput for unknown names.
Subcommand parse_subcommand(const std::string& text);

struct CliCommand {
  Subcommand subcommand = Subcommand::selftest;
  std::string config_path;  // empty: defaults only
  std::string output_dir = ".";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_usage = 2, exit_io = 3 };

/// Config after the file, `--set` overrides, `--seed` and command defaults.
ExperimentConfig resolve_config(const CliCommand& cmd);

/// Runs the command, writing results.csv, trace files and metadata.txt into
/// output_dir. Progress and errors go to `log`.
int run_command(const CliCommand& cmd, std::ostream& log);

/// The built-in checks behind `selftest`; returns the number of failures.
int run_selftest(std::ostream& log);

/// 17 significant digits, independent of the global locale.
std::string format_real(double x);

}  // namespace afrelay
